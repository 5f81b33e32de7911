//! Line-oriented text encoding of networks.
//!
//! A network block looks like
//!
//! ```text
//! mlp f_net
//! layer_sizes 1 64 64 1
//! output_activation identity
//! seed 7
//! layer 0 weights <row-major values>
//! layer 0 biases <values>
//! ...
//! end mlp
//! ```
//!
//! Reals are written with the shortest representation that round-trips.

use std::fmt::Write as _;

use thiserror::Error;

use super::{DenseLayer, Mlp, MlpConfig, OutputActivation};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

/// Cursor over non-empty, non-comment lines, tracking 1-based line numbers.
pub struct LineReader<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> LineReader<'a> {
    pub fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Self { lines, pos: 0 }
    }

    pub fn line_no(&self) -> usize {
        self.lines.get(self.pos).map(|l| l.0).unwrap_or_else(|| self.lines.last().map(|l| l.0 + 1).unwrap_or(1))
    }

    pub fn error(&self, message: impl Into<String>) -> FormatError {
        FormatError { line: self.line_no(), message: message.into() }
    }

    pub fn peek(&self) -> Option<&'a str> {
        self.lines.get(self.pos).map(|l| l.1)
    }

    pub fn next_line(&mut self) -> Result<(usize, &'a str), FormatError> {
        let l = self.lines.get(self.pos).copied().ok_or_else(|| self.error("unexpected end of input"))?;
        self.pos += 1;
        Ok(l)
    }

    /// Next line, which must begin with the tokens in `key`; returns the remaining tokens.
    pub fn expect(&mut self, key: &[&str]) -> Result<(usize, Vec<&'a str>), FormatError> {
        let (no, line) = self.next_line()?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < key.len() || tokens[..key.len()] != *key {
            return Err(FormatError { line: no, message: format!("expected `{}`", key.join(" ")) });
        }
        Ok((no, tokens[key.len()..].to_vec()))
    }

    pub fn is_done(&self) -> bool {
        self.pos >= self.lines.len()
    }
}

pub fn parse_real(token: &str, line: usize) -> Result<f64, FormatError> {
    let v: f64 = token
        .parse()
        .map_err(|_| FormatError { line, message: format!("`{token}` is not a real number") })?;
    if !v.is_finite() {
        return Err(FormatError { line, message: format!("`{token}` is not finite") });
    }
    Ok(v)
}

pub fn parse_reals(tokens: &[&str], line: usize) -> Result<Vec<f64>, FormatError> {
    tokens.iter().map(|t| parse_real(t, line)).collect()
}

pub fn parse_count(token: &str, line: usize) -> Result<usize, FormatError> {
    token
        .parse()
        .map_err(|_| FormatError { line, message: format!("`{token}` is not a non-negative integer") })
}

pub fn push_reals(out: &mut String, values: &[f64]) {
    for v in values {
        let _ = write!(out, " {v:?}");
    }
}

pub fn write_mlp(out: &mut String, name: &str, mlp: &Mlp) {
    let cfg = mlp.config();
    let _ = writeln!(out, "mlp {name}");
    out.push_str("layer_sizes");
    for s in &cfg.layer_sizes {
        let _ = write!(out, " {s}");
    }
    out.push('\n');
    let _ = writeln!(out, "output_activation {}", cfg.output_activation.as_str());
    let _ = writeln!(out, "seed {}", cfg.seed);
    for (l, layer) in mlp.layers().iter().enumerate() {
        let _ = write!(out, "layer {l} weights");
        push_reals(out, &layer.weights);
        out.push('\n');
        let _ = write!(out, "layer {l} biases");
        push_reals(out, &layer.biases);
        out.push('\n');
    }
    out.push_str("end mlp\n");
}

/// Largest layer width accepted when decoding, bounding allocation on hostile input.
const MAX_WIDTH: usize = 1 << 16;

pub fn read_mlp(reader: &mut LineReader<'_>, name: &str) -> Result<Mlp, FormatError> {
    reader.expect(&["mlp", name])?;
    let (no, sizes) = reader.expect(&["layer_sizes"])?;
    let layer_sizes = sizes.iter().map(|t| parse_count(t, no)).collect::<Result<Vec<_>, _>>()?;
    if layer_sizes.len() < 2 || layer_sizes.iter().any(|&s| s == 0 || s > MAX_WIDTH) {
        return Err(FormatError { line: no, message: "invalid layer sizes".into() });
    }
    let (no, act) = reader.expect(&["output_activation"])?;
    let output_activation = match act.as_slice() {
        [a] => OutputActivation::parse(a),
        _ => None,
    }
    .ok_or_else(|| FormatError { line: no, message: "unknown output activation".into() })?;
    let (no, seed) = reader.expect(&["seed"])?;
    let seed = match seed.as_slice() {
        [s] => s.parse::<u64>().ok(),
        _ => None,
    }
    .ok_or_else(|| FormatError { line: no, message: "invalid seed".into() })?;

    let mut layers = Vec::with_capacity(layer_sizes.len() - 1);
    for (l, w) in layer_sizes.windows(2).enumerate() {
        let tag = l.to_string();
        let (no, weights) = reader.expect(&["layer", &tag, "weights"])?;
        let weights = parse_reals(&weights, no)?;
        if weights.len() != w[0] * w[1] {
            return Err(FormatError {
                line: no,
                message: format!("layer {l} needs {} weights, found {}", w[0] * w[1], weights.len()),
            });
        }
        let (no, biases) = reader.expect(&["layer", &tag, "biases"])?;
        let biases = parse_reals(&biases, no)?;
        if biases.len() != w[1] {
            return Err(FormatError {
                line: no,
                message: format!("layer {l} needs {} biases, found {}", w[1], biases.len()),
            });
        }
        layers.push(DenseLayer { inputs: w[0], outputs: w[1], weights, biases });
    }
    reader.expect(&["end", "mlp"])?;
    let config = MlpConfig::new(layer_sizes, output_activation, seed);
    Mlp::from_layers(config, layers).map_err(|e| reader.error(e.to_string()))
}
