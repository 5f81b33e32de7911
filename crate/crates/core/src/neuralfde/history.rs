use std::io::{Read, Write};

use crate::nn::io::FormatError;

/// Per-iteration training record.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LossHistory {
    /// Loss before the parameter update of each iteration.
    pub loss: Vec<f64>,
    /// Realized order at each iteration; `None` for integer-order models.
    pub alpha: Vec<Option<f64>>,
    /// Wall-clock seconds per iteration.
    pub seconds: Vec<f64>,
    /// Loss of the final parameters.
    pub final_loss: f64,
}

impl LossHistory {
    pub fn push(&mut self, loss: f64, alpha: Option<f64>, seconds: f64) {
        self.loss.push(loss);
        self.alpha.push(alpha);
        self.seconds.push(seconds);
    }

    pub fn len(&self) -> usize {
        self.loss.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loss.is_empty()
    }

    /// CSV `iter,loss,alpha,seconds`. With `with_seconds = false` the timing
    /// column is left empty so that the file depends only on the computation.
    pub fn write_csv<W: Write>(&self, mut w: W, with_seconds: bool) -> std::io::Result<()> {
        writeln!(w, "iter,loss,alpha,seconds")?;
        for i in 0..self.len() {
            write!(w, "{i},{:e},", self.loss[i])?;
            if let Some(a) = self.alpha[i] {
                write!(w, "{a:e}")?;
            }
            w.write_all(b",")?;
            if with_seconds {
                write!(w, "{:e}", self.seconds[i])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Inverse of [`write_csv`](Self::write_csv); missing timings read as 0.
    pub fn read_csv<R: Read>(input: R) -> Result<Self, FormatError> {
        let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
        let mut out = LossHistory::default();
        for (row, record) in reader.records().enumerate() {
            let line = row + 1;
            let err = |message: String| FormatError { line, message };
            let record = record.map_err(|e| err(e.to_string()))?;
            let fields: Vec<&str> = record.iter().map(str::trim).collect();
            if row == 0 {
                if fields != ["iter", "loss", "alpha", "seconds"] {
                    return Err(err("expected header `iter,loss,alpha,seconds`".into()));
                }
                continue;
            }
            let [iter, loss, alpha, seconds] = fields[..] else {
                return Err(err(format!("expected 4 fields, found {}", fields.len())));
            };
            if iter.parse::<usize>().ok() != Some(out.len()) {
                return Err(err(format!("iteration `{iter}` out of sequence")));
            }
            let real = |s: &str| s.parse::<f64>().map_err(|_| err(format!("`{s}` is not a real number")));
            let loss = real(loss)?;
            let alpha = if alpha.is_empty() { None } else { Some(real(alpha)?) };
            let seconds = if seconds.is_empty() { 0.0 } else { real(seconds)? };
            out.push(loss, alpha, seconds);
        }
        if out.is_empty() {
            return Err(FormatError { line: 1, message: "no iterations".into() });
        }
        out.final_loss = out.loss[out.len() - 1];
        Ok(out)
    }
}
