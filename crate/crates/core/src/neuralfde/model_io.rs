//! Text format of a trained model:
//!
//! ```text
//! neural-fde model v1
//! t0 0
//! x0 0.3
//! solver_dt 0.5
//! time_input false
//! order scalar_logit 4.59511985013459
//! norm none
//! mlp f_net
//! ...
//! end mlp
//! end model
//! ```
//!
//! `order` is one of `scalar_logit <logit>`, `tiny_net <alpha_in>` (followed
//! by an `mlp alpha_net` block), `fixed <alpha>` or `ode`. `norm` is either
//! `none` or followed by `norm_min` and `norm_max` lines.

use std::fmt::Write as _;

use super::{Order, TrainedModel};
use crate::data::NormStats;
use crate::nn::io::{parse_real, parse_reals, push_reals, read_mlp, write_mlp, FormatError, LineReader};
use crate::nn::AlphaParam;

const MAGIC: &str = "neural-fde model v1";

pub fn write_model(model: &TrainedModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "t0 {:?}", model.t0);
    out.push_str("x0");
    push_reals(&mut out, &model.x0);
    out.push('\n');
    let _ = writeln!(out, "solver_dt {:?}", model.solver_dt);
    let _ = writeln!(out, "time_input {}", model.time_input);
    match &model.order {
        Order::Learned(AlphaParam::ScalarLogit { logit }) => {
            let _ = writeln!(out, "order scalar_logit {logit:?}");
        }
        Order::Learned(AlphaParam::TinyNet { net, alpha_in }) => {
            let _ = writeln!(out, "order tiny_net {alpha_in:?}");
            write_mlp(&mut out, "alpha_net", net);
        }
        Order::Fixed(a) => {
            let _ = writeln!(out, "order fixed {a:?}");
        }
        Order::Ode => out.push_str("order ode\n"),
    }
    match &model.norm {
        None => out.push_str("norm none\n"),
        Some(stats) => {
            out.push_str("norm minmax\nnorm_min");
            push_reals(&mut out, &stats.min);
            out.push_str("\nnorm_max");
            push_reals(&mut out, &stats.max);
            out.push('\n');
        }
    }
    write_mlp(&mut out, "f_net", &model.f_net);
    out.push_str("end model\n");
    out
}

fn single<'a>(tokens: &[&'a str], line: usize, what: &str) -> Result<&'a str, FormatError> {
    match tokens {
        [t] => Ok(t),
        _ => Err(FormatError { line, message: format!("expected one value for {what}") }),
    }
}

pub fn read_model(text: &str) -> Result<TrainedModel, FormatError> {
    let mut r = LineReader::new(text);
    let (no, first) = r.next_line()?;
    if first != MAGIC {
        return Err(FormatError { line: no, message: format!("expected `{MAGIC}`") });
    }
    let (no, t) = r.expect(&["t0"])?;
    let t0 = parse_real(single(&t, no, "t0")?, no)?;
    let (no, x) = r.expect(&["x0"])?;
    let x0 = parse_reals(&x, no)?;
    if x0.is_empty() {
        return Err(FormatError { line: no, message: "empty initial state".into() });
    }
    let (no, dt) = r.expect(&["solver_dt"])?;
    let solver_dt = parse_real(single(&dt, no, "solver_dt")?, no)?;
    if solver_dt <= 0.0 {
        return Err(FormatError { line: no, message: "solver_dt must be positive".into() });
    }
    let (no, ti) = r.expect(&["time_input"])?;
    let time_input = match single(&ti, no, "time_input")? {
        "true" => true,
        "false" => false,
        other => return Err(FormatError { line: no, message: format!("`{other}` is not a boolean") }),
    };

    let (no, ord) = r.expect(&["order"])?;
    let order = match ord.as_slice() {
        ["scalar_logit", v] => Order::Learned(AlphaParam::ScalarLogit { logit: parse_real(v, no)? }),
        ["tiny_net", v] => {
            let alpha_in = parse_real(v, no)?;
            let net = read_mlp(&mut r, "alpha_net")?;
            let cfg = net.config();
            if cfg.layer_sizes.first() != Some(&1) || cfg.layer_sizes.last() != Some(&1) {
                return Err(FormatError { line: no, message: "alpha_net must map 1 input to 1 output".into() });
            }
            Order::Learned(AlphaParam::TinyNet { net, alpha_in })
        }
        ["fixed", v] => {
            let a = parse_real(v, no)?;
            if !(a > 0.0 && a <= 1.0) {
                return Err(FormatError { line: no, message: format!("alpha {a} outside (0, 1]") });
            }
            Order::Fixed(a)
        }
        ["ode"] => Order::Ode,
        _ => return Err(FormatError { line: no, message: "unknown order specification".into() }),
    };

    let (no, kind) = r.expect(&["norm"])?;
    let norm = match single(&kind, no, "norm")? {
        "none" => None,
        "minmax" => {
            let (no, lo) = r.expect(&["norm_min"])?;
            let min = parse_reals(&lo, no)?;
            let (no, hi) = r.expect(&["norm_max"])?;
            let max = parse_reals(&hi, no)?;
            if min.len() != x0.len() || max.len() != x0.len() || min.iter().zip(&max).any(|(a, b)| !(b > a)) {
                return Err(FormatError { line: no, message: "inconsistent normalization ranges".into() });
            }
            Some(NormStats { min, max })
        }
        other => return Err(FormatError { line: no, message: format!("unknown normalization `{other}`") }),
    };

    let net_line = r.line_no();
    let f_net = read_mlp(&mut r, "f_net")?;
    let want_in = x0.len() + usize::from(time_input);
    if f_net.input_dim() != want_in || f_net.output_dim() != x0.len() {
        return Err(FormatError {
            line: net_line,
            message: format!(
                "f_net maps {} -> {}, expected {want_in} -> {}",
                f_net.input_dim(),
                f_net.output_dim(),
                x0.len()
            ),
        });
    }
    r.expect(&["end", "model"])?;
    if !r.is_done() {
        return Err(r.error("trailing content after `end model`"));
    }
    Ok(TrainedModel { f_net, order, t0, x0, solver_dt, time_input, norm })
}
