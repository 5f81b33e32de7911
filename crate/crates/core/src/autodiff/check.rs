use super::{AutodiffError, Tape, Var};

/// Result of comparing taped gradients against central differences.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
    /// max_i |g_ad - g_fd| / max(1, |g_fd|)
    pub max_rel_error: f64,
}

/// Compare reverse-mode gradients of `eval` at `params` with
/// `(f(p + eps e_i) - f(p - eps e_i)) / (2 eps)` for every component.
pub fn grad_check<F, E>(eval: F, params: &[f64], eps: f64) -> Result<GradCheck, E>
where
    F: for<'t> Fn(&'t Tape, &[Var<'t>]) -> Result<Var<'t>, E>,
    E: From<AutodiffError>,
{
    if !(1e-7..=1e-3).contains(&eps) {
        return Err(AutodiffError::InvalidStep(eps).into());
    }
    let analytic = {
        let tape = Tape::new();
        let vars: Vec<Var<'_>> = params.iter().map(|&p| tape.param(p)).collect();
        let out = eval(&tape, &vars)?;
        tape.backward(out.id())?.params()
    };
    let value_at = |p: &[f64]| -> Result<f64, E> {
        let tape = Tape::new();
        let vars: Vec<Var<'_>> = p.iter().map(|&x| tape.param(x)).collect();
        Ok(crate::autodiff::Scalar::value(&eval(&tape, &vars)?))
    };
    let mut numeric = Vec::with_capacity(params.len());
    let mut shifted = params.to_vec();
    for i in 0..params.len() {
        shifted[i] = params[i] + eps;
        let up = value_at(&shifted)?;
        shifted[i] = params[i] - eps;
        let down = value_at(&shifted)?;
        shifted[i] = params[i];
        numeric.push((up - down) / (2.0 * eps));
    }
    let max_rel_error = analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| (a - n).abs() / n.abs().max(1.0))
        .fold(0.0, f64::max);
    Ok(GradCheck { analytic, numeric, max_rel_error })
}
