use super::SolverError;
use crate::autodiff::Scalar;

/// k^e for a non-negative integer k, with 0^e = 0 and 1^e = 1 held exact.
fn int_pow<S: Scalar>(k: usize, e: S) -> S {
    match k {
        0 => e.lift(0.0),
        1 => e.lift(1.0),
        _ => e.base_pow(k as f64),
    }
}

/// Quadrature weights of the fractional Adams scheme, indexed by the lag
/// `k = n - j` so that one table serves every step of a solve.
pub(crate) struct WeightTable<S> {
    alpha: S,
    /// k^α for k = 0..=n_max + 1
    pow_a: Vec<S>,
    /// k^(α+1) for k = 0..=n_max + 1
    pow_a1: Vec<S>,
    /// dt^α / α
    rect_scale: S,
}

impl<S: Scalar> WeightTable<S> {
    pub(crate) fn new(alpha: S, dt: f64, n_max: usize) -> Self {
        let alpha1 = alpha + alpha.lift(1.0);
        let pow_a = (0..=n_max + 2).map(|k| int_pow(k, alpha)).collect();
        let pow_a1 = (0..=n_max + 2).map(|k| int_pow(k, alpha1)).collect();
        let rect_scale = alpha.base_pow(dt) / alpha;
        Self { alpha, pow_a, pow_a1, rect_scale }
    }

    /// Predictor weight b_{j,n+1} with lag k = n - j:
    /// (dt^α/α) ((k+1)^α - k^α).
    pub(crate) fn rect(&self, k: usize) -> S {
        self.rect_scale * (self.pow_a[k + 1] - self.pow_a[k])
    }

    /// Corrector weight a_{0,n+1} = n^(α+1) - (n - α)(n+1)^α.
    pub(crate) fn trap_first(&self, n: usize) -> S {
        let nf = self.alpha.lift(n as f64);
        self.pow_a1[n] - (nf - self.alpha) * self.pow_a[n + 1]
    }

    /// Corrector weight a_{j,n+1} for 1 <= j <= n with lag k = n - j:
    /// (k+2)^(α+1) + k^(α+1) - 2 (k+1)^(α+1).
    pub(crate) fn trap_mid(&self, k: usize) -> S {
        let two = self.alpha.lift(2.0);
        self.pow_a1[k + 2] + self.pow_a1[k] - two * self.pow_a1[k + 1]
    }
}

fn check_alpha(alpha: f64) -> Result<(), SolverError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(SolverError::Domain { what: "alpha", value: alpha });
    }
    Ok(())
}

/// Predictor (fractional rectangle rule) weights b[0..=n] for step n → n+1.
pub fn predictor_weights(n: usize, alpha: f64, dt: f64) -> Result<Vec<f64>, SolverError> {
    check_alpha(alpha)?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(SolverError::Domain { what: "dt", value: dt });
    }
    let table = WeightTable::new(alpha, dt, n);
    Ok((0..=n).map(|j| table.rect(n - j)).collect())
}

/// Corrector (fractional trapezoidal rule) weights a[0..=n+1] for step n → n+1,
/// before the common factor dt^α / Γ(α + 2).
pub fn corrector_weights(n: usize, alpha: f64) -> Result<Vec<f64>, SolverError> {
    check_alpha(alpha)?;
    let table = WeightTable::new(alpha, 1.0, n);
    let mut a = Vec::with_capacity(n + 2);
    a.push(table.trap_first(n));
    a.extend((1..=n).map(|j| table.trap_mid(n - j)));
    a.push(1.0);
    Ok(a)
}
