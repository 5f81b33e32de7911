//! Scalar special functions and interpolation shared by the solvers,
//! the data generators, and the test oracles.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("{function}: argument {value} outside the supported domain")]
    Domain { function: &'static str, value: f64 },
    #[error("series did not reach tolerance within {terms} terms")]
    NonConvergence { terms: usize },
    #[error("t = {t} outside interpolation range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Truncation control for series evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl ToleranceSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_terms: usize) -> Result<Self, NumericsError> {
        if !(abs_tol > 0.0) || !abs_tol.is_finite() {
            return Err(NumericsError::Domain { function: "ToleranceSpec.abs_tol", value: abs_tol });
        }
        if !(rel_tol > 0.0) || !rel_tol.is_finite() {
            return Err(NumericsError::Domain { function: "ToleranceSpec.rel_tol", value: rel_tol });
        }
        if max_terms == 0 {
            return Err(NumericsError::Domain { function: "ToleranceSpec.max_terms", value: 0.0 });
        }
        Ok(Self { abs_tol, rel_tol, max_terms })
    }
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self { abs_tol: 1e-16, rel_tol: 1e-16, max_terms: 1000 }
    }
}

// Lanczos approximation, g = 7, nine coefficients.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(zm1: f64) -> f64 {
    let mut x = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        x += c / (zm1 + i as f64);
    }
    x
}

/// Γ(z) for real z > 0.
///
/// Integer arguments up to 30 return the exact factorial so that
/// Γ(1) = 1 and Γ(3) = 2 hold bit-for-bit (the α = 1 solver path relies on it).
pub fn gamma(z: f64) -> Result<f64, NumericsError> {
    if !z.is_finite() || z <= 0.0 {
        return Err(NumericsError::Domain { function: "gamma", value: z });
    }
    Ok(gamma_unchecked(z))
}

pub(crate) fn gamma_unchecked(z: f64) -> f64 {
    if z.fract() == 0.0 && z <= 30.0 {
        let mut acc = 1.0;
        let mut k = 2.0;
        while k < z {
            acc *= k;
            k += 1.0;
        }
        return acc;
    }
    if z < 0.5 {
        return PI / ((PI * z).sin() * gamma_unchecked(1.0 - z));
    }
    let zm1 = z - 1.0;
    let t = zm1 + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(zm1 + 0.5) * (-t).exp() * lanczos_sum(zm1)
}

/// ln Γ(z) for z > 0.
pub fn ln_gamma(z: f64) -> Result<f64, NumericsError> {
    if !z.is_finite() || z <= 0.0 {
        return Err(NumericsError::Domain { function: "ln_gamma", value: z });
    }
    Ok(ln_gamma_unchecked(z))
}

fn ln_gamma_unchecked(z: f64) -> f64 {
    if z < 0.5 {
        return (PI / (PI * z).sin()).ln() - ln_gamma_unchecked(1.0 - z);
    }
    let zm1 = z - 1.0;
    let t = zm1 + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (zm1 + 0.5) * t.ln() - t + lanczos_sum(zm1).ln()
}

/// ψ(z) = Γ'(z)/Γ(z) for z > 0. Used for the derivative of the taped Γ node.
pub fn digamma(z: f64) -> Result<f64, NumericsError> {
    if !z.is_finite() || z <= 0.0 {
        return Err(NumericsError::Domain { function: "digamma", value: z });
    }
    Ok(digamma_unchecked(z))
}

pub(crate) fn digamma_unchecked(mut z: f64) -> f64 {
    let mut shift = 0.0;
    while z < 12.0 {
        shift -= 1.0 / z;
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    // Asymptotic series with Bernoulli coefficients B_2k / 2k.
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    shift + z.ln() - 0.5 * inv - tail
}

/// One-parameter Mittag-Leffler function E_α(z) = Σ z^k / Γ(αk + 1),
/// restricted to α ∈ (0, 1] and z ∈ [-5, 0] where the power series is usable.
pub fn mittag_leffler(alpha: f64, z: f64, tol: ToleranceSpec) -> Result<f64, NumericsError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(NumericsError::Domain { function: "mittag_leffler.alpha", value: alpha });
    }
    if !z.is_finite() || z > 0.0 || z < -5.0 {
        return Err(NumericsError::Domain { function: "mittag_leffler.z", value: z });
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let ln_abs_z = z.abs().ln();
    let mut sum = 1.0;
    for k in 1..tol.max_terms {
        let kf = k as f64;
        let arg = alpha * kf + 1.0;
        let direct = z.powi(k as i32) / gamma_unchecked(arg);
        let term = if direct.is_finite() && arg < 170.0 {
            direct
        } else {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * (kf * ln_abs_z - ln_gamma_unchecked(arg)).exp()
        };
        sum += term;
        if term.abs() < tol.abs_tol || term.abs() < tol.rel_tol * sum.abs() {
            return Ok(sum);
        }
    }
    Err(NumericsError::NonConvergence { terms: tol.max_terms })
}

/// Location of `t` inside an ascending node sequence: the lower node index
/// and the fractional weight toward the next node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Bracket {
    pub lo: usize,
    pub weight: f64,
}

pub(crate) fn bracket(times: &[f64], t: f64) -> Result<Bracket, NumericsError> {
    let (first, last) = (times[0], times[times.len() - 1]);
    if !(t >= first && t <= last) {
        return Err(NumericsError::OutOfRange { t, lo: first, hi: last });
    }
    // First index with times[i] > t, so times[lo] <= t < times[lo + 1].
    let upper = times.partition_point(|&x| x <= t);
    if upper >= times.len() {
        return Ok(Bracket { lo: times.len() - 1, weight: 0.0 });
    }
    let lo = upper - 1;
    let weight = (t - times[lo]) / (times[lo + 1] - times[lo]);
    Ok(Bracket { lo, weight })
}

/// Piecewise-linear interpolation through `(times, values)` at `t`.
pub fn linear_interp(times: &[f64], values: &[f64], t: f64) -> Result<f64, NumericsError> {
    if times.len() != values.len() {
        return Err(NumericsError::Shape(format!(
            "{} times vs {} values",
            times.len(),
            values.len()
        )));
    }
    if times.len() < 2 {
        return Err(NumericsError::Shape("need at least two nodes".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(NumericsError::Shape("times must be strictly ascending".into()));
    }
    let b = bracket(times, t)?;
    if b.weight == 0.0 {
        return Ok(values[b.lo]);
    }
    Ok(values[b.lo] + (values[b.lo + 1] - values[b.lo]) * b.weight)
}
