use serde::{Deserialize, Serialize};

use super::{DataError, TimeSeries};
use crate::solvers::{fde_solve_pc, rhs_fn, SolverError, TimeGrid};

/// Ground truth is solved on a grid this many times finer than the output grid.
pub const GEN_REFINE: usize = 8;
pub const RO_X0: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    /// Relaxation: D^α x = 1 - x.
    Ro,
    /// Logistic growth: D^α P = r P (1 - P / K).
    Pg,
}

impl System {
    pub fn as_str(&self) -> &'static str {
        match self {
            System::Ro => "ro",
            System::Pg => "pg",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ro" => Some(System::Ro),
            "pg" => Some(System::Pg),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PgParams {
    pub r: f64,
    pub k: f64,
    pub p0: f64,
}

impl Default for PgParams {
    fn default() -> Self {
        Self { r: 0.1, k: 1000.0, p0: 100.0 }
    }
}

fn subsample(grid: &TimeGrid, fine: &crate::solvers::Trajectory) -> Result<TimeSeries, DataError> {
    let times = grid.nodes();
    let values = (0..grid.len()).map(|m| fine.state(m * GEN_REFINE)[0]).collect();
    TimeSeries::scalar(times, values)
}

fn check_alpha(alpha: f64) -> Result<(), DataError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(SolverError::Domain { what: "alpha", value: alpha }.into());
    }
    Ok(())
}

/// Relaxation series on the nodes of `grid`.
pub fn gen_ro(alpha: f64, x0: f64, grid: &TimeGrid) -> Result<TimeSeries, DataError> {
    check_alpha(alpha)?;
    if !x0.is_finite() {
        return Err(DataError::Invalid(format!("x0 = {x0}")));
    }
    let rhs = rhs_fn(1, |_t, x: &[f64]| vec![1.0 - x[0]]);
    let fine = fde_solve_pc(&rhs, alpha, &[x0], &grid.refined(GEN_REFINE))?;
    subsample(grid, &fine)
}

/// Logistic growth series on the nodes of `grid`.
pub fn gen_pg(alpha: f64, params: PgParams, grid: &TimeGrid) -> Result<TimeSeries, DataError> {
    check_alpha(alpha)?;
    let PgParams { r, k, p0 } = params;
    if !(k > 0.0 && k.is_finite()) || !(p0 > 0.0 && p0 <= k) || !r.is_finite() {
        return Err(DataError::Invalid(format!("logistic parameters r={r}, K={k}, p0={p0}")));
    }
    let rhs = rhs_fn(1, move |_t, p: &[f64]| vec![r * p[0] * (1.0 - p[0] / k)]);
    let fine = fde_solve_pc(&rhs, alpha, &[p0], &grid.refined(GEN_REFINE))?;
    subsample(grid, &fine)
}

/// Record written next to each generated dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub system: System,
    pub alpha: f64,
    pub t0: f64,
    pub dt: f64,
    pub points: usize,
    pub refine: usize,
    pub x0: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pg: Option<PgParams>,
    pub seed: u64,
}

impl Manifest {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest fields are plain values")
    }

    pub fn from_toml(text: &str) -> Result<Self, DataError> {
        toml::from_str(text).map_err(|e| DataError::Invalid(format!("manifest: {e}")))
    }
}
