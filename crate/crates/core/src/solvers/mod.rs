//! Fixed-step integrators on uniform grids: the fractional Adams
//! predictor-corrector scheme for Caputo derivatives of order α ∈ (0, 1],
//! and explicit Euler / classical Runge-Kutta for the integer-order case.
//!
//! All solvers are generic over [`Scalar`], so a solve on a tape records
//! every arithmetic step and produces the same trajectory, bit for bit, as
//! the untaped solve.

mod bench;
mod euler;
mod observe;
mod pc;
mod weights;

use std::io::Write;

use thiserror::Error;

use crate::autodiff::Scalar;

pub use bench::{benchmark_solvers, BenchRow, SolverKind};
pub use euler::{ode_solve_euler, ode_solve_rk4};
pub use observe::read_at_observations;
pub use pc::{fde_solve_pc, fde_solve_pc_with, PcOptions};
pub use weights::{corrector_weights, predictor_weights};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("{what} = {value} outside its domain")]
    Domain { what: &'static str, value: f64 },
    #[error("right-hand side has dimension {expected}, got a vector of length {got}")]
    Dimension { expected: usize, got: usize },
    #[error("non-finite state at step {step}")]
    NonFinite { step: usize },
    #[error("t = {t} outside the solved range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("right-hand side failed: {0}")]
    Rhs(String),
}

/// Uniform grid `t_m = t0 + m * dt`, `m = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, n_steps: usize) -> Result<Self, SolverError> {
        if !t0.is_finite() {
            return Err(SolverError::Domain { what: "t0", value: t0 });
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(SolverError::Domain { what: "dt", value: dt });
        }
        Ok(Self { t0, dt, n_steps })
    }

    /// Smallest grid with step `dt` starting at `t0` whose last node reaches `tf`.
    pub fn covering(t0: f64, tf: f64, dt: f64) -> Result<Self, SolverError> {
        if !tf.is_finite() || tf < t0 {
            return Err(SolverError::Domain { what: "tf", value: tf });
        }
        let grid = Self::new(t0, dt, 0)?;
        let span = (tf - t0) / dt;
        let n = (span - 1e-9).ceil().max(0.0);
        if n > u32::MAX as f64 {
            return Err(SolverError::Domain { what: "number of steps", value: n });
        }
        Ok(Self { n_steps: n as usize, ..grid })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, m: usize) -> f64 {
        self.t0 + m as f64 * self.dt
    }

    pub fn last(&self) -> f64 {
        self.node(self.n_steps)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|m| self.node(m)).collect()
    }

    /// Same span with `factor` times as many steps.
    pub fn refined(&self, factor: usize) -> Self {
        Self { t0: self.t0, dt: self.dt / factor as f64, n_steps: self.n_steps * factor }
    }
}

/// Right-hand side `f(t, h)` of dimension `dim()`.
pub trait RhsFn<S: Scalar> {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, h: &[S]) -> Result<Vec<S>, SolverError>;
}

/// Adapter turning a closure into an [`RhsFn`].
pub struct FnRhs<F> {
    dim: usize,
    f: F,
}

pub fn rhs_fn<S: Scalar, F: Fn(f64, &[S]) -> Vec<S>>(dim: usize, f: F) -> FnRhs<F> {
    FnRhs { dim, f }
}

impl<S: Scalar, F: Fn(f64, &[S]) -> Vec<S>> RhsFn<S> for FnRhs<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: f64, h: &[S]) -> Result<Vec<S>, SolverError> {
        Ok((self.f)(t, h))
    }
}

/// States and stored right-hand-side history on a grid, flat row-major
/// (`dim` values per node).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S = f64> {
    grid: TimeGrid,
    dim: usize,
    states: Vec<S>,
    rhs_history: Vec<S>,
}

impl<S: Scalar> Trajectory<S> {
    pub(crate) fn from_parts(grid: TimeGrid, dim: usize, states: Vec<S>, rhs_history: Vec<S>) -> Self {
        debug_assert_eq!(states.len(), grid.len() * dim);
        debug_assert_eq!(rhs_history.len(), grid.len() * dim);
        Self { grid, dim, states, rhs_history }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn state(&self, m: usize) -> &[S] {
        &self.states[m * self.dim..(m + 1) * self.dim]
    }

    pub fn rhs(&self, m: usize) -> &[S] {
        &self.rhs_history[m * self.dim..(m + 1) * self.dim]
    }

    pub fn final_state(&self) -> &[S] {
        self.state(self.grid.n_steps)
    }

    /// Plain values, dropping any tape association.
    pub fn to_values(&self) -> Trajectory<f64> {
        Trajectory {
            grid: self.grid,
            dim: self.dim,
            states: self.states.iter().map(Scalar::value).collect(),
            rhs_history: self.rhs_history.iter().map(Scalar::value).collect(),
        }
    }
}

impl Trajectory<f64> {
    /// Same grid with every state component `d` mapped through `f(d, value)`.
    pub fn map_states(&self, f: impl Fn(usize, f64) -> f64) -> Self {
        let states = self.states.iter().enumerate().map(|(k, &v)| f(k % self.dim, v)).collect();
        Self { states, ..self.clone() }
    }

    /// Time series of component `i`.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().skip(i).step_by(self.dim).copied().collect()
    }

    /// CSV with header `t,y0,..,y{d-1}` and 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = (0..self.dim).map(|i| format!("y{i}")).collect();
        writeln!(w, "t,{}", header.join(","))?;
        for m in 0..self.grid.len() {
            write!(w, "{:.16e}", self.grid.node(m))?;
            for v in self.state(m) {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

pub(crate) fn check_dim<S>(v: &[S], expected: usize) -> Result<(), SolverError> {
    if v.len() != expected {
        return Err(SolverError::Dimension { expected, got: v.len() });
    }
    Ok(())
}
