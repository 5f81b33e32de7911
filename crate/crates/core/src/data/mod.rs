//! Time series: synthetic generation, CSV ingestion, normalization and
//! train/test splits.

mod csv_in;
mod generate;
mod norm;
mod split;

use std::io::Write;
use std::path::PathBuf;

use thiserror::Error;

use crate::solvers::SolverError;

pub use csv_in::{load_csv, parse_csv, read_dataset_csv, ColumnRef, LoadReport};
pub use generate::{gen_pg, gen_ro, Manifest, PgParams, System, GEN_REFINE, RO_X0};
pub use norm::{normalize, NormStats};
pub use split::{make_split, SplitSpec};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("column `{0}` not found")]
    MissingColumn(String),
    #[error("no usable rows")]
    Empty,
    #[error("invalid series: {0}")]
    Invalid(String),
    #[error("component {dim} is constant; cannot normalize")]
    ConstantSeries { dim: usize },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Observations `values[i]` (each of length `dim`) at strictly ascending `times[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    dim: usize,
}

impl TimeSeries {
    /// Build from a flat row-major value buffer.
    pub fn from_flat(times: Vec<f64>, values: Vec<f64>, dim: usize) -> Result<Self, DataError> {
        if times.is_empty() {
            return Err(DataError::Empty);
        }
        if dim == 0 || values.len() != times.len() * dim {
            return Err(DataError::Invalid(format!(
                "{} values for {} times of dimension {dim}",
                values.len(),
                times.len()
            )));
        }
        if let Some(t) = times.iter().chain(&values).find(|v| !v.is_finite()) {
            return Err(DataError::Invalid(format!("non-finite entry {t}")));
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(DataError::Invalid(format!("times not strictly ascending at index {}", i + 1)));
        }
        Ok(Self { times, values, dim })
    }

    pub fn scalar(times: Vec<f64>, values: Vec<f64>) -> Result<Self, DataError> {
        Self::from_flat(times, values, 1)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn flat_values(&self) -> &[f64] {
        &self.values
    }

    pub fn component(&self, d: usize) -> Vec<f64> {
        self.values.iter().skip(d).step_by(self.dim).copied().collect()
    }

    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    pub fn last_time(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Smallest gap between consecutive times, or `None` for a single point.
    pub fn min_spacing(&self) -> Option<f64> {
        self.times.windows(2).map(|w| w[1] - w[0]).reduce(f64::min)
    }

    /// Sub-series made of the given ascending indices.
    pub(crate) fn select(&self, idx: &[usize]) -> Self {
        let times = idx.iter().map(|&i| self.times[i]).collect();
        let values = idx.iter().flat_map(|&i| self.value(i).iter().copied()).collect();
        Self { times, values, dim: self.dim }
    }

    pub(crate) fn map_values(&self, f: impl Fn(usize, f64) -> f64) -> Self {
        let values = self.values.iter().enumerate().map(|(k, &v)| f(k % self.dim, v)).collect();
        Self { times: self.times.clone(), values, dim: self.dim }
    }

    /// Dataset CSV: header `t,x` (or `t,x0,x1,..` for several components),
    /// reals with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        if self.dim == 1 {
            writeln!(w, "t,x")?;
        } else {
            let cols: Vec<String> = (0..self.dim).map(|d| format!("x{d}")).collect();
            writeln!(w, "t,{}", cols.join(","))?;
        }
        for (i, t) in self.times.iter().enumerate() {
            write!(w, "{t:.16e}")?;
            for v in self.value(i) {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
