//! Multi-run experiments, aggregation, reports and plots.

mod config;
mod plot;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::data::{
    gen_pg, gen_ro, load_csv, make_split, ColumnRef, DataError, NormStats, PgParams, SplitSpec, System, TimeSeries,
    RO_X0,
};
use crate::neuralfde::{evaluate, train, write_model, LossHistory, SolverChoice, TrainConfig, TrainError, TrainedModel};
use crate::solvers::{SolverError, TimeGrid};

pub use config::{AlphaSetting, ConfigError, ConfigFile};
pub use plot::{emit_loss_plot, loss_plot_svg};
pub use report::{emit_report, report_csv, report_text, sci};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("all {runs} runs failed; first error: {first}")]
    AllRunsFailed { runs: usize, first: String },
}

impl HarnessError {
    /// Process exit status: 1 usage, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 1,
            HarnessError::Data(DataError::Solver(_)) => 3,
            HarnessError::Data(_) | HarnessError::Io { .. } => 2,
            HarnessError::Train(e) if e.is_numerical() => 3,
            HarnessError::Train(TrainError::Config(_)) => 1,
            HarnessError::Train(_) => 2,
            HarnessError::AllRunsFailed { .. } => 3,
        }
    }
}

impl From<SolverError> for HarnessError {
    fn from(e: SolverError) -> Self {
        HarnessError::Data(DataError::Solver(e))
    }
}

/// Map an I/O failure on `path` into a [`HarnessError`].
pub fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    NeuralFde,
    NeuralOde,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::NeuralFde => "nfde",
            ModelKind::NeuralOde => "node",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "nfde" => Some(ModelKind::NeuralFde),
            "node" => Some(ModelKind::NeuralOde),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    Reconstruction,
    Extrapolation,
    Completion,
}

impl SplitKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SplitKind::Reconstruction => "reconstruction",
            SplitKind::Extrapolation => "extrapolation",
            SplitKind::Completion => "completion",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "reconstruction" => Some(SplitKind::Reconstruction),
            "extrapolation" => Some(SplitKind::Extrapolation),
            "completion" => Some(SplitKind::Completion),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    /// `points` observations evenly spaced on [0, horizon].
    Synthetic { system: System, alpha: f64, points: usize, horizon: f64 },
    Csv { path: PathBuf, time_column: ColumnRef, value_column: ColumnRef },
}

impl DatasetSource {
    pub fn label(&self) -> String {
        match self {
            DatasetSource::Synthetic { system, alpha, .. } => format!("{}_alpha{alpha}", system.as_str()),
            DatasetSource::Csv { path, .. } => {
                path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into())
            }
        }
    }
}

/// Generate a synthetic series on `points` nodes with step `dt`.
pub fn synthetic_series(system: System, alpha: f64, dt: f64, points: usize) -> Result<TimeSeries, DataError> {
    if points < 2 {
        return Err(DataError::InsufficientData(format!("{points} points")));
    }
    let grid = TimeGrid::new(0.0, dt, points - 1)?;
    match system {
        System::Ro => gen_ro(alpha, RO_X0, &grid),
        System::Pg => gen_pg(alpha, PgParams::default(), &grid),
    }
}

/// Train and test series for a dataset and split.
///
/// Synthetic extrapolation generates 1.5 times the horizon and trains on the
/// original window; synthetic completion generates twice the density and
/// holds out every other point. CSV data extrapolates from the first two
/// thirds of its time span and completes by omitting the middle of each
/// triple.
pub fn prepare_data(source: &DatasetSource, split: SplitKind) -> Result<(TimeSeries, TimeSeries), DataError> {
    match source {
        DatasetSource::Synthetic { system, alpha, points, horizon } => {
            let (points, horizon) = (*points, *horizon);
            if points < 2 || !(horizon > 0.0) {
                return Err(DataError::InsufficientData(format!("{points} points over horizon {horizon}")));
            }
            let dt = horizon / (points - 1) as f64;
            match split {
                SplitKind::Reconstruction => {
                    let s = synthetic_series(*system, *alpha, dt, points)?;
                    make_split(&s, SplitSpec::Reconstruction)
                }
                SplitKind::Extrapolation => {
                    let extended = (points - 1) * 3 / 2 + 1;
                    let s = synthetic_series(*system, *alpha, dt, extended)?;
                    make_split(&s, SplitSpec::Extrapolation { train_horizon: horizon })
                }
                SplitKind::Completion => {
                    let s = synthetic_series(*system, *alpha, dt / 2.0, 2 * points - 1)?;
                    make_split(&s, SplitSpec::Completion { stride: 2 })
                }
            }
        }
        DatasetSource::Csv { path, time_column, value_column } => {
            let (s, _) = load_csv(path, time_column, value_column)?;
            let spec = match split {
                SplitKind::Reconstruction => SplitSpec::Reconstruction,
                SplitKind::Extrapolation => {
                    SplitSpec::Extrapolation { train_horizon: (s.last_time() - s.t0()) * 2.0 / 3.0 }
                }
                SplitKind::Completion => SplitSpec::Completion { stride: 3 },
            };
            make_split(&s, spec)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub source: DatasetSource,
    pub split: SplitKind,
    pub model: ModelKind,
    pub train: TrainConfig,
    /// Min-max scale with statistics of the training portion.
    pub normalize: bool,
    /// Upper bound on runs executing in parallel.
    pub jobs: usize,
}

impl ExperimentSpec {
    pub fn train_config(&self) -> TrainConfig {
        let mut cfg = self.train.clone();
        cfg.solver = match self.model {
            ModelKind::NeuralFde => SolverChoice::PcFractional,
            ModelKind::NeuralOde => SolverChoice::EulerOde,
        };
        cfg
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub final_train_loss: f64,
    pub test_mse: f64,
    pub alpha: Option<f64>,
    pub wall_s: f64,
    pub history: LossHistory,
    pub model: TrainedModel,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    /// Zero-based run index.
    pub run: usize,
    pub seed: u64,
    pub outcome: Result<RunSummary, String>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub dataset: String,
    pub model: ModelKind,
    pub split: SplitKind,
    pub runs: Vec<RunRecord>,
    pub mse_avg: f64,
    pub mse_std: f64,
}

impl RunResult {
    pub fn successes(&self) -> impl Iterator<Item = &RunSummary> {
        self.runs.iter().filter_map(|r| r.outcome.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = (usize, &str)> {
        self.runs.iter().filter_map(|r| r.outcome.as_ref().err().map(|e| (r.run, e.as_str())))
    }
}

/// Arithmetic mean and population standard deviation.
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Scaled train and test sets plus the statistics used, if any.
pub fn scaled_data(
    spec: &ExperimentSpec,
) -> Result<(TimeSeries, TimeSeries, Option<NormStats>), DataError> {
    let (train_set, test_set) = prepare_data(&spec.source, spec.split)?;
    if !spec.normalize {
        return Ok((train_set, test_set, None));
    }
    let stats = NormStats::fit(&train_set)?;
    Ok((stats.apply(&train_set)?, stats.apply(&test_set)?, Some(stats)))
}

fn one_run(
    train_set: &TimeSeries,
    test_set: &TimeSeries,
    norm: &Option<NormStats>,
    cfg: &TrainConfig,
) -> Result<RunSummary, TrainError> {
    let start = Instant::now();
    let (mut model, history) = train(train_set, cfg)?;
    model.norm = norm.clone();
    let test_mse = evaluate(&model, test_set, model.solver_dt)?;
    Ok(RunSummary {
        final_train_loss: history.final_loss,
        test_mse,
        alpha: model.alpha(),
        wall_s: start.elapsed().as_secs_f64(),
        history,
        model,
    })
}

/// Train `spec.train.runs` models with seeds `seed, seed + 1, ...` and
/// aggregate their test errors. Failed runs are kept in the record and left
/// out of the aggregate.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunResult, HarnessError> {
    spec.train.validate()?;
    if spec.jobs == 0 {
        return Err(HarnessError::Usage("jobs must be at least 1".into()));
    }
    let (train_set, test_set, norm) = scaled_data(spec)?;
    let base = spec.train_config();
    let run_one = |r: usize| {
        let seed = base.seed.wrapping_add(r as u64);
        let cfg = TrainConfig { seed, ..base.clone() };
        let outcome = one_run(&train_set, &test_set, &norm, &cfg).map_err(|e| e.to_string());
        RunRecord { run: r, seed, outcome }
    };
    let mut runs: Vec<RunRecord> = if spec.jobs == 1 {
        (0..base.runs).map(run_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.jobs)
            .build()
            .map_err(|e| HarnessError::Usage(e.to_string()))?;
        pool.install(|| (0..base.runs).into_par_iter().map(run_one).collect())
    };
    runs.sort_by_key(|r| r.run);

    let mses: Vec<f64> = runs.iter().filter_map(|r| r.outcome.as_ref().ok().map(|s| s.test_mse)).collect();
    if mses.is_empty() {
        let first = runs.iter().find_map(|r| r.outcome.as_ref().err().cloned()).unwrap_or_default();
        return Err(HarnessError::AllRunsFailed { runs: runs.len(), first });
    }
    let (mse_avg, mse_std) = mean_and_std(&mses);
    Ok(RunResult { dataset: spec.source.label(), model: spec.model, split: spec.split, runs, mse_avg, mse_std })
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    fs::write(path, bytes).map_err(io_error(path))
}

/// Write per-run loss histories and models, the report pair, a loss plot and
/// a timing table into `dir`.
///
/// Everything except `timings.csv` depends only on the experiment settings and seed.
pub fn write_experiment(result: &RunResult, dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let mut timings = String::from("run,seed,seconds\n");
    let mut curves = Vec::new();
    for record in &result.runs {
        let n = record.run + 1;
        let Ok(s) = &record.outcome else { continue };
        let mut buf = Vec::new();
        s.history.write_csv(&mut buf, false).expect("writing to memory");
        write_file(&dir.join(format!("loss_run{n}.csv")), &buf)?;
        write_file(&dir.join(format!("model_run{n}.txt")), write_model(&s.model).as_bytes())?;
        timings.push_str(&format!("{n},{},{:e}\n", record.seed, s.wall_s));
        let label = match s.alpha {
            Some(a) => format!("{} run {n} (alpha {a:.4})", result.model.as_str()),
            None => format!("{} run {n}", result.model.as_str()),
        };
        curves.push((label, s.history.clone()));
    }
    write_file(&dir.join("timings.csv"), timings.as_bytes())?;
    emit_report(std::slice::from_ref(result), dir)?;
    if !curves.is_empty() {
        emit_loss_plot(&curves, &dir.join("loss.svg"))?;
    }
    Ok(())
}
