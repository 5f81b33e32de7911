//! Training and prediction for neural fractional (and integer-order) ODEs.
//!
//! Every iteration records one forward solve on a fresh tape, reads the
//! solution at the observation times, and takes one Adam step on the
//! concatenated network and order parameters.

mod history;
mod model_io;

use std::time::Instant;

use thiserror::Error;

use crate::autodiff::{AutodiffError, Scalar, Tape};
use crate::data::{NormStats, TimeSeries};
use crate::nn::{io::FormatError, mse_loss, AdamState, AlphaParam, Mlp, MlpConfig, NnError, OutputActivation};
use crate::solvers::{
    fde_solve_pc, ode_solve_euler, read_at_observations, RhsFn, SolverError, TimeGrid, Trajectory,
};

pub use history::LossHistory;
pub use model_io::{read_model, write_model};

/// Loss above which a run is declared diverged.
pub const DIVERGENCE_LOSS: f64 = 1e6;
/// Consecutive non-finite losses tolerated before aborting.
pub const MAX_NON_FINITE: usize = 3;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error("iteration {iter}: {source}")]
    Solver { iter: usize, source: SolverError },
    #[error(transparent)]
    Prediction(#[from] SolverError),
    #[error("iteration {iter}: loss {loss:e} exceeds the divergence threshold")]
    Diverged { iter: usize, loss: f64 },
    #[error("iteration {iter}: loss non-finite for {MAX_NON_FINITE} consecutive iterations")]
    NonFiniteLoss { iter: usize },
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error("model file: {0}")]
    Format(#[from] FormatError),
}

impl TrainError {
    /// Failures of the numerics, as opposed to bad inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            TrainError::Solver { .. }
                | TrainError::Prediction(_)
                | TrainError::Diverged { .. }
                | TrainError::NonFiniteLoss { .. }
                | TrainError::Autodiff(_)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    PcFractional,
    EulerOde,
}

impl SolverChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverChoice::PcFractional => "pc_fractional",
            SolverChoice::EulerOde => "euler_ode",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pc_fractional" => Some(SolverChoice::PcFractional),
            "euler_ode" => Some(SolverChoice::EulerOde),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaMode {
    ScalarLogit,
    TinyNet,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub max_iters: usize,
    pub lr: f64,
    pub seed: u64,
    pub solver: SolverChoice,
    /// Solver step; `None` uses the smallest observation spacing.
    pub solver_dt: Option<f64>,
    pub alpha_mode: AlphaMode,
    pub alpha_init: f64,
    pub runs: usize,
    /// Hidden layer widths of f_θ.
    pub hidden: Vec<usize>,
    /// Feed t to f_θ alongside the state.
    pub time_input: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_iters: 200,
            lr: 1e-3,
            seed: 0,
            solver: SolverChoice::PcFractional,
            solver_dt: None,
            alpha_mode: AlphaMode::ScalarLogit,
            alpha_init: 0.99,
            runs: 3,
            hidden: vec![64, 64],
            time_input: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: String| Err(TrainError::Config(m));
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("lr = {}", self.lr));
        }
        if !(self.alpha_init > 0.0 && self.alpha_init < 1.0) {
            return bad(format!("alpha_init = {} outside (0, 1)", self.alpha_init));
        }
        if let AlphaMode::Fixed(a) = self.alpha_mode {
            if !(a > 0.0 && a <= 1.0) {
                return bad(format!("fixed alpha = {a} outside (0, 1]"));
            }
        }
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if let Some(dt) = self.solver_dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("solver_dt = {dt}"));
            }
        }
        if self.hidden.iter().any(|&w| w == 0) {
            return bad("hidden widths must be positive".into());
        }
        Ok(())
    }
}

/// How the derivative order is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum Order {
    Learned(AlphaParam),
    Fixed(f64),
    /// Integer-order model solved by explicit Euler.
    Ode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub f_net: Mlp,
    pub order: Order,
    pub t0: f64,
    pub x0: Vec<f64>,
    pub solver_dt: f64,
    pub time_input: bool,
    /// Scaling applied to the training data, if any.
    pub norm: Option<NormStats>,
}

impl TrainedModel {
    pub fn solver(&self) -> SolverChoice {
        match self.order {
            Order::Ode => SolverChoice::EulerOde,
            _ => SolverChoice::PcFractional,
        }
    }

    /// Realized derivative order, `None` for the integer-order model.
    pub fn alpha(&self) -> Option<f64> {
        match &self.order {
            Order::Learned(a) => Some(a.value()),
            Order::Fixed(a) => Some(*a),
            Order::Ode => None,
        }
    }

    fn flat_params(&self) -> Vec<f64> {
        let mut p = self.f_net.flat_params();
        if let Order::Learned(a) = &self.order {
            p.extend(a.flat_params());
        }
        p
    }

    fn set_flat_params(&mut self, params: &[f64]) -> Result<(), NnError> {
        let n = self.f_net.param_count();
        self.f_net.set_flat_params(&params[..n])?;
        if let Order::Learned(a) = &mut self.order {
            a.set_flat_params(&params[n..])?;
        }
        Ok(())
    }
}

/// f_θ evaluated with an explicit parameter vector.
struct MlpRhs<'a, S> {
    net: &'a Mlp,
    params: &'a [S],
    time_input: bool,
}

impl<S: Scalar> RhsFn<S> for MlpRhs<'_, S> {
    fn dim(&self) -> usize {
        self.net.output_dim()
    }

    fn eval(&self, t: f64, h: &[S]) -> Result<Vec<S>, SolverError> {
        let out = if self.time_input {
            let mut input = h.to_vec();
            input.push(h[0].lift(t));
            self.net.forward_with(self.params, &input)
        } else {
            self.net.forward_with(self.params, h)
        };
        out.map_err(|e| SolverError::Rhs(e.to_string()))
    }
}

/// Forward solve of `model` with the parameter vector `params` (θ then the
/// order parameters) from `model.t0` over `grid`.
fn solve_with<S: Scalar>(
    model: &TrainedModel,
    params: &[S],
    x0: &[S],
    grid: &TimeGrid,
) -> Result<(Trajectory<S>, Option<S>), SolverError> {
    let n_theta = model.f_net.param_count();
    let rhs = MlpRhs { net: &model.f_net, params: &params[..n_theta], time_input: model.time_input };
    let alpha = match &model.order {
        Order::Ode => return Ok((ode_solve_euler(&rhs, x0, grid)?, None)),
        Order::Fixed(a) => x0[0].lift(*a),
        Order::Learned(a) => a.value_with(&params[n_theta..]).map_err(|e| SolverError::Rhs(e.to_string()))?,
    };
    Ok((fde_solve_pc(&rhs, alpha, x0, grid)?, Some(alpha)))
}

/// Times after t0 and their flattened targets; the state at t0 is pinned to x0.
fn loss_targets(series: &TimeSeries, t0: f64) -> (Vec<f64>, Vec<f64>) {
    let mut times = Vec::new();
    let mut targets = Vec::new();
    for (i, &t) in series.times().iter().enumerate() {
        if t > t0 {
            times.push(t);
            targets.extend_from_slice(series.value(i));
        }
    }
    (times, targets)
}

fn grid_for(t0: f64, tf: f64, dt: f64) -> Result<TimeGrid, SolverError> {
    TimeGrid::covering(t0, tf, dt)
}

fn mse_at<S: Scalar>(traj: &Trajectory<S>, times: &[f64], targets: &[f64]) -> Result<S, TrainError> {
    let pred: Vec<S> = read_at_observations(traj, times)?.into_iter().flatten().collect();
    Ok(mse_loss(&pred, targets)?)
}

/// Fresh, untrained model for `dataset` under `config`.
pub fn init_model(dataset: &TimeSeries, config: &TrainConfig) -> Result<TrainedModel, TrainError> {
    config.validate()?;
    if dataset.len() < 2 {
        return Err(TrainError::Data(format!("{} observations; need at least 2", dataset.len())));
    }
    let d = dataset.dim();
    let mut sizes = vec![d + usize::from(config.time_input)];
    sizes.extend(&config.hidden);
    sizes.push(d);
    let f_net = Mlp::init(MlpConfig::new(sizes, OutputActivation::Identity, config.seed))?;
    let order = match (config.solver, config.alpha_mode) {
        (SolverChoice::EulerOde, _) => Order::Ode,
        (SolverChoice::PcFractional, AlphaMode::Fixed(a)) => Order::Fixed(a),
        (SolverChoice::PcFractional, AlphaMode::ScalarLogit) => Order::Learned(AlphaParam::scalar(config.alpha_init)),
        (SolverChoice::PcFractional, AlphaMode::TinyNet) => Order::Learned(AlphaParam::tiny_net(
            config.alpha_init,
            config.seed.wrapping_add(0x9E37_79B9_7F4A_7C15),
        )?),
    };
    let solver_dt = match config.solver_dt {
        Some(dt) => dt,
        None => dataset.min_spacing().expect("at least two observations"),
    };
    Ok(TrainedModel {
        f_net,
        order,
        t0: dataset.t0(),
        x0: dataset.value(0).to_vec(),
        solver_dt,
        time_input: config.time_input,
        norm: None,
    })
}

/// Full-batch training on `dataset`; the first observation is the initial condition.
pub fn train(dataset: &TimeSeries, config: &TrainConfig) -> Result<(TrainedModel, LossHistory), TrainError> {
    let mut model = init_model(dataset, config)?;
    let (times, targets) = loss_targets(dataset, model.t0);
    let grid = grid_for(model.t0, dataset.last_time(), model.solver_dt).map_err(|e| TrainError::Config(e.to_string()))?;
    let mut params = model.flat_params();
    let mut adam = AdamState::new(params.len(), config.lr);
    let mut history = LossHistory::default();
    let mut non_finite = 0;

    for iter in 0..config.max_iters {
        let start = Instant::now();
        let tape = Tape::with_capacity(1 << 16);
        let vars: Vec<_> = params.iter().map(|&p| tape.param(p)).collect();
        let x0: Vec<_> = model.x0.iter().map(|&v| tape.constant(v)).collect();
        let (traj, alpha) = solve_with(&model, &vars, &x0, &grid).map_err(|source| TrainError::Solver { iter, source })?;
        let loss = mse_at(&traj, &times, &targets).map_err(|e| match e {
            TrainError::Prediction(source) => TrainError::Solver { iter, source },
            other => other,
        })?;
        let loss_value = loss.value();
        let alpha_value = alpha.map(|a| a.value());
        if !loss_value.is_finite() {
            non_finite += 1;
            history.push(loss_value, alpha_value, start.elapsed().as_secs_f64());
            if non_finite >= MAX_NON_FINITE {
                return Err(TrainError::NonFiniteLoss { iter });
            }
            continue;
        }
        non_finite = 0;
        if loss_value > DIVERGENCE_LOSS {
            return Err(TrainError::Diverged { iter, loss: loss_value });
        }
        let grads = tape.backward(loss.id())?.params();
        drop(traj);
        adam.step(&mut params, &grads)?;
        model.set_flat_params(&params)?;
        if let (Order::Learned(a), Some(realized)) = (&mut model.order, alpha_value) {
            a.advance(realized);
        }
        history.push(loss_value, alpha_value, start.elapsed().as_secs_f64());
    }
    history.final_loss = training_loss(&model, dataset)?;
    Ok((model, history))
}

/// Loss of `model` on `series` exactly as computed during training.
pub fn training_loss(model: &TrainedModel, series: &TimeSeries) -> Result<f64, TrainError> {
    let (times, targets) = loss_targets(series, model.t0);
    if times.is_empty() {
        return Ok(0.0);
    }
    let last = times[times.len() - 1];
    let grid = grid_for(model.t0, last, model.solver_dt)?;
    let (traj, _) = solve_with(model, &model.flat_params(), &model.x0, &grid)?;
    mse_at(&traj, &times, &targets)
}

/// Solve the trained model from `x0` at `t0` up to (at least) `tf`.
pub fn predict(model: &TrainedModel, t0: f64, tf: f64, dt: f64) -> Result<Trajectory, TrainError> {
    if !(tf > t0) {
        return Err(TrainError::Config(format!("tf = {tf} must exceed t0 = {t0}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(TrainError::Config(format!("dt = {dt}")));
    }
    let grid = grid_for(t0, tf, dt)?;
    Ok(solve_with(model, &model.flat_params(), &model.x0, &grid)?.0)
}

/// MSE over the observations of `test` after the model's t0, solving with step `dt`.
pub fn evaluate(model: &TrainedModel, test: &TimeSeries, dt: f64) -> Result<f64, TrainError> {
    if test.t0() < model.t0 {
        return Err(TrainError::Data(format!("test starts at {} before t0 = {}", test.t0(), model.t0)));
    }
    if test.dim() != model.x0.len() {
        return Err(TrainError::Data(format!("test dimension {} vs model {}", test.dim(), model.x0.len())));
    }
    let (times, targets) = loss_targets(test, model.t0);
    if times.is_empty() {
        return Ok(0.0);
    }
    let traj = predict(model, model.t0, times[times.len() - 1], dt)?;
    mse_at(&traj, &times, &targets)
}
