use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use super::{DatasetSource, ExperimentSpec, HarnessError, ModelKind, SplitKind};
use crate::data::{ColumnRef, System};
use crate::neuralfde::{AlphaMode, SolverChoice, TrainConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config file: {0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
}

impl From<ConfigError> for HarnessError {
    fn from(e: ConfigError) -> Self {
        HarnessError::Usage(e.to_string())
    }
}

/// Either a number or a keyword such as `learn`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum AlphaSetting {
    Value(f64),
    Word(String),
}

impl AlphaSetting {
    pub fn parse(s: &str) -> Self {
        s.parse().map(AlphaSetting::Value).unwrap_or_else(|_| AlphaSetting::Word(s.to_string()))
    }
}

/// Settings read from a TOML file or the command line. Keys follow the
/// field names of the training and experiment configuration; every key is
/// optional and later layers override earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub max_iters: Option<usize>,
    pub lr: Option<f64>,
    pub seed: Option<u64>,
    pub solver: Option<String>,
    pub solver_dt: Option<f64>,
    /// `scalar_logit`, `tiny_net` or `fixed`.
    pub alpha_mode: Option<String>,
    /// Fixed order, or `learn`.
    pub alpha: Option<AlphaSetting>,
    pub alpha_init: Option<f64>,
    pub runs: Option<usize>,
    pub hidden: Option<Vec<usize>>,
    pub time_input: Option<bool>,

    pub system: Option<String>,
    /// Order used to generate synthetic data.
    pub data_alpha: Option<f64>,
    pub points: Option<usize>,
    pub horizon: Option<f64>,
    pub dataset: Option<PathBuf>,
    pub time_column: Option<String>,
    pub value_column: Option<String>,
    pub split: Option<String>,
    pub model: Option<String>,
    pub normalize: Option<bool>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f; } )*
    };
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(super::io_error(path))?;
        Ok(Self::from_toml(&text)?)
    }

    /// `self` with every field set in `top` replaced.
    pub fn overlay(mut self, top: ConfigFile) -> Self {
        overlay_fields!(self, top;
            max_iters, lr, seed, solver, solver_dt, alpha_mode, alpha, alpha_init, runs, hidden, time_input,
            system, data_alpha, points, horizon, dataset, time_column, value_column, split, model, normalize,
            jobs, out);
        self
    }

    fn alpha_mode(&self) -> Result<AlphaMode, ConfigError> {
        let learned = match self.alpha_mode.as_deref() {
            None | Some("scalar_logit") => AlphaMode::ScalarLogit,
            Some("tiny_net") => AlphaMode::TinyNet,
            Some("fixed") => match self.alpha {
                Some(AlphaSetting::Value(a)) => return Ok(AlphaMode::Fixed(a)),
                _ => return Err(ConfigError::Invalid("alpha_mode = \"fixed\" needs a numeric alpha".into())),
            },
            Some(other) => return Err(ConfigError::Invalid(format!("unknown alpha_mode `{other}`"))),
        };
        match &self.alpha {
            None => Ok(learned),
            Some(AlphaSetting::Value(a)) => Ok(AlphaMode::Fixed(*a)),
            Some(AlphaSetting::Word(w)) if w == "learn" => Ok(learned),
            Some(AlphaSetting::Word(w)) => Err(ConfigError::Invalid(format!("alpha must be a number or `learn`, got `{w}`"))),
        }
    }

    pub fn model_kind(&self) -> Result<ModelKind, ConfigError> {
        match self.model.as_deref() {
            None => Ok(ModelKind::NeuralFde),
            Some(m) => ModelKind::parse(m).ok_or_else(|| ConfigError::Invalid(format!("unknown model `{m}`"))),
        }
    }

    pub fn train_config(&self) -> Result<TrainConfig, ConfigError> {
        let d = TrainConfig::default();
        let solver = match (self.solver.as_deref(), self.model_kind()?) {
            (Some(s), _) => SolverChoice::parse(s).ok_or_else(|| ConfigError::Invalid(format!("unknown solver `{s}`")))?,
            (None, ModelKind::NeuralOde) => SolverChoice::EulerOde,
            (None, ModelKind::NeuralFde) => SolverChoice::PcFractional,
        };
        let cfg = TrainConfig {
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            lr: self.lr.unwrap_or(d.lr),
            seed: self.seed.unwrap_or(d.seed),
            solver,
            solver_dt: self.solver_dt,
            alpha_mode: self.alpha_mode()?,
            alpha_init: self.alpha_init.unwrap_or(d.alpha_init),
            runs: self.runs.unwrap_or(d.runs),
            hidden: self.hidden.clone().unwrap_or(d.hidden),
            time_input: self.time_input.unwrap_or(d.time_input),
        };
        cfg.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(cfg)
    }

    pub fn source(&self) -> Result<DatasetSource, ConfigError> {
        if let Some(path) = &self.dataset {
            return Ok(DatasetSource::Csv {
                path: path.clone(),
                time_column: ColumnRef::parse(self.time_column.as_deref().unwrap_or("0")),
                value_column: ColumnRef::parse(self.value_column.as_deref().unwrap_or("1")),
            });
        }
        let name = self
            .system
            .as_deref()
            .ok_or_else(|| ConfigError::Invalid("either a dataset file or a system is required".into()))?;
        let system = System::parse(name).ok_or_else(|| ConfigError::Invalid(format!("unknown system `{name}`")))?;
        let alpha = self.data_alpha.unwrap_or(0.99);
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(ConfigError::Invalid(format!("data_alpha = {alpha} outside (0, 1]")));
        }
        let points = self.points.unwrap_or(200);
        let horizon = self.horizon.unwrap_or(200.0);
        if points < 2 || !(horizon > 0.0) {
            return Err(ConfigError::Invalid(format!("{points} points over horizon {horizon}")));
        }
        Ok(DatasetSource::Synthetic { system, alpha, points, horizon })
    }

    pub fn split_kind(&self) -> Result<SplitKind, ConfigError> {
        match self.split.as_deref() {
            None => Ok(SplitKind::Reconstruction),
            Some(s) => SplitKind::parse(s).ok_or_else(|| ConfigError::Invalid(format!("unknown split `{s}`"))),
        }
    }

    pub fn experiment_spec(&self) -> Result<ExperimentSpec, ConfigError> {
        let jobs = self.jobs.unwrap_or(1);
        if jobs == 0 {
            return Err(ConfigError::Invalid("jobs must be at least 1".into()));
        }
        Ok(ExperimentSpec {
            source: self.source()?,
            split: self.split_kind()?,
            model: self.model_kind()?,
            train: self.train_config()?,
            normalize: self.normalize.unwrap_or(true),
            jobs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let spec = ConfigFile { system: Some("ro".into()), ..ConfigFile::default() }.experiment_spec().unwrap();
        assert_eq!(spec.train, TrainConfig::default());
        assert_eq!(spec.split, SplitKind::Reconstruction);
        assert_eq!(spec.model, ModelKind::NeuralFde);
        assert_eq!(
            spec.source,
            DatasetSource::Synthetic { system: System::Ro, alpha: 0.99, points: 200, horizon: 200.0 }
        );
    }

    #[test]
    fn file_values_and_overrides() {
        let file = ConfigFile::from_toml(
            "max_iters = 50\nlr = 0.01\nalpha = 0.8\nsystem = \"pg\"\nsplit = \"completion\"\nhidden = [16]\n",
        )
        .unwrap();
        let flags = ConfigFile { max_iters: Some(7), alpha: Some(AlphaSetting::parse("learn")), ..ConfigFile::default() };
        let spec = file.clone().overlay(flags).experiment_spec().unwrap();
        assert_eq!(spec.train.max_iters, 7);
        assert_eq!(spec.train.lr, 0.01);
        assert_eq!(spec.train.alpha_mode, AlphaMode::ScalarLogit);
        assert_eq!(spec.train.hidden, vec![16]);
        assert_eq!(spec.split, SplitKind::Completion);
        assert_eq!(file.train_config().unwrap().alpha_mode, AlphaMode::Fixed(0.8));
    }

    #[test]
    fn node_model_uses_euler() {
        let c = ConfigFile { model: Some("node".into()), ..ConfigFile::default() };
        assert_eq!(c.train_config().unwrap().solver, SolverChoice::EulerOde);
    }

    #[test]
    fn csv_source() {
        let c = ConfigFile { dataset: Some("djia.csv".into()), value_column: Some("Open".into()), ..ConfigFile::default() };
        match c.source().unwrap() {
            DatasetSource::Csv { time_column, value_column, .. } => {
                assert_eq!(time_column, ColumnRef::Index(0));
                assert_eq!(value_column, ColumnRef::Name("Open".into()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ConfigFile::from_toml("unknown_key = 1").is_err());
        assert!(ConfigFile::from_toml("lr = \"fast\"").is_err());
        let bad = |c: ConfigFile| c.experiment_spec().is_err();
        let base = ConfigFile { system: Some("ro".into()), ..ConfigFile::default() };
        assert!(bad(ConfigFile::default()));
        assert!(bad(ConfigFile { system: Some("xyz".into()), ..base.clone() }));
        assert!(bad(ConfigFile { alpha: Some(AlphaSetting::parse("maybe")), ..base.clone() }));
        assert!(bad(ConfigFile { alpha_mode: Some("fixed".into()), ..base.clone() }));
        assert!(bad(ConfigFile { lr: Some(-1.0), ..base.clone() }));
        assert!(bad(ConfigFile { split: Some("random".into()), ..base.clone() }));
        assert!(bad(ConfigFile { jobs: Some(0), ..base.clone() }));
        assert!(bad(ConfigFile { data_alpha: Some(0.0), ..base }));
    }
}
