use super::{DataError, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitSpec {
    /// Train and test on the same points.
    Reconstruction,
    /// Train on times up to `t0 + train_horizon`, test on the whole series.
    Extrapolation { train_horizon: f64 },
    /// Within each consecutive group of `stride` points the middle one is held
    /// out for testing; an incomplete trailing group stays in training.
    Completion { stride: usize },
}

impl SplitSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            SplitSpec::Reconstruction => "reconstruction",
            SplitSpec::Extrapolation { .. } => "extrapolation",
            SplitSpec::Completion { .. } => "completion",
        }
    }
}

pub fn make_split(series: &TimeSeries, spec: SplitSpec) -> Result<(TimeSeries, TimeSeries), DataError> {
    let n = series.len();
    let (train, test) = match spec {
        SplitSpec::Reconstruction => (series.clone(), series.clone()),
        SplitSpec::Extrapolation { train_horizon } => {
            if !(train_horizon > 0.0) {
                return Err(DataError::Invalid(format!("train horizon {train_horizon}")));
            }
            let cut = series.t0() + train_horizon;
            let tol = 1e-9 * train_horizon.max(1.0);
            let keep: Vec<usize> = (0..n).filter(|&i| series.times()[i] <= cut + tol).collect();
            if keep.len() == n {
                return Err(DataError::InsufficientData(format!(
                    "no observations beyond the training horizon {cut}"
                )));
            }
            (series.select(&keep), series.clone())
        }
        SplitSpec::Completion { stride } => {
            if stride < 2 {
                return Err(DataError::Invalid(format!("completion stride {stride}")));
            }
            let full_groups = n / stride * stride;
            let held = |i: usize| i < full_groups && i % stride == stride / 2;
            let train: Vec<usize> = (0..n).filter(|&i| !held(i)).collect();
            let test: Vec<usize> = (0..n).filter(|&i| held(i)).collect();
            if test.is_empty() {
                return Err(DataError::InsufficientData(format!("{n} points leave nothing to hold out")));
            }
            (series.select(&train), series.select(&test))
        }
    };
    if train.len() < 2 {
        return Err(DataError::InsufficientData(format!("{} training points", train.len())));
    }
    Ok((train, test))
}
