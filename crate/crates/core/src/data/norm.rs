use super::{DataError, TimeSeries};

/// Per-component min-max scaling fitted on one series.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormStats {
    pub fn fit(series: &TimeSeries) -> Result<Self, DataError> {
        let mut min = Vec::with_capacity(series.dim());
        let mut max = Vec::with_capacity(series.dim());
        for d in 0..series.dim() {
            let c = series.component(d);
            let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !(hi > lo) {
                return Err(DataError::ConstantSeries { dim: d });
            }
            min.push(lo);
            max.push(hi);
        }
        Ok(Self { min, max })
    }

    fn check(&self, series: &TimeSeries) -> Result<(), DataError> {
        if series.dim() != self.min.len() {
            return Err(DataError::Invalid(format!(
                "series has dimension {}, statistics have {}",
                series.dim(),
                self.min.len()
            )));
        }
        Ok(())
    }

    /// Scale with these statistics; values outside the fitted range are not clamped.
    pub fn apply(&self, series: &TimeSeries) -> Result<TimeSeries, DataError> {
        self.check(series)?;
        Ok(series.map_values(|d, v| self.scale(d, v)))
    }

    pub fn denormalize(&self, series: &TimeSeries) -> Result<TimeSeries, DataError> {
        self.check(series)?;
        Ok(series.map_values(|d, v| self.unscale(d, v)))
    }

    pub fn scale(&self, d: usize, v: f64) -> f64 {
        (v - self.min[d]) / (self.max[d] - self.min[d])
    }

    pub fn unscale(&self, d: usize, v: f64) -> f64 {
        self.min[d] + v * (self.max[d] - self.min[d])
    }
}

/// Map each component of `series` onto [0, 1].
pub fn normalize(series: &TimeSeries) -> Result<(TimeSeries, NormStats), DataError> {
    let stats = NormStats::fit(series)?;
    Ok((stats.apply(series)?, stats))
}
