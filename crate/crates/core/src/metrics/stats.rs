use serde::Serialize;

use super::MetricError;
use crate::scalar::Scalar;

/// Mean and sample variance of one survey column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ColumnStats<S> {
    pub n: usize,
    pub mean: S,
    /// Sample variance (n - 1 denominator); absent for a single value.
    pub variance: Option<S>,
}

impl ColumnStats<f64> {
    pub fn std_dev(&self) -> Option<f64> {
        self.variance.map(f64::sqrt)
    }
}

pub fn column_stats<S: Scalar>(values: &[S]) -> Result<ColumnStats<S>, MetricError> {
    if values.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let n = values.len();
    let mean = values.iter().fold(S::zero(), |a, &b| a + b) / S::from_count(n);
    let variance = (n > 1).then(|| {
        let ss = values.iter().fold(S::zero(), |a, &b| a + (b - mean) * (b - mean));
        ss / S::from_count(n - 1)
    });
    Ok(ColumnStats { n, mean, variance })
}
