use dfl_core::TimeSeries;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// `max_t |a(t) - b(t)|`.
    MaxAbs,
    /// `mean_t |a(t) - b(t)|`.
    TimeAveraged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub metric: Metric,
    pub value: f64,
    pub tolerance: f64,
    pub points: usize,
    pub passed: bool,
}

pub fn compare(a: &TimeSeries, b: &TimeSeries, metric: Metric, tolerance: f64) -> Result<CompareReport, CliError> {
    if a.len() != b.len() || a.times.iter().zip(&b.times).any(|(x, y)| (x - y).abs() > 1e-9 * x.abs().max(1.0)) {
        return Err(CliError::Config(format!(
            "series '{}' and '{}' are on different time grids",
            a.label, b.label
        )));
    }
    if a.is_empty() {
        return Err(CliError::Config("empty series".into()));
    }
    let diffs = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs());
    let value = match metric {
        Metric::MaxAbs => diffs.fold(0.0, f64::max),
        Metric::TimeAveraged => diffs.sum::<f64>() / a.len() as f64,
    };
    Ok(CompareReport {
        metric,
        value,
        tolerance,
        points: a.len(),
        passed: value <= tolerance,
    })
}
