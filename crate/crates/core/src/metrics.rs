//! Error metrics for prediction quality: RMSE, MAPE, and exact-match
//! accuracy.

use serde::{Deserialize, Serialize};

use crate::error::{HtmError, Result};

/// Bundle of the three standard metrics for one prediction pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub rmse: f64,
    /// Mean absolute percentage error, as a percentage. `None` when every
    /// truth term was zero and the metric is undefined.
    pub mape: Option<f64>,
    /// Fraction of exactly-matching terms, as a percentage.
    pub accuracy: f64,
    /// Terms skipped by MAPE because the truth value was zero.
    pub excluded_zero_terms: usize,
}

impl MetricReport {
    pub fn from_series(truth: &[f64], predicted: &[f64]) -> Result<MetricReport> {
        let rmse = rmse(truth, predicted)?;
        let accuracy = accuracy(truth, predicted)?;
        let (mape, excluded) = match mape(truth, predicted) {
            Ok((value, excluded)) => (Some(value), excluded),
            Err(HtmError::UndefinedMetric(_)) => (None, truth.len()),
            Err(other) => return Err(other),
        };
        Ok(MetricReport {
            rmse,
            mape,
            accuracy,
            excluded_zero_terms: excluded,
        })
    }
}

fn check_series(truth: &[f64], predicted: &[f64]) -> Result<()> {
    if truth.len() != predicted.len() {
        return Err(HtmError::WidthMismatch {
            left: truth.len(),
            right: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(HtmError::Data("metric over an empty series".into()));
    }
    Ok(())
}

/// Root mean squared error: `sqrt(mean((truth - predicted)^2))`.
pub fn rmse(truth: &[f64], predicted: &[f64]) -> Result<f64> {
    check_series(truth, predicted)?;
    let sum_sq: f64 = truth
        .iter()
        .zip(predicted)
        .map(|(t, p)| {
            let d = t - p;
            d * d
        })
        .sum();
    Ok((sum_sq / truth.len() as f64).sqrt())
}

/// Mean absolute percentage error, as a percentage, over the terms whose
/// truth value is nonzero. Returns the value together with the number of
/// zero-truth terms that were excluded; errors when every term is excluded.
pub fn mape(truth: &[f64], predicted: &[f64]) -> Result<(f64, usize)> {
    check_series(truth, predicted)?;
    let mut sum = 0.0;
    let mut kept = 0usize;
    for (t, p) in truth.iter().zip(predicted) {
        if *t == 0.0 {
            continue;
        }
        sum += ((t - p) / t).abs();
        kept += 1;
    }
    let excluded = truth.len() - kept;
    if kept == 0 {
        return Err(HtmError::UndefinedMetric(
            "MAPE over a series whose truth terms are all zero".into(),
        ));
    }
    Ok((100.0 * sum / kept as f64, excluded))
}

/// Fraction of terms where prediction equals truth exactly, as a percentage.
pub fn accuracy(truth: &[f64], predicted: &[f64]) -> Result<f64> {
    check_series(truth, predicted)?;
    let hits = truth.iter().zip(predicted).filter(|(t, p)| t == p).count();
    Ok(100.0 * hits as f64 / truth.len() as f64)
}
