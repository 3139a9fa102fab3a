use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probabilities are clipped to `[LOG_LOSS_EPS, 1 - LOG_LOSS_EPS]` before
/// taking logs.
pub const LOG_LOSS_EPS: f64 = 1e-12;

/// Out-of-sample error summaries; a metric is `None` when it does not apply.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Mean squared error against the reference values.
    pub mse: Option<f64>,
    pub rmse: Option<f64>,
    /// Test MSE over the MSE of the training-mean predictor.
    pub smse: Option<f64>,
    pub misclassification: Option<f64>,
    pub log_loss: Option<f64>,
    pub brier: Option<f64>,
}

impl MetricsReport {
    /// The defined metrics as `(name, value)` pairs in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        [
            ("mse", self.mse),
            ("rmse", self.rmse),
            ("smse", self.smse),
            ("misclassification", self.misclassification),
            ("log_loss", self.log_loss),
            ("brier", self.brier),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect()
    }
}

fn check(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() {
        return Err(Error::Invalid("metrics need at least one point".into()));
    }
    if a.len() != b.len() {
        return Err(Error::Invalid(format!("{} outcomes but {} predictions", a.len(), b.len())));
    }
    Ok(())
}

pub fn mse(y: &[f64], pred: &[f64]) -> Result<f64> {
    check(y, pred)?;
    Ok(y.iter().zip(pred).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / y.len() as f64)
}

/// Regression metrics of `pred` against `y`; SMSE divides by the MSE of
/// predicting `train_mean` everywhere.
pub fn regression_metrics(y: &[f64], pred: &[f64], train_mean: f64) -> Result<MetricsReport> {
    let m = mse(y, pred)?;
    let base = y.iter().map(|v| (v - train_mean).powi(2)).sum::<f64>() / y.len() as f64;
    Ok(MetricsReport {
        mse: Some(m),
        rmse: Some(m.sqrt()),
        smse: (base > 0.0).then(|| m / base),
        ..MetricsReport::default()
    })
}

/// Classification metrics of probabilities `p` against 0/1 outcomes `y`.
/// A point is classified as 1 iff `p > 0.5`.
pub fn classification_metrics(y: &[f64], p: &[f64]) -> Result<MetricsReport> {
    check(y, p)?;
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::Invalid("classification outcomes must be 0 or 1".into()));
    }
    if p.iter().any(|&q| !(0.0..=1.0).contains(&q)) {
        return Err(Error::Invalid("probabilities must lie in [0, 1]".into()));
    }
    let n = y.len() as f64;
    let wrong = y
        .iter()
        .zip(p)
        .filter(|(&v, &q)| (q > 0.5) != (v == 1.0))
        .count();
    let log_loss = y
        .iter()
        .zip(p)
        .map(|(&v, &q)| {
            let q = q.clamp(LOG_LOSS_EPS, 1.0 - LOG_LOSS_EPS);
            -(v * q.ln() + (1.0 - v) * (1.0 - q).ln())
        })
        .sum::<f64>()
        / n;
    Ok(MetricsReport {
        misclassification: Some(wrong as f64 / n),
        log_loss: Some(log_loss),
        brier: Some(mse(y, p)?),
        ..MetricsReport::default()
    })
}
