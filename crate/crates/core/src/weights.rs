use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

/// Nonnegative weights summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform weights need n >= 1");
        WeightVector(vec![1.0 / n as f64; n])
    }

    /// All mass on index `k`.
    pub fn atom(n: usize, k: usize) -> Self {
        let mut w = vec![0.0; n];
        w[k] = 1.0;
        WeightVector(w)
    }

    /// Validates simplex membership. Entries in `[-1e-12, 0)` are clamped to 0.
    pub fn new(mut w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::Contract("weight vector is empty".into()));
        }
        if let Some(bad) = w.iter().find(|v| !v.is_finite() || **v < -SUM_TOL) {
            return Err(Error::Contract(format!(
                "weight {bad} is not a valid simplex entry"
            )));
        }
        for v in w.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL * (w.len() as f64).max(1.0) {
            return Err(Error::Contract(format!("weights sum to {sum}, not 1")));
        }
        Ok(WeightVector(w))
    }

    /// Builds from a vector known to be feasible up to round-off; renormalizes.
    pub(crate) fn from_feasible(mut w: Vec<f64>) -> Self {
        for v in w.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let sum: f64 = w.iter().sum();
        for v in w.iter_mut() {
            *v /= sum;
        }
        WeightVector(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Kish effective sample size `1 / Σ w_i²`.
    pub fn effective_sample_size(&self) -> f64 {
        1.0 / self.0.iter().map(|w| w * w).sum::<f64>()
    }
}
