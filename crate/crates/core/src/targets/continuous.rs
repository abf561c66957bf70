use std::fmt;

use crate::error::{check_len, Error, Result};
use crate::targets::Dataset;

/// A target on R^d known through its score ∇log p.
pub trait ScoreModel: Send + Sync {
    fn dim(&self) -> usize;

    /// Unnormalized log-density.
    fn log_density(&self, x: &[f64]) -> f64;

    /// Writes ∇log p(x) into `out`. Both slices have length `dim()`.
    fn score_into(&self, x: &[f64], out: &mut [f64]);

    fn score(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("score point", x.len(), self.dim())?;
        let mut out = vec![0.0; self.dim()];
        self.score_into(x, &mut out);
        if let Some(v) = out.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite score component {v}")));
        }
        Ok(out)
    }

    /// Access to a per-factor decomposition, if the log-density is a sum
    /// over data points.
    fn factorized(&self) -> Option<&dyn FactorizedModel> {
        None
    }
}

/// A density `p(x) ∝ prior(x) · Π_i p_i(x)` whose likelihood factors can be
/// subsampled.
pub trait FactorizedModel: ScoreModel {
    fn n_factors(&self) -> usize;

    /// Writes the gradient of the prior log-density.
    fn prior_score_into(&self, x: &[f64], out: &mut [f64]);

    /// Adds `scale · Σ_{i ∈ indices} ∇log p_i(x)` into `out`.
    fn add_factor_scores(&self, x: &[f64], indices: &[usize], scale: f64, out: &mut [f64]);

    /// Unbiased score estimate `(N/|S|) Σ_{i∈S} ∇log p_i(x) + ∇log prior(x)`.
    /// Indices are 0-based and may repeat.
    fn subsampled_score(&self, x: &[f64], subsample: &[usize]) -> Result<Vec<f64>> {
        check_len("score point", x.len(), self.dim())?;
        if subsample.is_empty() {
            return Err(Error::Contract("subsample must be non-empty".into()));
        }
        let n = self.n_factors();
        if let Some(i) = subsample.iter().find(|&&i| i >= n) {
            return Err(Error::Contract(format!(
                "subsample index {i} out of range 0..{n}"
            )));
        }
        let mut out = vec![0.0; self.dim()];
        self.subsampled_score_into(x, subsample, &mut out);
        Ok(out)
    }

    fn subsampled_score_into(&self, x: &[f64], subsample: &[usize], out: &mut [f64]) {
        self.prior_score_into(x, out);
        let scale = self.n_factors() as f64 / subsample.len() as f64;
        self.add_factor_scores(x, subsample, scale, out);
    }
}

/// N(0, I_d): score −x.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StandardGaussian {
    dim: usize,
}

impl StandardGaussian {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        StandardGaussian { dim }
    }
}

impl ScoreModel for StandardGaussian {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        -0.5 * x.iter().map(|v| v * v).sum::<f64>()
    }

    fn score_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(x) {
            *o = -v;
        }
    }
}

/// Bayesian logistic regression posterior with an isotropic Gaussian prior:
///
/// `log p(x) = Σ_i [b_i a_i·x − log(1 + exp(a_i·x))] − (λ/2)‖x‖²`.
#[derive(Clone, Debug)]
pub struct LogisticPosterior {
    data: Dataset,
    prior_precision: f64,
}

impl LogisticPosterior {
    pub fn new(data: Dataset, prior_precision: f64) -> Result<Self> {
        if !(prior_precision >= 0.0 && prior_precision.is_finite()) {
            return Err(Error::Contract(format!(
                "prior precision must be finite and >= 0, got {prior_precision}"
            )));
        }
        Ok(LogisticPosterior {
            data,
            prior_precision,
        })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn prior_precision(&self) -> f64 {
        self.prior_precision
    }
}

/// `log(1 + e^t)` without overflow.
pub(crate) fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl ScoreModel for LogisticPosterior {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let mut lp = -0.5 * self.prior_precision * dot(x, x);
        for i in 0..self.data.len() {
            let t = dot(self.data.row(i), x);
            lp += self.data.label(i) * t - softplus(t);
        }
        lp
    }

    fn score_into(&self, x: &[f64], out: &mut [f64]) {
        self.prior_score_into(x, out);
        for i in 0..self.data.len() {
            let a = self.data.row(i);
            let c = self.data.label(i) - sigmoid(dot(a, x));
            for (o, ak) in out.iter_mut().zip(a) {
                *o += c * ak;
            }
        }
    }

    fn factorized(&self) -> Option<&dyn FactorizedModel> {
        Some(self)
    }
}

impl FactorizedModel for LogisticPosterior {
    fn n_factors(&self) -> usize {
        self.data.len()
    }

    fn prior_score_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(x) {
            *o = -self.prior_precision * v;
        }
    }

    fn add_factor_scores(&self, x: &[f64], indices: &[usize], scale: f64, out: &mut [f64]) {
        for &i in indices {
            let a = self.data.row(i);
            let c = scale * (self.data.label(i) - sigmoid(dot(a, x)));
            for (o, ak) in out.iter_mut().zip(a) {
                *o += c * ak;
            }
        }
    }
}

/// A user-supplied model given by closures.
pub struct FnModel<L, S> {
    dim: usize,
    log_density: L,
    score: S,
}

impl<L, S> FnModel<L, S>
where
    L: Fn(&[f64]) -> f64 + Send + Sync,
    S: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(dim: usize, log_density: L, score: S) -> Self {
        FnModel {
            dim,
            log_density,
            score,
        }
    }
}

impl<L, S> fmt::Debug for FnModel<L, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnModel")
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl<L, S> ScoreModel for FnModel<L, S>
where
    L: Fn(&[f64]) -> f64 + Send + Sync,
    S: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        (self.log_density)(x)
    }

    fn score_into(&self, x: &[f64], out: &mut [f64]) {
        (self.score)(x, out)
    }
}
