use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::base::BaseKernel;
use crate::error::{check_len, Error, Result};
use crate::gram::GramSource;
use crate::rng::{stream, Stream};
use crate::samplers::draw_subsample;
use crate::targets::{FactorizedModel, ScoreModel};

/// Canonical (Langevin) Stein kernel
///
/// `∇_x·∇_y k + s_x·∇_y k + s_y·∇_x k + k s_x·s_y`
///
/// with the scores supplied by the caller.
#[inline]
pub fn stein_canonical(base: &BaseKernel, x: &[f64], y: &[f64], sx: &[f64], sy: &[f64]) -> f64 {
    let d = x.len();
    let mut r2 = 0.0;
    let mut proj = 0.0;
    let mut ss = 0.0;
    for k in 0..d {
        let diff = x[k] - y[k];
        r2 += diff * diff;
        proj += (sy[k] - sx[k]) * diff;
        ss += sx[k] * sy[k];
    }
    let p = base.profile(r2);
    let cross = -2.0 * d as f64 * p.d1 - 4.0 * r2 * p.d2;
    cross + 2.0 * p.d1 * proj + p.value * ss
}

/// Marginal Stein kernel: the one-dimensional canonical kernel applied to each
/// coordinate with base kernel `k(x_i, y_i)`, summed over coordinates.
#[inline]
pub fn stein_marginal(base: &BaseKernel, x: &[f64], y: &[f64], sx: &[f64], sy: &[f64]) -> f64 {
    let mut total = 0.0;
    for k in 0..x.len() {
        let diff = x[k] - y[k];
        let r2 = diff * diff;
        let p = base.profile(r2);
        let cross = -2.0 * p.d1 - 4.0 * r2 * p.d2;
        total += cross + 2.0 * p.d1 * (sy[k] - sx[k]) * diff + p.value * sx[k] * sy[k];
    }
    total
}

/// Subsampled canonical Stein kernel entry: scores at `x` and `y` are the
/// unbiased estimates built from the subsamples memoized for the two sample
/// indices.
pub fn stein_subsampled(
    base: &BaseKernel,
    model: &dyn FactorizedModel,
    x: &[f64],
    y: &[f64],
    subsample_x: &[usize],
    subsample_y: &[usize],
) -> Result<f64> {
    check_len("kernel argument", y.len(), x.len())?;
    let sx = model.subsampled_score(x, subsample_x)?;
    let sy = model.subsampled_score(y, subsample_y)?;
    Ok(stein_canonical(base, x, y, &sx, &sy))
}

/// Continuous Stein kernel variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContinuousVariant {
    Canonical,
    Marginal,
}

/// Points on R^d together with the score used for each of them.
///
/// For the subsampled kernel, each sample index owns one subsample drawn up
/// front from its own stream, and that subsample is reused for every Gram
/// entry in the index's row and column.
#[derive(Clone, Debug)]
pub struct ScoredSamples<'a> {
    base: BaseKernel,
    variant: ContinuousVariant,
    points: &'a [Vec<f64>],
    scores: Vec<Vec<f64>>,
    subsamples: Option<Vec<Vec<usize>>>,
    provenance: String,
}

fn check_points(points: &[Vec<f64>], dim: usize) -> Result<()> {
    if points.is_empty() {
        return Err(Error::Contract("need at least one sample".into()));
    }
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::Contract(format!(
                "sample {i} has length {}, expected {dim}",
                p.len()
            )));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::Contract(format!("sample {i} is not finite")));
        }
    }
    Ok(())
}

/// Per-index gradient subsamples of size `n_k`, index `i` drawn from
/// [`Stream::KernelSubsample`]`(i)`.
pub fn kernel_subsamples(
    n_samples: usize,
    n_data: usize,
    n_k: usize,
    seed: u64,
) -> Vec<Vec<usize>> {
    (0..n_samples)
        .map(|i| {
            let mut rng = stream(seed, Stream::KernelSubsample(i as u64));
            draw_subsample(n_data, n_k, &mut rng)
        })
        .collect()
}

impl<'a> ScoredSamples<'a> {
    pub fn canonical(
        model: &dyn ScoreModel,
        base: BaseKernel,
        points: &'a [Vec<f64>],
    ) -> Result<Self> {
        Self::full(model, base, ContinuousVariant::Canonical, points)
    }

    pub fn marginal(
        model: &dyn ScoreModel,
        base: BaseKernel,
        points: &'a [Vec<f64>],
    ) -> Result<Self> {
        Self::full(model, base, ContinuousVariant::Marginal, points)
    }

    pub fn full(
        model: &dyn ScoreModel,
        base: BaseKernel,
        variant: ContinuousVariant,
        points: &'a [Vec<f64>],
    ) -> Result<Self> {
        base.validate()?;
        check_points(points, model.dim())?;
        let scores = points
            .par_iter()
            .map(|p| model.score(p))
            .collect::<Result<Vec<_>>>()?;
        let provenance = format!("{variant:?}/{}", base.id()).to_lowercase();
        Ok(ScoredSamples {
            base,
            variant,
            points,
            scores,
            subsamples: None,
            provenance,
        })
    }

    /// Uses caller-supplied scores, one per point.
    pub fn with_scores(
        base: BaseKernel,
        variant: ContinuousVariant,
        points: &'a [Vec<f64>],
        scores: Vec<Vec<f64>>,
    ) -> Result<Self> {
        base.validate()?;
        let dim = points.first().map(Vec::len).unwrap_or(0);
        check_points(points, dim)?;
        check_len("scores", scores.len(), points.len())?;
        for (i, s) in scores.iter().enumerate() {
            check_len("score", s.len(), dim)?;
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::Contract(format!("score {i} is not finite")));
            }
        }
        let provenance = format!("{variant:?}/{}/external-scores", base.id()).to_lowercase();
        Ok(ScoredSamples {
            base,
            variant,
            points,
            scores,
            subsamples: None,
            provenance,
        })
    }

    /// Subsampled canonical kernel with per-index subsamples of size `n_k`.
    pub fn subsampled(
        model: &dyn FactorizedModel,
        base: BaseKernel,
        points: &'a [Vec<f64>],
        n_k: usize,
        seed: u64,
    ) -> Result<Self> {
        if n_k == 0 {
            return Err(Error::Contract("kernel subsample size must be >= 1".into()));
        }
        let subsamples = kernel_subsamples(points.len(), model.n_factors(), n_k, seed);
        let mut s = Self::with_subsamples(model, base, points, subsamples)?;
        s.provenance = format!("subsampled-canonical/{}/n_k={n_k}/seed={seed}", base.id());
        Ok(s)
    }

    /// Subsampled canonical kernel with explicit per-index subsamples.
    pub fn with_subsamples(
        model: &dyn FactorizedModel,
        base: BaseKernel,
        points: &'a [Vec<f64>],
        subsamples: Vec<Vec<usize>>,
    ) -> Result<Self> {
        base.validate()?;
        check_points(points, model.dim())?;
        check_len("subsamples", subsamples.len(), points.len())?;
        let scores = points
            .par_iter()
            .zip(subsamples.par_iter())
            .map(|(p, s)| model.subsampled_score(p, s))
            .collect::<Result<Vec<_>>>()?;
        let provenance = format!("subsampled-canonical/{}/explicit", base.id());
        Ok(ScoredSamples {
            base,
            variant: ContinuousVariant::Canonical,
            points,
            scores,
            subsamples: Some(subsamples),
            provenance,
        })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        self.points
    }

    pub fn scores(&self) -> &[Vec<f64>] {
        &self.scores
    }

    pub fn subsamples(&self) -> Option<&[Vec<usize>]> {
        self.subsamples.as_deref()
    }

    pub fn base(&self) -> &BaseKernel {
        &self.base
    }

    /// Kernel value between two arbitrary indices.
    pub fn kernel(&self, i: usize, j: usize) -> f64 {
        let (x, y) = (&self.points[i], &self.points[j]);
        let (sx, sy) = (&self.scores[i], &self.scores[j]);
        match self.variant {
            ContinuousVariant::Canonical => stein_canonical(&self.base, x, y, sx, sy),
            ContinuousVariant::Marginal => stein_marginal(&self.base, x, y, sx, sy),
        }
    }
}

impl GramSource for ScoredSamples<'_> {
    fn len(&self) -> usize {
        self.points.len()
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        self.kernel(i, j)
    }

    fn provenance(&self) -> String {
        self.provenance.clone()
    }
}
