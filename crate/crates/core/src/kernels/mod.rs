//! Base kernels and the Stein kernels built from them.

mod base;
mod lattice;
mod stein;
mod zanella;

use serde::{Deserialize, Serialize};

pub use base::{BaseDerivatives, BaseKernel, Profile};
pub use lattice::{LatticeBase, LatticeForm, LatticeSamples, LatticeStein};
pub use stein::{
    kernel_subsamples, stein_canonical, stein_marginal, stein_subsampled, ContinuousVariant,
    ScoredSamples,
};
pub use zanella::{Balancing, GraphSamples, GraphSpec, ZanellaStein};

use crate::error::{Error, Result};
use crate::targets::ScoreModel;

/// Stein kernel variants available on R^d.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    #[default]
    Canonical,
    Marginal,
    SubsampledCanonical,
}

/// A configured Stein kernel on R^d.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    /// Short label used in output tables.
    pub id: String,
    pub base: BaseKernel,
    #[serde(default)]
    pub variant: Variant,
    /// Per-sample gradient subsample size for the subsampled variant.
    #[serde(default)]
    pub n_k: Option<usize>,
}

impl KernelSpec {
    pub fn new(id: impl Into<String>, base: BaseKernel) -> Self {
        KernelSpec {
            id: id.into(),
            base,
            variant: Variant::Canonical,
            n_k: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.variant == Variant::SubsampledCanonical && !matches!(self.n_k, Some(n) if n > 0) {
            return Err(Error::Config(format!(
                "kernel '{}': subsampled variant needs n_k >= 1",
                self.id
            )));
        }
        Ok(())
    }

    /// Scores the points under this kernel. `seed` drives the per-index
    /// subsamples of the subsampled variant and is ignored otherwise.
    pub fn prepare<'a>(
        &self,
        model: &dyn ScoreModel,
        points: &'a [Vec<f64>],
        seed: u64,
    ) -> Result<ScoredSamples<'a>> {
        self.validate()?;
        match self.variant {
            Variant::Canonical => ScoredSamples::canonical(model, self.base, points),
            Variant::Marginal => ScoredSamples::marginal(model, self.base, points),
            Variant::SubsampledCanonical => {
                let factorized = model.factorized().ok_or_else(|| {
                    Error::Config(format!(
                        "kernel '{}': target has no data factors to subsample",
                        self.id
                    ))
                })?;
                ScoredSamples::subsampled(
                    factorized,
                    self.base,
                    points,
                    self.n_k.unwrap_or(1),
                    seed,
                )
            }
        }
    }
}
