//! Target distributions.
//!
//! Continuous targets are known only through an unnormalized log-density and
//! its gradient (the score). Discrete targets are known through ratios of
//! their mass function, so no normalizing constant is ever needed.

mod continuous;
mod data;
mod discrete;

pub use continuous::{FactorizedModel, FnModel, LogisticPosterior, ScoreModel, StandardGaussian};
pub use data::{generate_synthetic, load_dataset, parse_dataset, Dataset, DatasetOptions};
pub use discrete::{
    discrete_ratio, GraphTarget, LatticePoint, LatticeTarget, ProductPoisson, TabulatedLattice,
};
