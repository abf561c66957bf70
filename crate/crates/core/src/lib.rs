//! Stein importance sampling.
//!
//! Post-hoc bias correction for (possibly biased) Markov chain output: build a
//! reproducing Stein kernel for the target, assemble its Gram matrix on the
//! samples, and find simplex weights that minimize the kernelized Stein
//! discrepancy (KSD) of the weighted empirical measure.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`targets`] | score models, the logistic posterior, lattice and graph targets |
//! | [`kernels`] | radial base kernels and the five Stein kernel variants |
//! | [`gram`] | Gram assembly, KSD and Gaussian-reference MMD |
//! | [`qp`] | the simplex-constrained quadratic program |
//! | [`samplers`] | iid Gaussian, ULA and tamed ULA chains |
//! | [`sis`] | end-to-end correction and the classical IS baseline |
//! | [`experiments`] | config-driven convergence experiments |
//!
//! ```
//! use steinis::gram::{assemble_gram, ksd_squared};
//! use steinis::kernels::{BaseKernel, ScoredSamples};
//! use steinis::qp::{solve, QpSettings};
//! use steinis::targets::StandardGaussian;
//!
//! let model = StandardGaussian::new(2);
//! let points = vec![vec![0.5, -0.2], vec![-1.0, 0.3], vec![2.0, 2.0]];
//! let samples = ScoredSamples::canonical(&model, BaseKernel::imq(1.0, 0.5), &points).unwrap();
//! let gram = assemble_gram(&samples).unwrap();
//! let sol = solve(&gram, &QpSettings::default()).unwrap();
//! let uniform = steinis::WeightVector::uniform(3);
//! assert!(sol.objective <= ksd_squared(&gram, &uniform).unwrap());
//! ```

pub mod error;
pub mod experiments;
pub mod gram;
pub mod kernels;
pub mod qp;
pub mod rng;
pub mod samplers;
pub mod sis;
pub mod targets;
mod weights;

pub use error::{Error, Result};
pub use weights::WeightVector;
