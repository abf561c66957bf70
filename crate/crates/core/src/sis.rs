//! Stein importance sampling end to end, and the classical IS baseline.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::gram::{assemble_gram, GramMatrix, GramSource};
use crate::qp::{solve, QpSettings, QpStatus};
use crate::weights::WeightVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QpDiagnostics {
    pub iterations: usize,
    pub kkt_residual: f64,
    pub status: QpStatus,
    pub jitter: f64,
}

/// Weights and KSD of a Stein-corrected sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionResult {
    pub weights: WeightVector,
    /// `sqrt(wᵀKw)` at the returned weights.
    pub ksd: f64,
    pub uniform_ksd: f64,
    pub gram_provenance: String,
    pub qp: QpDiagnostics,
}

/// Assembles the Gram matrix, solves the weight QP, and reports the KSD.
pub fn stein_correct<S: GramSource + ?Sized>(
    samples: &S,
    settings: &QpSettings,
) -> Result<CorrectionResult> {
    let gram = assemble_gram(samples)?;
    correct_gram(&gram, settings)
}

/// The QP and KSD steps on an already assembled Gram matrix.
pub fn correct_gram(gram: &GramMatrix, settings: &QpSettings) -> Result<CorrectionResult> {
    let sol = solve(gram, settings)?;
    let uniform = crate::gram::ksd_squared(gram, &WeightVector::uniform(gram.n()))?;
    let scale = (gram.trace().abs() / gram.n() as f64).max(1.0);
    if sol.objective < -crate::gram::CLAMP_TOL * scale {
        return Err(Error::Numerical(format!(
            "QP objective {} is negative",
            sol.objective
        )));
    }
    Ok(CorrectionResult {
        weights: sol.weights,
        ksd: sol.objective.max(0.0).sqrt(),
        uniform_ksd: uniform.sqrt(),
        gram_provenance: gram.provenance().to_string(),
        qp: QpDiagnostics {
            iterations: sol.iterations,
            kkt_residual: sol.kkt_residual,
            status: sol.status,
            jitter: sol.jitter,
        },
    })
}

/// `Σ w_i φ(X_i)`.
pub fn weighted_estimate(weights: &WeightVector, phi_values: &[f64]) -> Result<f64> {
    check_len("test-function values", phi_values.len(), weights.len())?;
    Ok(weights
        .as_slice()
        .iter()
        .zip(phi_values)
        .map(|(w, f)| w * f)
        .sum())
}

/// Self-normalized importance weights `w_i ∝ (dπ/dν)(X_i)`.
pub fn classical_is_weights<P, F>(samples: &[P], density_ratio: F) -> Result<WeightVector>
where
    F: Fn(&P) -> f64,
{
    if samples.is_empty() {
        return Err(Error::Contract("need at least one sample".into()));
    }
    let raw: Vec<f64> = samples.iter().map(density_ratio).collect();
    if let Some(bad) = raw.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(Error::Input(format!(
            "density ratio {bad} is not finite and nonnegative"
        )));
    }
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::Input("all importance weights are zero".into()));
    }
    Ok(WeightVector::from_feasible(raw))
}
