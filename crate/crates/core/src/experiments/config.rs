use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::qp::QpSettings;
use crate::samplers::{ChainConfig, ChainKind};
use crate::targets::DatasetOptions;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Standard normal target in `dim` dimensions, TULA vs corrected vs iid.
    Gaussian20d,
    /// Bayesian logistic regression with full-data and subsampled kernels.
    Logistic,
}

/// Chain settings shared by every seed; the step count is the largest ladder
/// entry and the seed comes from the seed list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainParams {
    pub kind: ChainKind,
    pub h: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub n_s: Option<usize>,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub burn_in: usize,
}

impl ChainParams {
    pub fn to_config(&self, n_steps: usize, seed: u64) -> ChainConfig {
        ChainConfig {
            kind: self.kind,
            h: self.h,
            gamma: self.gamma,
            n_steps,
            n_s: self.n_s,
            seed,
            x0: self.x0.clone(),
            burn_in: self.burn_in,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MmdConfig {
    /// Kernel `exp(−γ‖x − y‖²)`; defaults to `1/d`.
    #[serde(default)]
    pub gamma: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticData {
    pub n_data: usize,
    pub dim: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// CSV file, last column the label.
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Generated data, used when `path` is absent.
    #[serde(default)]
    pub synthetic: Option<SyntheticData>,
    #[serde(default = "default_precision")]
    pub prior_precision: f64,
    #[serde(default = "default_true")]
    pub standardize: bool,
    #[serde(default = "default_true")]
    pub intercept: bool,
    /// Kernel subsample size; defaults to the chain's `n_s`.
    #[serde(default)]
    pub n_k: Option<usize>,
}

fn default_precision() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

impl DataConfig {
    pub fn options(&self) -> DatasetOptions {
        DatasetOptions {
            standardize: self.standardize,
            intercept: self.intercept,
        }
    }
}

fn default_ladder() -> Vec<usize> {
    (5..=11).map(|k| 1usize << k).collect()
}

fn default_dim() -> usize {
    20
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_ladder")]
    pub ladder: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Target dimension of the Gaussian experiment.
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub chain: ChainParams,
    pub kernels: Vec<KernelSpec>,
    #[serde(default)]
    pub qp: QpSettings,
    #[serde(default)]
    pub mmd: MmdConfig,
    #[serde(default)]
    pub data: Option<DataConfig>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a TOML config; relative data paths resolve against the file's
    /// directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(dir) = path.parent() {
            if let Some(data) = cfg.data.as_mut() {
                if let Some(p) = data.path.as_mut() {
                    if p.is_relative() {
                        *p = dir.join(&*p);
                    }
                }
            }
        }
        Ok(cfg)
    }

    pub fn max_n(&self) -> usize {
        *self.ladder.last().unwrap()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.ladder.is_empty() || self.ladder[0] == 0 {
            return bad("ladder must be non-empty with positive sizes".into());
        }
        if self.ladder.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!(
                "ladder must be strictly increasing: {:?}",
                self.ladder
            ));
        }
        if self.seeds.is_empty() {
            return bad("seeds must be non-empty".into());
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return bad("seeds must be distinct".into());
        }
        if self.kernels.is_empty() {
            return bad("at least one kernel is required".into());
        }
        if self
            .kernels
            .iter()
            .map(|k| &k.id)
            .collect::<BTreeSet<_>>()
            .len()
            != self.kernels.len()
        {
            return bad("kernel ids must be unique".into());
        }
        for k in &self.kernels {
            k.validate()
                .map_err(|e| Error::Config(format!("kernel '{}': {e}", k.id)))?;
        }
        self.qp.validate()?;
        self.chain.to_config(self.max_n(), 0).validate()?;
        if let Some(g) = self.mmd.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return bad(format!("mmd.gamma must be positive, got {g}"));
            }
        }
        match self.experiment {
            ExperimentKind::Gaussian20d => {
                if self.dim == 0 {
                    return bad("dim must be positive".into());
                }
                if self.chain.kind == ChainKind::TulaSubsampled {
                    return bad("the Gaussian experiment has no data to subsample".into());
                }
            }
            ExperimentKind::Logistic => {
                let Some(data) = &self.data else {
                    return bad("logistic experiment needs a [data] section".into());
                };
                if data.path.is_none() && data.synthetic.is_none() {
                    return bad("[data] needs either path or synthetic".into());
                }
                if !(data.prior_precision >= 0.0 && data.prior_precision.is_finite()) {
                    return bad("prior_precision must be >= 0".into());
                }
                if self.n_k().is_none() {
                    return bad("logistic experiment needs data.n_k or chain.n_s".into());
                }
            }
        }
        Ok(())
    }

    /// Kernel subsample size: `data.n_k`, falling back to `chain.n_s`.
    pub fn n_k(&self) -> Option<usize> {
        self.data
            .as_ref()
            .and_then(|d| d.n_k)
            .or(self.chain.n_s)
            .filter(|&n| n > 0)
    }

    /// First 12 hex digits of the SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(digest)[..12].to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GAUSS: &str = r#"
experiment = "gaussian20d"
seeds = [1, 2]

[chain]
kind = "tula"
h = 1.0
gamma = 0.05

[[kernels]]
id = "imq"
base = { family = "imq", alpha = 1.0, beta = 0.5 }
"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = ExperimentConfig::from_toml_str(GAUSS).unwrap();
        assert_eq!(cfg.ladder, vec![32, 64, 128, 256, 512, 1024, 2048]);
        assert_eq!(cfg.dim, 20);
        assert_eq!(cfg.qp.tol, 1e-8);
        assert_eq!(cfg.hash().len(), 12);
        assert_eq!(
            cfg.hash(),
            ExperimentConfig::from_toml_str(GAUSS).unwrap().hash()
        );
    }

    #[test]
    fn rejects_bad_ladders_and_seeds() {
        let bad = GAUSS.replace("seeds = [1, 2]", "seeds = [1, 2]\nladder = [64, 32]");
        assert!(matches!(
            ExperimentConfig::from_toml_str(&bad),
            Err(Error::Config(_))
        ));
        let bad = GAUSS.replace("seeds = [1, 2]", "seeds = []");
        assert!(matches!(
            ExperimentConfig::from_toml_str(&bad),
            Err(Error::Config(_))
        ));
        let bad = GAUSS.replace("h = 1.0", "h = 1.0\nbogus = 3");
        assert!(matches!(
            ExperimentConfig::from_toml_str(&bad),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn logistic_needs_data() {
        let bad = GAUSS.replace("gaussian20d", "logistic");
        assert!(matches!(
            ExperimentConfig::from_toml_str(&bad),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn full_scale_logistic_configs_echo() {
        for (h, gamma, n_s, n, d) in [(0.1, 0.05, 500, 3196, 38), (0.05, 0.01, 1000, 4601, 105)] {
            let text = format!(
                r#"
experiment = "logistic"
seeds = [1]
[chain]
kind = "tula-subsampled"
h = {h}
gamma = {gamma}
n_s = {n_s}
[data]
synthetic = {{ n_data = {n}, dim = {d} }}
[[kernels]]
id = "imq"
base = {{ family = "imq", alpha = 1.0, beta = 0.5 }}
"#
            );
            let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
            assert_eq!(cfg.chain.h, h);
            assert_eq!(cfg.chain.gamma, gamma);
            assert_eq!(cfg.n_k(), Some(n_s));
            let syn = cfg.data.unwrap().synthetic.unwrap();
            assert_eq!((syn.n_data, syn.dim), (n, d));
        }
    }
}
