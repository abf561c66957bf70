//! Seeded sample chains: exact iid Gaussian draws, ULA and tamed ULA.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, Stream, StreamRng};
use crate::targets::ScoreModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainKind {
    IidGaussian,
    Ula,
    Tula,
    TulaSubsampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub kind: ChainKind,
    /// Step size `h`.
    #[serde(default = "default_h")]
    pub h: f64,
    /// Taming parameter `γ`; 0 recovers ULA.
    #[serde(default)]
    pub gamma: f64,
    pub n_steps: usize,
    /// Gradient subsample size for [`ChainKind::TulaSubsampled`].
    #[serde(default)]
    pub n_s: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Starting point; the origin when absent.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    /// Leading steps discarded from the output.
    #[serde(default)]
    pub burn_in: usize,
}

fn default_h() -> f64 {
    1.0
}

impl ChainConfig {
    pub fn tula(h: f64, gamma: f64, n_steps: usize, seed: u64) -> Self {
        ChainConfig {
            kind: ChainKind::Tula,
            h,
            gamma,
            n_steps,
            n_s: None,
            seed,
            x0: None,
            burn_in: 0,
        }
    }

    pub fn iid(n_steps: usize, seed: u64) -> Self {
        ChainConfig {
            kind: ChainKind::IidGaussian,
            ..Self::tula(1.0, 0.0, n_steps, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_steps == 0 {
            return Err(Error::Config("chain needs n_steps >= 1".into()));
        }
        if self.kind != ChainKind::IidGaussian {
            if !(self.h > 0.0 && self.h.is_finite()) {
                return Err(Error::Config(format!(
                    "step size must be positive, got {}",
                    self.h
                )));
            }
            if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
                return Err(Error::Config(format!(
                    "taming parameter must be >= 0, got {}",
                    self.gamma
                )));
            }
        }
        if self.kind == ChainKind::TulaSubsampled && !matches!(self.n_s, Some(n) if n >= 1) {
            return Err(Error::Config("subsampled chain needs n_s >= 1".into()));
        }
        Ok(())
    }
}

/// Generated points plus the configuration that produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub points: Vec<Vec<f64>>,
    pub config: ChainConfig,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_points_csv(&self.points, w)
    }
}

pub fn write_points_csv<W: Write>(points: &[Vec<f64>], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let d = points.first().map(Vec::len).unwrap_or(0);
    wr.write_record((1..=d).map(|k| format!("x{k}")))?;
    for p in points {
        wr.write_record(p.iter().map(|v| format!("{v:?}")))?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads points written by [`write_points_csv`]; a non-numeric first row is
/// treated as a header.
pub fn read_points_csv<R: std::io::Read>(r: R) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut points: Vec<Vec<f64>> = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(idx + 1);
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => {
                if let Some(first) = points.first() {
                    if first.len() != v.len() {
                        return Err(Error::Parse {
                            line,
                            message: "inconsistent column count".into(),
                        });
                    }
                }
                points.push(v);
            }
            Err(_) if idx == 0 => continue,
            Err(e) => {
                return Err(Error::Parse {
                    line,
                    message: e.to_string(),
                })
            }
        }
    }
    if points.is_empty() {
        return Err(Error::Input("no sample rows".into()));
    }
    Ok(points)
}

/// One tamed Langevin update `x + (h/2) s/(1 + γ‖s‖) + √h z` for a
/// precomputed score `s`.
pub fn tula_step(x: &[f64], score: &[f64], h: f64, gamma: f64, z: &[f64]) -> Result<Vec<f64>> {
    if score.len() != x.len() || z.len() != x.len() {
        return Err(Error::Contract(
            "tula_step: x, score and z must share a length".into(),
        ));
    }
    if score.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("non-finite score at {x:?}")));
    }
    let norm = score.iter().map(|v| v * v).sum::<f64>().sqrt();
    let drift = 0.5 * h / (1.0 + gamma * norm);
    let sqrt_h = h.sqrt();
    Ok(x.iter()
        .zip(score)
        .zip(z)
        .map(|((xi, si), zi)| xi + drift * si + sqrt_h * zi)
        .collect())
}

/// `size` indices drawn uniformly with replacement from `0..n_data`.
pub fn draw_subsample(n_data: usize, size: usize, rng: &mut StreamRng) -> Vec<usize> {
    assert!(
        n_data >= 1 && size >= 1,
        "draw_subsample needs n_data >= 1 and size >= 1"
    );
    (0..size).map(|_| rng.random_range(0..n_data)).collect()
}

fn gaussian_vec(rng: &mut StreamRng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

/// Runs a chain. Gaussian increments come from [`Stream::Chain`], gradient
/// subsamples from [`Stream::ChainSubsample`], iid draws from [`Stream::Iid`].
pub fn run_chain(config: &ChainConfig, model: &dyn ScoreModel) -> Result<Chain> {
    config.validate()?;
    let d = model.dim();
    let total = config.n_steps + config.burn_in;
    let mut points = Vec::with_capacity(config.n_steps);

    if config.kind == ChainKind::IidGaussian {
        let mut rng = stream(config.seed, Stream::Iid);
        for step in 0..total {
            let p = gaussian_vec(&mut rng, d);
            if step >= config.burn_in {
                points.push(p);
            }
        }
        return Ok(Chain {
            points,
            config: config.clone(),
        });
    }

    let gamma = if config.kind == ChainKind::Ula {
        0.0
    } else {
        config.gamma
    };
    let factorized = match config.kind {
        ChainKind::TulaSubsampled => Some(model.factorized().ok_or_else(|| {
            Error::Config("subsampled chain needs a target with data factors".into())
        })?),
        _ => None,
    };
    let mut x = match &config.x0 {
        Some(x0) if x0.len() == d => x0.clone(),
        Some(x0) => {
            return Err(Error::Config(format!(
                "x0 has length {}, target dimension is {d}",
                x0.len()
            )))
        }
        None => vec![0.0; d],
    };
    let mut noise = stream(config.seed, Stream::Chain);
    let mut sub_rng = stream(config.seed, Stream::ChainSubsample);
    let mut score = vec![0.0; d];
    for step in 0..total {
        match factorized {
            Some(f) => {
                let idx = draw_subsample(f.n_factors(), config.n_s.unwrap_or(1), &mut sub_rng);
                f.subsampled_score_into(&x, &idx, &mut score);
            }
            None => model.score_into(&x, &mut score),
        }
        let z = gaussian_vec(&mut noise, d);
        x = tula_step(&x, &score, config.h, gamma, &z)
            .map_err(|e| Error::Numerical(format!("step {step}: {e}")))?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("chain diverged at step {step}")));
        }
        if step >= config.burn_in {
            points.push(x.clone());
        }
    }
    Ok(Chain {
        points,
        config: config.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::StandardGaussian;

    #[test]
    fn zero_drift_at_mode() {
        let z = [0.3, -1.2];
        let x = tula_step(&[0.0, 0.0], &[0.0, 0.0], 0.25, 0.05, &z).unwrap();
        assert_eq!(x, vec![0.5 * 0.3, 0.5 * -1.2]);
    }

    #[test]
    fn untamed_is_ula() {
        let (x, s, z) = ([1.0, -2.0], [-1.0, 2.0], [0.1, 0.2]);
        let got = tula_step(&x, &s, 0.5, 0.0, &z).unwrap();
        for k in 0..2 {
            let want = x[k] + 0.25 * s[k] + 0.5f64.sqrt() * z[k];
            assert_eq!(got[k], want);
        }
    }

    #[test]
    fn non_finite_score_is_numerical_error() {
        let err = tula_step(&[0.0], &[f64::NAN], 1.0, 0.1, &[0.0]).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
    }

    #[test]
    fn same_seed_same_chain() {
        let m = StandardGaussian::new(3);
        let cfg = ChainConfig::tula(1.0, 0.05, 50, 17);
        assert_eq!(run_chain(&cfg, &m).unwrap(), run_chain(&cfg, &m).unwrap());
        let other = ChainConfig {
            seed: 18,
            ..cfg.clone()
        };
        assert_ne!(
            run_chain(&cfg, &m).unwrap().points,
            run_chain(&other, &m).unwrap().points
        );
    }

    #[test]
    fn burn_in_discards_prefix() {
        let m = StandardGaussian::new(2);
        let full = run_chain(&ChainConfig::tula(0.5, 0.1, 30, 4), &m).unwrap();
        let burned = run_chain(
            &ChainConfig {
                burn_in: 10,
                n_steps: 20,
                ..ChainConfig::tula(0.5, 0.1, 30, 4)
            },
            &m,
        )
        .unwrap();
        assert_eq!(burned.points[..], full.points[10..]);
    }

    #[test]
    fn degenerate_subsample() {
        let mut rng = stream(1, Stream::ChainSubsample);
        assert!(draw_subsample(1, 20, &mut rng).iter().all(|&i| i == 0));
    }

    #[test]
    fn config_validation() {
        assert!(ChainConfig::tula(0.0, 0.1, 10, 1).validate().is_err());
        assert!(ChainConfig::tula(1.0, -0.1, 10, 1).validate().is_err());
        assert!(ChainConfig::tula(1.0, 0.1, 0, 1).validate().is_err());
        let sub = ChainConfig {
            kind: ChainKind::TulaSubsampled,
            ..ChainConfig::tula(1.0, 0.1, 10, 1)
        };
        assert!(sub.validate().is_err());
        let m = StandardGaussian::new(2);
        let sub = ChainConfig {
            n_s: Some(3),
            ..sub
        };
        assert!(matches!(run_chain(&sub, &m), Err(Error::Config(_))));
    }

    #[test]
    fn points_csv_round_trip() {
        let pts = vec![vec![0.1, -2.5], vec![1e-300, 3.0]];
        let mut buf = Vec::new();
        write_points_csv(&pts, &mut buf).unwrap();
        assert_eq!(read_points_csv(buf.as_slice()).unwrap(), pts);
    }
}
