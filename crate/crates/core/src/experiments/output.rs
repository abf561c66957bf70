use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use crate::error::Result;

/// One `(n, kernel, method, seed)` measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub kernel: String,
    pub method: String,
    pub n: usize,
    pub ksd: f64,
    pub mmd: Option<f64>,
    pub qp_iterations: Option<usize>,
    pub kkt_residual: Option<f64>,
    pub qp_status: Option<String>,
}

impl ResultRow {
    fn key(&self) -> (usize, &str, &str, u64) {
        (self.n, &self.kernel, &self.method, self.seed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedTiming {
    pub seed: u64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub rows: Vec<ResultRow>,
    pub timings: Vec<SeedTiming>,
    /// Seeds that failed, with the error message. Their rows are absent.
    pub failures: Vec<(u64, String)>,
}

impl RunResult {
    pub(crate) fn merge(per_seed: Vec<(u64, f64, Result<Vec<ResultRow>>)>) -> Self {
        let mut out = RunResult::default();
        for (seed, seconds, res) in per_seed {
            out.timings.push(SeedTiming { seed, seconds });
            match res {
                Ok(rows) => out.rows.extend(rows),
                Err(e) => out.failures.push((seed, e.to_string())),
            }
        }
        out.rows.sort_by(|a, b| a.key().cmp(&b.key()));
        out.timings.sort_by_key(|t| t.seed);
        out.failures.sort();
        out
    }

    /// Rows for one kernel and method, as `n → values over seeds`.
    pub fn select(&self, kernel: &str, method: &str) -> BTreeMap<usize, Vec<&ResultRow>> {
        let mut out: BTreeMap<usize, Vec<&ResultRow>> = BTreeMap::new();
        for r in self
            .rows
            .iter()
            .filter(|r| r.kernel == kernel && r.method == method)
        {
            out.entry(r.n).or_default().push(r);
        }
        out
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Median over seeds of `field` for each ladder entry.
pub fn median_by_n(
    result: &RunResult,
    kernel: &str,
    method: &str,
    field: impl Fn(&ResultRow) -> f64,
) -> Vec<(usize, f64)> {
    result
        .select(kernel, method)
        .into_iter()
        .map(|(n, rows)| (n, median(rows.into_iter().map(&field).collect())))
        .collect()
}

/// Runs the experiment named by the config.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunResult> {
    config.validate()?;
    match config.experiment {
        ExperimentKind::Gaussian20d => super::run_gaussian_experiment(config),
        ExperimentKind::Logistic => super::run_logistic_experiment(config),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub rows: usize,
    pub timings: Vec<SeedTiming>,
    pub failures: Vec<(u64, String)>,
    /// How ladder points relate to the chains.
    pub chain_layout: String,
}

/// Writes `results.csv` (deterministic) and `manifest.json` (includes wall
/// times) into `dir`.
pub fn write_outputs(result: &RunResult, config: &ExperimentConfig, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut wr = csv::Writer::from_path(dir.join("results.csv"))?;
    for row in &result.rows {
        wr.serialize(row)?;
    }
    wr.flush()?;
    let manifest = Manifest {
        tool: format!("steinis {}", env!("CARGO_PKG_VERSION")),
        config_hash: config.hash(),
        config: config.clone(),
        rows: result.rows.len(),
        timings: result.timings.clone(),
        failures: result.failures.clone(),
        chain_layout: "one chain of max(ladder) steps per seed; each ladder point uses its prefix"
            .into(),
    };
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}
