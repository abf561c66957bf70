use std::io::Read;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, Stream};

/// Binary-response regression data: feature rows `a_i` and labels `b_i ∈ {0, 1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    dim: usize,
    features: Vec<f64>,
    labels: Vec<f64>,
}

/// Preprocessing applied at ingestion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetOptions {
    /// Center each feature column and scale it to unit (population) variance.
    pub standardize: bool,
    /// Append a constant-one intercept column after standardization.
    pub intercept: bool,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        DatasetOptions {
            standardize: true,
            intercept: true,
        }
    }
}

impl DatasetOptions {
    pub fn raw() -> Self {
        DatasetOptions {
            standardize: false,
            intercept: false,
        }
    }
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Input("dataset has no rows".into()));
        }
        if rows.len() != labels.len() {
            return Err(Error::Input(format!(
                "{} feature rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(Error::Input("dataset has no feature columns".into()));
        }
        let mut features = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::Input(format!(
                    "row {i} has {} features, expected {dim}",
                    r.len()
                )));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::Input(format!("row {i} has a non-finite feature")));
            }
            features.extend_from_slice(r);
        }
        if let Some((i, b)) = labels
            .iter()
            .enumerate()
            .find(|(_, b)| **b != 0.0 && **b != 1.0)
        {
            return Err(Error::Input(format!("label {b} at row {i} is not 0 or 1")));
        }
        Ok(Dataset {
            dim,
            features,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn preprocess(&self, opts: DatasetOptions) -> Dataset {
        let n = self.len();
        let mut cols: Vec<Vec<f64>> = (0..self.dim)
            .map(|k| (0..n).map(|i| self.row(i)[k]).collect())
            .collect();
        if opts.standardize {
            for col in cols.iter_mut() {
                let mean = col.iter().sum::<f64>() / n as f64;
                let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
                let sd = var.sqrt();
                for v in col.iter_mut() {
                    *v -= mean;
                    if sd > 0.0 {
                        *v /= sd;
                    }
                }
            }
        }
        if opts.intercept {
            cols.push(vec![1.0; n]);
        }
        let dim = cols.len();
        let mut features = Vec::with_capacity(n * dim);
        for i in 0..n {
            features.extend(cols.iter().map(|c| c[i]));
        }
        Dataset {
            dim,
            features,
            labels: self.labels.clone(),
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (1..=self.dim).map(|k| format!("x{k}")).collect();
        header.push("label".into());
        wr.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec: Vec<String> = self.row(i).iter().map(|v| format!("{v:?}")).collect();
            rec.push(format!("{}", self.labels[i] as u8));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Reads a CSV dataset (last column the label) and applies `opts`.
pub fn load_dataset(path: impl AsRef<Path>, opts: DatasetOptions) -> Result<Dataset> {
    let file = std::fs::File::open(path.as_ref())?;
    parse_dataset(file, opts)
}

pub fn parse_dataset<R: Read>(reader: R, opts: DatasetOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    let mut raw_labels = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(idx + 1);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if rows.is_empty() && idx == 0 => continue,
            Err(e) => {
                return Err(Error::Parse {
                    line,
                    message: e.to_string(),
                })
            }
        };
        if values.len() < 2 {
            return Err(Error::Parse {
                line,
                message: "need at least one feature and a label".into(),
            });
        }
        if let Some(first) = rows.first().map(|r: &Vec<f64>| r.len()) {
            if values.len() - 1 != first {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} columns, got {}", first + 1, values.len()),
                });
            }
        }
        let (label, feats) = values.split_last().unwrap();
        raw_labels.push((line, *label));
        rows.push(feats.to_vec());
    }
    if rows.is_empty() {
        return Err(Error::Input("dataset has no data rows".into()));
    }
    let signed = raw_labels.iter().any(|(_, b)| *b == -1.0);
    let mut labels = Vec::with_capacity(raw_labels.len());
    for (line, b) in raw_labels {
        let mapped = match (signed, b) {
            (false, b) if b == 0.0 || b == 1.0 => b,
            (true, -1.0) => 0.0,
            (true, 1.0) => 1.0,
            _ => return Err(Error::Input(format!("non-binary label {b} at line {line}"))),
        };
        labels.push(mapped);
    }
    Ok(Dataset::new(rows, labels)?.preprocess(opts))
}

/// Synthetic logistic-regression data: standard normal features, a standard
/// normal coefficient vector, and Bernoulli labels. Returned unprocessed.
pub fn generate_synthetic(n_data: usize, dim: usize, seed: u64) -> Result<Dataset> {
    if n_data == 0 || dim == 0 {
        return Err(Error::Contract(
            "synthetic data needs n_data >= 1 and dim >= 1".into(),
        ));
    }
    let mut rng = stream(seed, Stream::Data);
    let beta: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let mut rows = Vec::with_capacity(n_data);
    let mut labels = Vec::with_capacity(n_data);
    for _ in 0..n_data {
        let a: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let t: f64 = a.iter().zip(&beta).map(|(x, y)| x * y).sum();
        let p = super::continuous::sigmoid(t);
        labels.push(if rng.random::<f64>() < p { 1.0 } else { 0.0 });
        rows.push(a);
    }
    Dataset::new(rows, labels)
}
