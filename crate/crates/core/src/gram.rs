//! Gram matrices, KSD and MMD.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::weights::WeightVector;

/// Quadratic forms within this distance below zero are reported as zero.
pub const CLAMP_TOL: f64 = 1e-10;

/// Anything that can produce Stein-kernel Gram entries by sample index.
pub trait GramSource: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `k^{ij}(X_i, X_j)`. Must be a pure function of `(i, j)`.
    fn entry(&self, i: usize, j: usize) -> f64;

    fn provenance(&self) -> String;
}

/// Dense symmetric Gram matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    n: usize,
    entries: Vec<f64>,
    provenance: String,
}

/// Computes the upper triangle in parallel and mirrors it.
pub fn assemble_gram<S: GramSource + ?Sized>(source: &S) -> Result<GramMatrix> {
    let n = source.len();
    if n == 0 {
        return Err(Error::Contract(
            "cannot assemble a Gram matrix of zero samples".into(),
        ));
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| source.entry(i, j)).collect())
        .collect();
    let mut entries = vec![0.0; n * n];
    for (i, row) in rows.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            let j = i + off;
            if !v.is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite kernel value {v} at ({i}, {j})"
                )));
            }
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    Ok(GramMatrix {
        n,
        entries,
        provenance: source.provenance(),
    })
}

impl GramMatrix {
    /// Wraps explicit entries; they must be finite and symmetric to round-off.
    pub fn from_entries(
        n: usize,
        entries: Vec<f64>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Contract("Gram matrix must be at least 1x1".into()));
        }
        check_len("Gram entries", entries.len(), n * n)?;
        for i in 0..n {
            for j in i..n {
                let (a, b) = (entries[i * n + j], entries[j * n + i]);
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::Input(format!("non-finite Gram entry at ({i}, {j})")));
                }
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::Input(format!(
                        "Gram matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(GramMatrix {
            n,
            entries,
            provenance: provenance.into(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Leading `m × m` block: the Gram matrix of the first `m` samples.
    pub fn leading(&self, m: usize) -> Result<GramMatrix> {
        if m == 0 || m > self.n {
            return Err(Error::Contract(format!(
                "leading block {m} of a {}x{} matrix",
                self.n, self.n
            )));
        }
        let mut entries = Vec::with_capacity(m * m);
        for i in 0..m {
            entries.extend_from_slice(&self.row(i)[..m]);
        }
        Ok(GramMatrix {
            n: m,
            entries,
            provenance: self.provenance.clone(),
        })
    }

    /// `K w` with a fixed row-major summation order.
    pub fn matvec(&self, w: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(w).map(|(a, b)| a * b).sum();
        }
    }

    /// Raw `wᵀ K w`, no clamping.
    pub fn quad_form(&self, w: &[f64]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n {
            if w[i] == 0.0 {
                continue;
            }
            let r: f64 = self.row(i).iter().zip(w).map(|(a, b)| a * b).sum();
            total += w[i] * r;
        }
        total
    }

    pub fn min_eigenvalue(&self) -> f64 {
        symmetric_min_eigenvalue(self.n, &self.entries)
    }

    /// CSV export: a `# n=<n> provenance=<...>` comment line, then one row
    /// per matrix row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# n={} provenance={}", self.n, self.provenance)?;
        for i in 0..self.n {
            let line: Vec<String> = self.row(i).iter().map(|v| format!("{v:?}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Binary export: magic `SGRM`, `u64` n, `u64` provenance length, the
    /// UTF-8 provenance, then n² little-endian `f64`s row-major.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"SGRM")?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&(self.provenance.len() as u64).to_le_bytes())?;
        w.write_all(self.provenance.as_bytes())?;
        for v in &self.entries {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"SGRM" {
            return Err(Error::Input("not a Gram matrix file".into()));
        }
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let n = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let plen = u64::from_le_bytes(word) as usize;
        let mut prov = vec![0u8; plen];
        r.read_exact(&mut prov)?;
        let provenance =
            String::from_utf8(prov).map_err(|e| Error::Input(format!("bad provenance: {e}")))?;
        let mut entries = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            r.read_exact(&mut word)?;
            entries.push(f64::from_le_bytes(word));
        }
        GramMatrix::from_entries(n, entries, provenance)
    }
}

pub(crate) fn symmetric_min_eigenvalue(n: usize, entries: &[f64]) -> f64 {
    let m = nalgebra::DMatrix::from_row_slice(n, n, entries);
    m.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn clamp_quadratic(value: f64, scale: f64, what: &str) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -CLAMP_TOL * scale.max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::Numerical(format!(
            "{what} is negative ({value}); kernel matrix is not PSD"
        )))
    }
}

/// Squared KSD `wᵀ K w` of the weighted empirical measure.
///
/// Round-off below zero is clamped, with the threshold scaled by the mean
/// diagonal entry when that exceeds one.
pub fn ksd_squared(gram: &GramMatrix, w: &WeightVector) -> Result<f64> {
    check_len("weights", w.len(), gram.n())?;
    let scale = gram.trace().abs() / gram.n() as f64;
    clamp_quadratic(gram.quad_form(w.as_slice()), scale, "KSD²")
}

/// Squared MMD between the weighted sample and N(0, I_d) under the kernel
/// `exp(−γ‖x − y‖²)`. Both reference expectations are in closed form:
///
/// `E_Y k(x, Y) = (1 + 2γ)^(−d/2) exp(−γ‖x‖²/(1 + 2γ))`,
/// `E k(Y, Y') = (1 + 4γ)^(−d/2)`.
pub fn mmd_squared_gaussian_ref(points: &[Vec<f64>], w: &WeightVector, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Contract(format!(
            "MMD bandwidth must be positive, got {gamma}"
        )));
    }
    check_len("weights", w.len(), points.len())?;
    let d = points.first().map(Vec::len).unwrap_or(0);
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::Contract("points have mixed dimension".into()));
    }
    let w = w.as_slice();
    let mut sample_term = 0.0;
    for (i, x) in points.iter().enumerate() {
        if w[i] == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for (j, y) in points.iter().enumerate() {
            if w[j] != 0.0 {
                let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                row += w[j] * (-gamma * r2).exp();
            }
        }
        sample_term += w[i] * row;
    }
    let cross: f64 = points
        .iter()
        .zip(w)
        .map(|(x, wi)| wi * gaussian_ref_embedding(x, gamma))
        .sum();
    let value = sample_term - 2.0 * cross + gaussian_ref_self_term(d, gamma);
    clamp_quadratic(value, 1.0, "MMD²")
}

/// `E_{Y ~ N(0, I)} exp(−γ‖x − Y‖²)`.
pub fn gaussian_ref_embedding(x: &[f64], gamma: f64) -> f64 {
    let d = x.len() as f64;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    (1.0 + 2.0 * gamma).powf(-d / 2.0) * (-gamma * r2 / (1.0 + 2.0 * gamma)).exp()
}

/// `E_{Y, Y' ~ N(0, I)} exp(−γ‖Y − Y'‖²)`.
pub fn gaussian_ref_self_term(d: usize, gamma: f64) -> f64 {
    (1.0 + 4.0 * gamma).powf(-(d as f64) / 2.0)
}
