use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub type LatticePoint = Vec<i64>;

/// A mass function on Z^d known through ratios `r_i(x) = π(x − e_i)/π(x)`.
pub trait LatticeTarget: Send + Sync {
    fn dim(&self) -> usize;

    fn in_support(&self, x: &[i64]) -> bool;

    /// `π(x − e_i)/π(x)` for `x` in the support; 0 when `x − e_i` is not.
    fn ratio(&self, x: &[i64], axis: usize) -> f64;

    /// Unnormalized mass, if the target can provide it.
    fn mass(&self, _x: &[i64]) -> Option<f64> {
        None
    }
}

/// Checked access to [`LatticeTarget::ratio`].
pub fn discrete_ratio<T: LatticeTarget + ?Sized>(
    target: &T,
    x: &[i64],
    axis: usize,
) -> Result<f64> {
    if x.len() != target.dim() || axis >= target.dim() {
        return Err(Error::Contract(format!(
            "lattice point of length {} / axis {axis} for a {}-dimensional target",
            x.len(),
            target.dim()
        )));
    }
    if !target.in_support(x) {
        return Err(Error::Domain(format!("{x:?} is outside the support")));
    }
    Ok(target.ratio(x, axis))
}

/// Independent Poisson coordinates with the given rates.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductPoisson {
    rates: Vec<f64>,
}

impl ProductPoisson {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() || rates.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::Contract(
                "Poisson rates must be positive and finite".into(),
            ));
        }
        Ok(ProductPoisson { rates })
    }

    pub fn univariate(rate: f64) -> Result<Self> {
        Self::new(vec![rate])
    }
}

impl LatticeTarget for ProductPoisson {
    fn dim(&self) -> usize {
        self.rates.len()
    }

    fn in_support(&self, x: &[i64]) -> bool {
        x.len() == self.rates.len() && x.iter().all(|&v| v >= 0)
    }

    fn ratio(&self, x: &[i64], axis: usize) -> f64 {
        // π(k−1)/π(k) = k/λ, and π(−1) = 0.
        let k = x[axis];
        if k <= 0 {
            0.0
        } else {
            k as f64 / self.rates[axis]
        }
    }

    fn mass(&self, x: &[i64]) -> Option<f64> {
        if !self.in_support(x) {
            return Some(0.0);
        }
        let mut log_mass = 0.0;
        for (&k, &rate) in x.iter().zip(&self.rates) {
            log_mass += k as f64 * rate.ln() - (1..=k).map(|j| (j as f64).ln()).sum::<f64>() - rate;
        }
        Some(log_mass.exp())
    }
}

/// Finite support given by an explicit table of unnormalized masses.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedLattice {
    dim: usize,
    masses: BTreeMap<LatticePoint, f64>,
}

impl TabulatedLattice {
    pub fn new(entries: impl IntoIterator<Item = (LatticePoint, f64)>) -> Result<Self> {
        let mut masses = BTreeMap::new();
        let mut dim = None;
        for (p, m) in entries {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::Contract(format!(
                    "mass at {p:?} must be positive and finite"
                )));
            }
            match dim {
                None => dim = Some(p.len()),
                Some(d) if d != p.len() => {
                    return Err(Error::Contract(
                        "support points have mixed dimension".into(),
                    ))
                }
                _ => {}
            }
            masses.insert(p, m);
        }
        let dim = dim.ok_or_else(|| Error::Contract("empty support".into()))?;
        Ok(TabulatedLattice { dim, masses })
    }
}

impl LatticeTarget for TabulatedLattice {
    fn dim(&self) -> usize {
        self.dim
    }

    fn in_support(&self, x: &[i64]) -> bool {
        self.masses.contains_key(x)
    }

    fn ratio(&self, x: &[i64], axis: usize) -> f64 {
        let mut prev = x.to_vec();
        prev[axis] -= 1;
        match (self.masses.get(&prev), self.masses.get(x)) {
            (Some(a), Some(b)) => a / b,
            _ => 0.0,
        }
    }

    fn mass(&self, x: &[i64]) -> Option<f64> {
        Some(self.masses.get(x).copied().unwrap_or(0.0))
    }
}

/// Positive unnormalized masses on the vertices `0..n` of a finite graph.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphTarget {
    masses: Vec<f64>,
}

impl GraphTarget {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() || masses.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::Contract(
                "graph masses must be positive and finite".into(),
            ));
        }
        Ok(GraphTarget { masses })
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// `π(y)/π(x)`.
    pub fn ratio(&self, x: usize, y: usize) -> Result<f64> {
        let n = self.masses.len();
        if x >= n || y >= n {
            return Err(Error::Domain(format!(
                "vertex pair ({x}, {y}) not in 0..{n}"
            )));
        }
        Ok(if x == y {
            1.0
        } else {
            self.masses[y] / self.masses[x]
        })
    }
}
