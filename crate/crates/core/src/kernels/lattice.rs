use serde::{Deserialize, Serialize};

use super::base::BaseKernel;
use crate::error::{Error, Result};
use crate::gram::GramSource;
use crate::targets::{LatticePoint, LatticeTarget};

/// How the lattice Stein kernel is written.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeForm {
    /// Uses only `r_i(x) = π(x − e_i)/π(x)` and support indicators.
    #[default]
    Ratio,
    /// Uses neighbouring masses `π(x ± e_i)` directly; needs
    /// [`LatticeTarget::mass`]. Loses precision when `π` decays quickly.
    Mass,
}

/// Base kernel on Z^d.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeBase {
    Plain(BaseKernel),
    /// `k(x, y) / (π⁺(x) π⁺(y))` with `π⁺(x) = π(x) + 1{π(x) = 0}`.
    MassScaled(BaseKernel),
}

/// Stein kernel on Z^d for the birth–death operator with rates
/// `π(x + e_i)` and `π(x − e_i)` along each axis.
pub struct LatticeStein<'t, T: ?Sized> {
    base: LatticeBase,
    target: &'t T,
    form: LatticeForm,
}

fn shifted(x: &[i64], axis: usize, by: i64) -> LatticePoint {
    let mut p = x.to_vec();
    p[axis] += by;
    p
}

impl<'t, T: LatticeTarget + ?Sized> LatticeStein<'t, T> {
    pub fn new(base: BaseKernel, target: &'t T) -> Result<Self> {
        base.validate()?;
        Ok(LatticeStein {
            base: LatticeBase::Plain(base),
            target,
            form: LatticeForm::Ratio,
        })
    }

    pub fn with_form(base: LatticeBase, target: &'t T, form: LatticeForm) -> Result<Self> {
        let (LatticeBase::Plain(b) | LatticeBase::MassScaled(b)) = base;
        b.validate()?;
        let needs_mass = form == LatticeForm::Mass || matches!(base, LatticeBase::MassScaled(_));
        if needs_mass && target.mass(&vec![0; target.dim()]).is_none() {
            return Err(Error::Contract(
                "this kernel form needs a target that exposes masses".into(),
            ));
        }
        Ok(LatticeStein { base, target, form })
    }

    fn mass_plus(&self, x: &[i64]) -> f64 {
        let m = if self.target.in_support(x) {
            self.target.mass(x).unwrap_or(0.0)
        } else {
            0.0
        };
        if m == 0.0 {
            1.0
        } else {
            m
        }
    }

    fn mass(&self, x: &[i64]) -> f64 {
        if self.target.in_support(x) {
            self.target.mass(x).unwrap_or(0.0)
        } else {
            0.0
        }
    }

    fn k(&self, x: &[i64], y: &[i64]) -> f64 {
        let s: f64 = x.iter().zip(y).map(|(a, b)| ((a - b) as f64).powi(2)).sum();
        match self.base {
            LatticeBase::Plain(b) => b.kappa(s),
            LatticeBase::MassScaled(b) => b.kappa(s) / (self.mass_plus(x) * self.mass_plus(y)),
        }
    }

    pub fn eval(&self, x: &[i64], y: &[i64]) -> Result<f64> {
        for p in [x, y] {
            if p.len() != self.target.dim() {
                return Err(Error::Contract(format!(
                    "lattice point {p:?} has wrong dimension"
                )));
            }
            if !self.target.in_support(p) {
                return Err(Error::Domain(format!("{p:?} is outside the support")));
            }
        }
        Ok(self.eval_unchecked(x, y))
    }

    pub(crate) fn eval_unchecked(&self, x: &[i64], y: &[i64]) -> f64 {
        match self.form {
            LatticeForm::Ratio => self.eval_ratio(x, y),
            LatticeForm::Mass => self.eval_mass(x, y),
        }
    }

    fn eval_ratio(&self, x: &[i64], y: &[i64]) -> f64 {
        let mut total = 0.0;
        for i in 0..x.len() {
            let (xu, yu) = (shifted(x, i, 1), shifted(y, i, 1));
            let iota_x = self.target.in_support(&xu);
            let iota_y = self.target.in_support(&yu);
            let rx = self.target.ratio(x, i);
            let ry = self.target.ratio(y, i);
            // zero-indicator terms are skipped rather than multiplied out
            if iota_x && iota_y {
                total += self.k(&xu, &yu);
            }
            if iota_y && rx != 0.0 {
                total -= rx * self.k(x, &yu);
            }
            if iota_x && ry != 0.0 {
                total -= ry * self.k(&xu, y);
            }
            if rx != 0.0 && ry != 0.0 {
                total += rx * ry * self.k(x, y);
            }
        }
        total
    }

    fn eval_mass(&self, x: &[i64], y: &[i64]) -> f64 {
        let mut total = 0.0;
        for i in 0..x.len() {
            let (xu, yu) = (shifted(x, i, 1), shifted(y, i, 1));
            let (xd, yd) = (shifted(x, i, -1), shifted(y, i, -1));
            let (up_x, up_y) = (self.mass(&xu), self.mass(&yu));
            let (dn_x, dn_y) = (self.mass(&xd), self.mass(&yd));
            total += up_x * up_y * self.k(&xu, &yu)
                - dn_x * up_y * self.k(x, &yu)
                - up_x * dn_y * self.k(&xu, y)
                + dn_x * dn_y * self.k(x, y);
        }
        total
    }
}

/// Lattice samples paired with a lattice Stein kernel, for Gram assembly.
pub struct LatticeSamples<'a, T: ?Sized> {
    kernel: LatticeStein<'a, T>,
    points: &'a [LatticePoint],
}

impl<'a, T: LatticeTarget + ?Sized> LatticeSamples<'a, T> {
    pub fn new(kernel: LatticeStein<'a, T>, points: &'a [LatticePoint]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Contract("need at least one sample".into()));
        }
        for p in points {
            if p.len() != kernel.target.dim() {
                return Err(Error::Contract(format!(
                    "lattice point {p:?} has wrong dimension"
                )));
            }
            if !kernel.target.in_support(p) {
                return Err(Error::Domain(format!("{p:?} is outside the support")));
            }
        }
        Ok(LatticeSamples { kernel, points })
    }
}

impl<T: LatticeTarget + ?Sized> GramSource for LatticeSamples<'_, T> {
    fn len(&self) -> usize {
        self.points.len()
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        self.kernel.eval_unchecked(&self.points[i], &self.points[j])
    }

    fn provenance(&self) -> String {
        format!("lattice/{:?}/{:?}", self.kernel.form, self.kernel.base).to_lowercase()
    }
}
