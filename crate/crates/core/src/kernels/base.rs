use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

fn default_one() -> f64 {
    1.0
}

/// Radial basis kernel `k(x, y) = κ(‖x − y‖²)` with a completely monotone `κ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum BaseKernel {
    /// Inverse multiquadric `κ(s) = (α + s)^(−β)`.
    Imq { alpha: f64, beta: f64 },
    /// Gaussian `κ(s) = exp(−α s)`; `α` is the inverse squared bandwidth.
    Gaussian {
        #[serde(default = "default_one")]
        alpha: f64,
    },
    /// Inverse-log `κ(s) = 1 / (α + log(1 + s))`.
    InverseLog { alpha: f64 },
}

/// `κ`, `κ'` and `κ''` at one argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Profile {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Derivatives of `k` at `(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseDerivatives {
    pub grad_x: Vec<f64>,
    pub grad_y: Vec<f64>,
    /// `∇_x · ∇_y k(x, y)`.
    pub cross_div: f64,
}

impl BaseKernel {
    pub fn imq(alpha: f64, beta: f64) -> Self {
        BaseKernel::Imq { alpha, beta }
    }

    pub fn gaussian(alpha: f64) -> Self {
        BaseKernel::Gaussian { alpha }
    }

    pub fn inverse_log(alpha: f64) -> Self {
        BaseKernel::InverseLog { alpha }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            BaseKernel::Imq { alpha, beta } => alpha > 0.0 && beta > 0.0,
            BaseKernel::Gaussian { alpha } | BaseKernel::InverseLog { alpha } => alpha > 0.0,
        };
        let finite = match *self {
            BaseKernel::Imq { alpha, beta } => alpha.is_finite() && beta.is_finite(),
            BaseKernel::Gaussian { alpha } | BaseKernel::InverseLog { alpha } => alpha.is_finite(),
        };
        if ok && finite {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "invalid base kernel parameters: {self:?}"
            )))
        }
    }

    pub fn id(&self) -> String {
        match *self {
            BaseKernel::Imq { alpha, beta } => format!("imq(alpha={alpha},beta={beta})"),
            BaseKernel::Gaussian { alpha } => format!("gaussian(alpha={alpha})"),
            BaseKernel::InverseLog { alpha } => format!("inverse-log(alpha={alpha})"),
        }
    }

    #[inline]
    pub fn kappa(&self, s: f64) -> f64 {
        self.profile(s).value
    }

    /// `κ(s)`, `κ'(s)`, `κ''(s)` for `s ≥ 0`.
    #[inline]
    pub fn profile(&self, s: f64) -> Profile {
        match *self {
            BaseKernel::Imq { alpha, beta } => {
                let u = alpha + s;
                let value = u.powf(-beta);
                Profile {
                    value,
                    d1: -beta * value / u,
                    d2: beta * (beta + 1.0) * value / (u * u),
                }
            }
            BaseKernel::Gaussian { alpha } => {
                let value = (-alpha * s).exp();
                Profile {
                    value,
                    d1: -alpha * value,
                    d2: alpha * alpha * value,
                }
            }
            BaseKernel::InverseLog { alpha } => {
                let t = 1.0 + s;
                let u = alpha + s.ln_1p();
                let value = 1.0 / u;
                Profile {
                    value,
                    d1: -1.0 / (u * u * t),
                    d2: (2.0 + u) / (u * u * u * t * t),
                }
            }
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_len("base kernel argument", y.len(), x.len())?;
        Ok(self.kappa(sq_dist(x, y)))
    }

    pub fn derivatives(&self, x: &[f64], y: &[f64]) -> Result<BaseDerivatives> {
        check_len("base kernel argument", y.len(), x.len())?;
        let r2 = sq_dist(x, y);
        let p = self.profile(r2);
        let grad_x: Vec<f64> = x.iter().zip(y).map(|(a, b)| 2.0 * p.d1 * (a - b)).collect();
        let grad_y = grad_x.iter().map(|g| -g).collect();
        let cross_div = -2.0 * x.len() as f64 * p.d1 - 4.0 * r2 * p.d2;
        Ok(BaseDerivatives {
            grad_x,
            grad_y,
            cross_div,
        })
    }
}

#[inline]
pub(crate) fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}
