//! `min wᵀKw` over the probability simplex.
//!
//! Accelerated projected gradient (FISTA with function-value restart) from the
//! uniform point, interleaved with a primal active-set polish: once the
//! gradient iterates have settled on a support, the equality-constrained
//! problem on that face is solved exactly by Cholesky and indices are added or
//! dropped until the KKT conditions hold. Every accepted step is
//! non-increasing in the objective.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::GramMatrix;
use crate::weights::WeightVector;

const CHECK_EVERY: usize = 10;
const FINAL_POLISH_MAX: usize = 2048;
const ROUNDOFF: f64 = 16.0 * f64::EPSILON;
const POLISH_EVERY: usize = 100;
const JITTER_BASE: f64 = 1e-10;
const JITTER_DECADES: i32 = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QpSettings {
    /// Absolute KKT residual tolerance, floored at the rounding level of `Kw`.
    pub tol: f64,
    /// Iteration budget; `None` means `50 n + 10000`.
    pub max_iter: Option<usize>,
    /// Initial ridge added to K. Escalates automatically when a face
    /// subproblem is not positive definite.
    pub jitter: f64,
    /// Keep the objective after every accepted step.
    pub record_trace: bool,
}

impl Default for QpSettings {
    fn default() -> Self {
        QpSettings {
            tol: 1e-8,
            max_iter: None,
            jitter: 0.0,
            record_trace: false,
        }
    }
}

impl QpSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!(
                "QP tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == Some(0) {
            return Err(Error::Config("QP max_iter must be >= 1".into()));
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return Err(Error::Config(format!(
                "QP jitter must be >= 0, got {}",
                self.jitter
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QpStatus {
    Converged,
    MaxIter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QpSolution {
    pub weights: WeightVector,
    /// `wᵀKw` on the unjittered matrix.
    pub objective: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub status: QpStatus,
    /// Ridge in effect at termination.
    pub jitter: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub trace: Vec<f64>,
}

/// Euclidean projection onto the probability simplex (sorted-threshold rule).
pub fn project_simplex(v: &[f64]) -> Result<WeightVector> {
    if v.is_empty() {
        return Err(Error::Contract("cannot project an empty vector".into()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Contract("projection input must be finite".into()));
    }
    let mut out = vec![0.0; v.len()];
    project_into(v, &mut out, &mut Vec::with_capacity(v.len()));
    Ok(WeightVector::from_feasible(out))
}

fn project_into(v: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) {
    scratch.clear();
    scratch.extend_from_slice(v);
    scratch.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in scratch.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    for (o, &x) in out.iter_mut().zip(v) {
        *o = (x - theta).max(0.0);
    }
}

/// KKT residual of the simplex QP at `w`:
///
/// `max(0, max_{w_i>0} g_i − min_i g_i) + |Σw − 1| + max(0, −min_i w_i)`
///
/// with `g = 2Kw`. Zero exactly at optimal feasible points.
pub fn kkt_residual(k: &GramMatrix, w: &[f64]) -> Result<f64> {
    if w.len() != k.n() {
        return Err(Error::Contract(format!(
            "weights of length {} for a {}x{} matrix",
            w.len(),
            k.n(),
            k.n()
        )));
    }
    let mut kw = vec![0.0; w.len()];
    k.matvec(w, &mut kw);
    Ok(residual_from_product(w, &kw, 0.0))
}

fn residual_from_product(w: &[f64], kw: &[f64], jitter: f64) -> f64 {
    let mut min_g = f64::INFINITY;
    let mut max_support_g = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut min_w = f64::INFINITY;
    for (&wi, &kwi) in w.iter().zip(kw) {
        let g = 2.0 * (kwi + jitter * wi);
        min_g = min_g.min(g);
        if wi > 0.0 {
            max_support_g = max_support_g.max(g);
        }
        sum += wi;
        min_w = min_w.min(wi);
    }
    let gap = if max_support_g.is_finite() {
        (max_support_g - min_g).max(0.0)
    } else {
        0.0
    };
    gap + (sum - 1.0).abs() + (-min_w).max(0.0)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `wᵀ(K + εI)w` given `Kw`.
fn objective(w: &[f64], kw: &[f64], jitter: f64) -> f64 {
    dot(w, kw) + jitter * dot(w, w)
}

/// `src − ∇f(src)/lip` with `∇f = 2(K + εI)src`.
fn gradient_point(src: &[f64], ksrc: &[f64], jitter: f64, lip: f64, dst: &mut [f64]) {
    for ((d, s), ks) in dst.iter_mut().zip(src).zip(ksrc) {
        *d = s - 2.0 * (ks + jitter * s) / lip;
    }
}

fn max_abs_row_sum(k: &GramMatrix) -> f64 {
    (0..k.n())
        .map(|i| k.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn power_estimate(k: &GramMatrix) -> f64 {
    let n = k.n();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 / n as f64)).collect();
    let mut kv = vec![0.0; n];
    let mut est = 0.0;
    for _ in 0..30 {
        let norm = dot(&v, &v).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        for x in v.iter_mut() {
            *x /= norm;
        }
        k.matvec(&v, &mut kv);
        est = dot(&v, &kv).abs();
        std::mem::swap(&mut v, &mut kv);
    }
    est
}

enum Polish {
    Improved(Vec<f64>),
    NotPositiveDefinite,
    NoProgress,
}

/// Primal active-set iterations started from the feasible point `x`.
fn face_scale(sub: &DMatrix<f64>) -> f64 {
    let s = sub.nrows().max(1);
    (sub.trace().abs() / s as f64).max(f64::MIN_POSITIVE)
}

fn active_set_polish(
    k: &GramMatrix,
    jitter: f64,
    x: &[f64],
    add_tol: f64,
    max_steps: usize,
) -> Polish {
    let n = k.n();
    let mut x = x.to_vec();
    let mut support: Vec<usize> = (0..n).filter(|&i| x[i] > 0.0).collect();
    let mut kx = vec![0.0; n];
    for _ in 0..max_steps {
        let s = support.len();
        let mut sub = DMatrix::<f64>::zeros(s, s);
        for (a, &i) in support.iter().enumerate() {
            let row = k.row(i);
            for (b, &j) in support.iter().enumerate() {
                sub[(a, b)] = row[j];
            }
            sub[(a, a)] += jitter;
        }
        // singular PSD faces are common (rank-deficient Grams); a round-off
        // sized ridge only steers the face step, the objective is unchanged
        let ridge = (ROUNDOFF * s as f64).max(1e-12) * face_scale(&sub);
        let chol = match sub.clone().cholesky() {
            Some(c) => c,
            None => {
                for a in 0..s {
                    sub[(a, a)] += ridge;
                }
                match sub.cholesky() {
                    Some(c) => c,
                    None => return Polish::NotPositiveDefinite,
                }
            }
        };
        let v = chol.solve(&DVector::from_element(s, 1.0));
        let denom: f64 = v.iter().sum();
        if !(denom > 0.0 && denom.is_finite()) {
            return Polish::NotPositiveDefinite;
        }
        let target: Vec<f64> = v.iter().map(|vi| vi / denom).collect();
        if target.iter().all(|&p| p > 0.0) {
            for xi in x.iter_mut() {
                *xi = 0.0;
            }
            for (&i, &p) in support.iter().zip(&target) {
                x[i] = p;
            }
            k.matvec(&x, &mut kx);
            let mu = 2.0 * (support.iter().map(|&i| kx[i] + jitter * x[i]).sum::<f64>() / s as f64);
            let entering = (0..n)
                .filter(|&i| x[i] == 0.0)
                .map(|i| (i, 2.0 * kx[i]))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match entering {
                Some((j, gj)) if gj < mu - add_tol => {
                    support.push(j);
                    support.sort_unstable();
                }
                _ => return Polish::Improved(x),
            }
        } else {
            // move toward the face minimizer until the first weight hits zero
            let mut step = 1.0;
            for (&i, &p) in support.iter().zip(&target) {
                if p <= 0.0 {
                    step = f64::min(step, x[i] / (x[i] - p));
                }
            }
            for (&i, &p) in support.iter().zip(&target) {
                x[i] += step * (p - x[i]);
            }
            let before = support.len();
            let drop_below = 1e-15 / s as f64;
            support.retain(|&i| x[i] > drop_below);
            let mut keep = vec![false; n];
            for &i in &support {
                keep[i] = true;
            }
            for (xi, kept) in x.iter_mut().zip(keep) {
                if !kept {
                    *xi = 0.0;
                }
            }
            if support.is_empty() || support.len() == before {
                return Polish::NoProgress;
            }
            let total: f64 = support.iter().map(|&i| x[i]).sum();
            for &i in &support {
                x[i] /= total;
            }
        }
    }
    Polish::NoProgress
}

/// `candidate ≤ current` up to a few ulps; an exact face solve can round
/// just above an iterate whose objective already agrees to machine precision.
fn no_worse(candidate: f64, current: f64) -> bool {
    candidate <= current + 8.0 * f64::EPSILON * current.abs().max(1.0)
}

/// Solves `min wᵀKw` s.t. `w ≥ 0`, `Σw = 1`.
pub fn solve(k: &GramMatrix, settings: &QpSettings) -> Result<QpSolution> {
    settings.validate()?;
    let n = k.n();
    if k.entries().iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("Gram matrix has non-finite entries".into()));
    }
    let max_iter = settings.max_iter.unwrap_or(50 * n + 10_000);
    let scale = (k.trace().abs() / n as f64).max(1.0);
    // below this the residual is dominated by rounding in Kw
    let tol = settings.tol.max(ROUNDOFF * scale * n as f64);
    let jitter_floor = JITTER_BASE * scale;
    let negative_floor = -crate::gram::CLAMP_TOL * scale;
    if let Some(i) = (0..n).find(|&i| k.get(i, i) < negative_floor) {
        return Err(Error::Numerical(format!(
            "K is indefinite: K[{i},{i}] = {}",
            k.get(i, i)
        )));
    }
    let mut jitter = settings.jitter;
    let mut trace = Vec::new();

    let mut x = vec![1.0 / n as f64; n];
    let mut kx = vec![0.0; n];
    k.matvec(&x, &mut kx);
    let mut f = objective(&x, &kx, jitter);
    if settings.record_trace {
        trace.push(f);
    }

    let row_bound = 2.0 * (max_abs_row_sum(k) + jitter);
    let mut lip = (2.0 * (1.1 * power_estimate(k) + jitter))
        .min(row_bound)
        .max(f64::MIN_POSITIVE);

    let mut x_prev = x.clone();
    let mut kx_prev = kx.clone();
    let mut momentum = 1.0f64;
    let mut y = vec![0.0; n];
    let mut ky = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut kz = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut scratch = Vec::with_capacity(n);

    let mut iterations = 0;
    let mut converged = residual_from_product(&x, &kx, 0.0) <= tol;
    let mut stalled = false;

    while !converged && iterations < max_iter {
        iterations += 1;

        if !stalled {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
            let beta = (momentum - 1.0) / t_next;
            for i in 0..n {
                y[i] = x[i] + beta * (x[i] - x_prev[i]);
                ky[i] = kx[i] + beta * (kx[i] - kx_prev[i]);
            }
            gradient_point(&y, &ky, jitter, lip, &mut v);
            project_into(&v, &mut z, &mut scratch);
            k.matvec(&z, &mut kz);
            let mut fz = objective(&z, &kz, jitter);
            momentum = t_next;
            if fz.is_nan() || fz > f {
                // restart from x with a plain projected-gradient step
                momentum = 1.0;
                loop {
                    gradient_point(&x, &kx, jitter, lip, &mut v);
                    project_into(&v, &mut z, &mut scratch);
                    k.matvec(&z, &mut kz);
                    fz = objective(&z, &kz, jitter);
                    if fz <= f || lip >= row_bound {
                        break;
                    }
                    lip = (2.0 * lip).min(row_bound);
                }
            }
            if fz <= f {
                std::mem::swap(&mut x_prev, &mut x);
                std::mem::swap(&mut kx_prev, &mut kx);
                x.copy_from_slice(&z);
                kx.copy_from_slice(&kz);
                debug_assert!(fz <= f);
                f = fz;
                if settings.record_trace {
                    trace.push(f);
                }
            } else {
                stalled = true;
            }
        }

        if iterations % CHECK_EVERY == 0 || stalled {
            converged = residual_from_product(&x, &kx, 0.0) <= tol;
            if converged {
                break;
            }
        }

        if iterations % POLISH_EVERY == 0 || stalled {
            let budget = (max_iter - iterations).min(3 * n + 10);
            match active_set_polish(k, jitter, &x, 0.5 * tol, budget) {
                Polish::Improved(p) => {
                    let mut kp = vec![0.0; n];
                    k.matvec(&p, &mut kp);
                    let fp = objective(&p, &kp, jitter);
                    if no_worse(fp, f) {
                        x_prev.copy_from_slice(&p);
                        kx_prev.copy_from_slice(&kp);
                        x = p;
                        kx = kp;
                        f = fp;
                        momentum = 1.0;
                        stalled = false;
                        if settings.record_trace {
                            trace.push(f);
                        }
                    }
                    converged = residual_from_product(&x, &kx, 0.0) <= tol;
                }
                Polish::NotPositiveDefinite => {
                    let next = if jitter == 0.0 {
                        jitter_floor
                    } else {
                        jitter * 10.0
                    };
                    if next > jitter_floor * 10f64.powi(JITTER_DECADES) {
                        return Err(Error::Numerical(format!(
                            "Gram matrix is indefinite beyond jitter {:e}",
                            jitter_floor * 10f64.powi(JITTER_DECADES)
                        )));
                    }
                    jitter = next;
                    f = objective(&x, &kx, jitter);
                    if settings.record_trace {
                        trace.push(f);
                    }
                    stalled = false;
                }
                Polish::NoProgress => {
                    if stalled {
                        break;
                    }
                }
            }
        }
    }

    // a final exact solve on the face when the support is small
    let support = x.iter().filter(|&&v| v > 0.0).count();
    if support <= FINAL_POLISH_MAX {
        if let Polish::Improved(p) = active_set_polish(k, jitter, &x, 0.0, 3 * support + 10) {
            let mut kp = vec![0.0; n];
            k.matvec(&p, &mut kp);
            if no_worse(objective(&p, &kp, jitter), f)
                && residual_from_product(&p, &kp, 0.0) <= residual_from_product(&x, &kx, 0.0)
            {
                x = p;
            }
        }
    }

    let mut weights = WeightVector::from_feasible(x);
    k.matvec(weights.as_slice(), &mut kx);
    let mut raw_objective = k.quad_form(weights.as_slice());
    // the start point is feasible, so never return anything worse
    let uniform = WeightVector::uniform(n);
    let uniform_objective = k.quad_form(uniform.as_slice());
    if raw_objective > uniform_objective {
        weights = uniform;
        k.matvec(weights.as_slice(), &mut kx);
        raw_objective = uniform_objective;
    }
    if raw_objective < negative_floor {
        return Err(Error::Numerical(format!(
            "K is indefinite: wᵀKw = {raw_objective:e} at the returned weights"
        )));
    }
    let kkt = residual_from_product(weights.as_slice(), &kx, 0.0);
    let status = if kkt <= tol {
        QpStatus::Converged
    } else {
        QpStatus::MaxIter
    };
    Ok(QpSolution {
        weights,
        objective: raw_objective,
        kkt_residual: kkt,
        iterations,
        status,
        jitter,
        trace,
    })
}
