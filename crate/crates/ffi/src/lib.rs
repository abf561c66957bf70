//! C interface to `steinis`.
//!
//! Every function returns a [`SteinisStatus`]; on failure a message is kept
//! per thread and can be read with [`steinis_last_error`]. Matrices and point
//! sets are row-major `double` arrays. Handles are opaque and must be released
//! with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use steinis::gram::{assemble_gram, ksd_squared, GramMatrix};
use steinis::kernels::{BaseKernel, ContinuousVariant, ScoredSamples};
use steinis::qp::{project_simplex, solve, QpSettings, QpStatus};
use steinis::samplers::{run_chain, ChainConfig};
use steinis::targets::{Dataset, DatasetOptions, LogisticPosterior, ScoreModel, StandardGaussian};
use steinis::{Error, WeightVector};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SteinisStatus {
    Ok = 0,
    NullPointer = 1,
    Contract = 2,
    Domain = 3,
    Numerical = 4,
    Input = 5,
    Parse = 6,
    Config = 7,
    Io = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SteinisKernelFamily {
    Imq = 0,
    Gaussian = 1,
    InverseLog = 2,
}

/// Base kernel parameters; `beta` is used by the IMQ family only.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SteinisKernel {
    pub family: SteinisKernelFamily,
    pub alpha: f64,
    pub beta: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SteinisQpReport {
    pub objective: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    /// 1 when the KKT residual met the tolerance, 0 at the iteration cap.
    pub converged: i32,
    pub jitter: f64,
}

/// Opaque Gram matrix.
pub struct SteinisGram(GramMatrix);

/// Opaque Bayesian logistic-regression posterior.
pub struct SteinisLogistic(LogisticPosterior);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SteinisStatus {
    match e {
        Error::Contract(_) => SteinisStatus::Contract,
        Error::Domain(_) => SteinisStatus::Domain,
        Error::Numerical(_) => SteinisStatus::Numerical,
        Error::Input(_) => SteinisStatus::Input,
        Error::Parse { .. } | Error::Csv(_) | Error::Json(_) => SteinisStatus::Parse,
        Error::Config(_) => SteinisStatus::Config,
        Error::Io(_) => SteinisStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SteinisStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SteinisStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            SteinisStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SteinisStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(
    p: *mut f64,
    len: usize,
    what: &'static str,
) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

fn rows(flat: &[f64], n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| flat[i * d..(i + 1) * d].to_vec()).collect()
}

fn checked_len(n: usize, d: usize) -> Result<usize, Failure> {
    n.checked_mul(d)
        .ok_or_else(|| Failure::Lib(Error::Contract(format!("{n} x {d} overflows"))))
}

fn base_kernel(k: &SteinisKernel) -> BaseKernel {
    match k.family {
        SteinisKernelFamily::Imq => BaseKernel::Imq {
            alpha: k.alpha,
            beta: k.beta,
        },
        SteinisKernelFamily::Gaussian => BaseKernel::Gaussian { alpha: k.alpha },
        SteinisKernelFamily::InverseLog => BaseKernel::InverseLog { alpha: k.alpha },
    }
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn steinis_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Copies an `n x n` row-major symmetric matrix into a new Gram handle.
///
/// # Safety
/// `entries` must point to `n * n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn steinis_gram_from_entries(
    n: usize,
    entries: *const f64,
    out: *mut *mut SteinisGram,
) -> SteinisStatus {
    guard(|| {
        let e = slice(entries, checked_len(n, n)?, "entries")?;
        store(
            out,
            SteinisGram(GramMatrix::from_entries(n, e.to_vec(), "ffi/entries")?),
        )
    })
}

/// Gram matrix of a Stein kernel on `n` points in `d` dimensions with
/// caller-supplied scores. `marginal` selects the coordinate-wise kernel.
///
/// # Safety
/// `points` and `scores` must each point to `n * d` doubles; `kernel` and
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn steinis_gram_from_scores(
    points: *const f64,
    scores: *const f64,
    n: usize,
    d: usize,
    kernel: *const SteinisKernel,
    marginal: i32,
    out: *mut *mut SteinisGram,
) -> SteinisStatus {
    guard(|| {
        let len = checked_len(n, d)?;
        let p = rows(slice(points, len, "points")?, n, d);
        let s = rows(slice(scores, len, "scores")?, n, d);
        let base = base_kernel(handle(kernel, "kernel")?);
        let variant = if marginal != 0 {
            ContinuousVariant::Marginal
        } else {
            ContinuousVariant::Canonical
        };
        let samples = ScoredSamples::with_scores(base, variant, &p, s)?;
        store(out, SteinisGram(assemble_gram(&samples)?))
    })
}

/// Canonical Stein Gram matrix of `n` points under a logistic posterior.
///
/// # Safety
/// `model`, `kernel` and `out` must be valid; `points` must hold `n * dim` doubles
/// where `dim` is [`steinis_logistic_dim`].
#[no_mangle]
pub unsafe extern "C" fn steinis_gram_from_logistic(
    model: *const SteinisLogistic,
    points: *const f64,
    n: usize,
    kernel: *const SteinisKernel,
    out: *mut *mut SteinisGram,
) -> SteinisStatus {
    guard(|| {
        let m = &handle(model, "model")?.0;
        let d = m.dim();
        let p = rows(slice(points, checked_len(n, d)?, "points")?, n, d);
        let base = base_kernel(handle(kernel, "kernel")?);
        let samples = ScoredSamples::canonical(m, base, &p)?;
        store(out, SteinisGram(assemble_gram(&samples)?))
    })
}

/// # Safety
/// `gram` must come from a `steinis_gram_*` constructor, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn steinis_gram_free(gram: *mut SteinisGram) {
    if !gram.is_null() {
        drop(Box::from_raw(gram));
    }
}

/// Side length of the matrix, or 0 for NULL.
///
/// # Safety
/// `gram` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn steinis_gram_size(gram: *const SteinisGram) -> usize {
    gram.as_ref().map_or(0, |g| g.0.n())
}

/// Copies the `n * n` row-major entries into `out`.
///
/// # Safety
/// `gram` must be live; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn steinis_gram_entries(
    gram: *const SteinisGram,
    out: *mut f64,
    len: usize,
) -> SteinisStatus {
    guard(|| {
        let g = &handle(gram, "gram")?.0;
        let src = g.entries();
        if len != src.len() {
            return Err(Error::Contract(format!(
                "buffer holds {len} values, matrix has {}",
                src.len()
            ))
            .into());
        }
        slice_mut(out, len, "out")?.copy_from_slice(src);
        Ok(())
    })
}

/// Solves `min wᵀKw` over the probability simplex. `max_iter = 0` uses the
/// default cap. `report` may be NULL.
///
/// # Safety
/// `gram` must be live; `weights_out` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn steinis_solve(
    gram: *const SteinisGram,
    tol: f64,
    max_iter: usize,
    weights_out: *mut f64,
    n: usize,
    report: *mut SteinisQpReport,
) -> SteinisStatus {
    guard(|| {
        let g = &handle(gram, "gram")?.0;
        if n != g.n() {
            return Err(
                Error::Contract(format!("weight buffer holds {n}, matrix is {}", g.n())).into(),
            );
        }
        let out = slice_mut(weights_out, n, "weights_out")?;
        let settings = QpSettings {
            tol,
            max_iter: (max_iter > 0).then_some(max_iter),
            ..QpSettings::default()
        };
        let sol = solve(g, &settings)?;
        out.copy_from_slice(sol.weights.as_slice());
        if let Some(r) = report.as_mut() {
            *r = SteinisQpReport {
                objective: sol.objective,
                kkt_residual: sol.kkt_residual,
                iterations: sol.iterations,
                converged: (sol.status == QpStatus::Converged) as i32,
                jitter: sol.jitter,
            };
        }
        Ok(())
    })
}

/// `wᵀKw`; `weights` must lie on the simplex.
///
/// # Safety
/// `gram` must be live; `weights` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn steinis_ksd_squared(
    gram: *const SteinisGram,
    weights: *const f64,
    n: usize,
    out: *mut f64,
) -> SteinisStatus {
    guard(|| {
        let g = &handle(gram, "gram")?.0;
        let w = WeightVector::new(slice(weights, n, "weights")?.to_vec())?;
        let v = ksd_squared(g, &w)?;
        *out.as_mut().ok_or(Failure::Null("out"))? = v;
        Ok(())
    })
}

/// Euclidean projection of `v` onto the probability simplex.
///
/// # Safety
/// `v` and `out` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn steinis_project_simplex(
    v: *const f64,
    n: usize,
    out: *mut f64,
) -> SteinisStatus {
    guard(|| {
        let p = project_simplex(slice(v, n, "v")?)?;
        slice_mut(out, n, "out")?.copy_from_slice(p.as_slice());
        Ok(())
    })
}

/// Logistic posterior from `n_data` rows of `dim` raw features and labels in
/// {0, 1} or {-1, 1}. Standardization and the intercept column follow the flags.
///
/// # Safety
/// `features` must hold `n_data * dim` doubles, `labels` `n_data`; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn steinis_logistic_new(
    features: *const f64,
    labels: *const f64,
    n_data: usize,
    dim: usize,
    prior_precision: f64,
    standardize: i32,
    intercept: i32,
    out: *mut *mut SteinisLogistic,
) -> SteinisStatus {
    guard(|| {
        let f = rows(
            slice(features, checked_len(n_data, dim)?, "features")?,
            n_data,
            dim,
        );
        let mut y = slice(labels, n_data, "labels")?.to_vec();
        for v in &mut y {
            if *v == -1.0 {
                *v = 0.0;
            }
        }
        let opts = DatasetOptions {
            standardize: standardize != 0,
            intercept: intercept != 0,
        };
        let data = Dataset::new(f, y)?.preprocess(opts);
        store(
            out,
            SteinisLogistic(LogisticPosterior::new(data, prior_precision)?),
        )
    })
}

/// # Safety
/// `model` must come from [`steinis_logistic_new`], or be NULL.
#[no_mangle]
pub unsafe extern "C" fn steinis_logistic_free(model: *mut SteinisLogistic) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Parameter dimension (features plus intercept when enabled), 0 for NULL.
///
/// # Safety
/// `model` must be live or NULL.
#[no_mangle]
pub unsafe extern "C" fn steinis_logistic_dim(model: *const SteinisLogistic) -> usize {
    model.as_ref().map_or(0, |m| m.0.dim())
}

/// Full-data score `∇ log p(x)`.
///
/// # Safety
/// `model` must be live; `x` and `out` must each hold `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn steinis_logistic_score(
    model: *const SteinisLogistic,
    x: *const f64,
    dim: usize,
    out: *mut f64,
) -> SteinisStatus {
    guard(|| {
        let m = &handle(model, "model")?.0;
        let s = m.score(slice(x, dim, "x")?)?;
        slice_mut(out, dim, "out")?.copy_from_slice(&s);
        Ok(())
    })
}

/// Runs TULA (`gamma = 0` gives ULA) on the `dim`-dimensional standard
/// Gaussian from the origin and writes `n_steps` points row-major to `out`.
///
/// # Safety
/// `out` must hold `n_steps * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn steinis_tula_gaussian(
    dim: usize,
    h: f64,
    gamma: f64,
    n_steps: usize,
    seed: u64,
    out: *mut f64,
) -> SteinisStatus {
    guard(|| {
        let dst = slice_mut(out, checked_len(n_steps, dim)?, "out")?;
        if dim == 0 {
            return Err(Error::Contract("dim must be >= 1".into()).into());
        }
        let chain = run_chain(
            &ChainConfig::tula(h, gamma, n_steps, seed),
            &StandardGaussian::new(dim),
        )?;
        for (row, p) in dst.chunks_mut(dim).zip(&chain.points) {
            row.copy_from_slice(p);
        }
        Ok(())
    })
}
