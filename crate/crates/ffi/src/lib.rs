//! C ABI over `pathspt`.
//!
//! Paths and generators are opaque heap handles created by `*_new`/`*_simulate`
//! style constructors and released with the matching `*_free`. Every fallible
//! call returns a [`PathsptStatus`]; on failure a message is available from
//! [`pathspt_last_error`] until the next failing call on the same thread.
//! Output arrays are caller-allocated and their lengths are passed explicitly.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use pathspt::martingale::{appendix_bound, bound_crossings, fernholz_bound, stopping_time, StoppingTime};
use pathspt::master::{generated_portfolio, verify_master};
use pathspt::pathkit::{read_csv, weights_from_caps};
use pathspt::{
    dyadic_partitions, simulate_path, value_process, ConstantPortfolio, Error, GeneratedPortfolio, Generator,
    PathGenSpec, PathModel, WeightPath,
};

/// Result codes shared by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathsptStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    LengthMismatch = 3,
    WealthNonpositive = 4,
    Io = 5,
    Parse = 6,
    /// `pathspt_stopping_time`: the level is never reached on the path.
    NotReached = 7,
    BufferTooSmall = 8,
    Panic = 99,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathsptModel {
    Gbm = 0,
    RoughWalk = 1,
    Deterministic = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathsptGeneratorKind {
    Quadratic = 0,
    Entropy = 1,
    Diversity = 2,
}

/// Opaque market-weight path.
pub struct PathsptPath(WeightPath);

/// Opaque portfolio generating function.
pub struct PathsptGenerator(Generator);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(PathsptStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Domain(_) => PathsptStatus::InvalidArgument,
            Error::LengthMismatch { .. } => PathsptStatus::LengthMismatch,
            Error::WealthNonpositive { .. } => PathsptStatus::WealthNonpositive,
            Error::Io { .. } => PathsptStatus::Io,
            Error::Csv(_) | Error::Parse { .. } => PathsptStatus::Parse,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: PathsptStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<PathsptStatus, Failure>) -> PathsptStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("internal panic: {msg}"));
            PathsptStatus::Panic
        }
    }
}

unsafe fn input<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(PathsptStatus::NullPointer, format!("{name} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, needed: usize, name: &str) -> Result<&'a mut [T], Failure> {
    if p.is_null() {
        return Err(fail(PathsptStatus::NullPointer, format!("{name} is null")));
    }
    if len < needed {
        return Err(fail(
            PathsptStatus::BufferTooSmall,
            format!("{name} holds {len} values, {needed} needed"),
        ));
    }
    Ok(slice::from_raw_parts_mut(p, needed))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| fail(PathsptStatus::NullPointer, format!("{name} is null")))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<PathsptStatus, Failure> {
    if out.is_null() {
        return Err(fail(PathsptStatus::NullPointer, "output handle pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(PathsptStatus::Ok)
}

fn rows(values: &[f64], assets: usize) -> Vec<Vec<f64>> {
    values.chunks(assets).map(<[f64]>::to_vec).collect()
}

/// Message for the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pathspt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a path from `n_times` times and a row-major `n_times × assets`
/// weight matrix.
///
/// # Safety
/// `times` must point to `n_times` values, `weights` to `n_times * assets`
/// values, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pathspt_path_from_weights(
    times: *const f64,
    weights: *const f64,
    n_times: usize,
    assets: usize,
    out: *mut *mut PathsptPath,
) -> PathsptStatus {
    guard(|| {
        if assets == 0 {
            return Err(fail(PathsptStatus::InvalidArgument, "assets must be positive"));
        }
        let t = input(times, n_times, "times")?;
        let w = input(weights, n_times * assets, "weights")?;
        let path = WeightPath::new(t.to_vec(), &rows(w, assets))?;
        store(out, PathsptPath(path))
    })
}

/// Like [`pathspt_path_from_weights`] with capitalizations instead of weights.
///
/// # Safety
/// As for [`pathspt_path_from_weights`].
#[no_mangle]
pub unsafe extern "C" fn pathspt_path_from_caps(
    times: *const f64,
    caps: *const f64,
    n_times: usize,
    assets: usize,
    out: *mut *mut PathsptPath,
) -> PathsptStatus {
    guard(|| {
        if assets == 0 {
            return Err(fail(PathsptStatus::InvalidArgument, "assets must be positive"));
        }
        let t = input(times, n_times, "times")?;
        let c = input(caps, n_times * assets, "caps")?;
        let path = weights_from_caps(t.to_vec(), &rows(c, assets))?;
        store(out, PathsptPath(path))
    })
}

/// Simulates `steps + 1` samples. `vols` and `drifts` hold `assets` values
/// each; `drifts` may be null for zero drift.
///
/// # Safety
/// `vols` must point to `assets` values, `drifts` to `assets` values or be
/// null, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pathspt_path_simulate(
    model: PathsptModel,
    assets: usize,
    steps: usize,
    step_size: f64,
    vols: *const f64,
    drifts: *const f64,
    seed: u64,
    stream: u64,
    out: *mut *mut PathsptPath,
) -> PathsptStatus {
    guard(|| {
        let volatilities = input(vols, assets, "vols")?.to_vec();
        let drifts = if drifts.is_null() {
            vec![0.0; assets]
        } else {
            input(drifts, assets, "drifts")?.to_vec()
        };
        let spec = PathGenSpec {
            model: match model {
                PathsptModel::Gbm => PathModel::Gbm,
                PathsptModel::RoughWalk => PathModel::RoughWalk,
                PathsptModel::Deterministic => PathModel::Deterministic,
            },
            assets,
            steps,
            step_size,
            volatilities,
            drifts,
            seed,
            stream,
        };
        store(out, PathsptPath(simulate_path(&spec)?))
    })
}

/// Reads a `time,mu1..` or `time,s1..` CSV file.
///
/// # Safety
/// `file` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pathspt_path_read_csv(file: *const c_char, out: *mut *mut PathsptPath) -> PathsptStatus {
    guard(|| {
        if file.is_null() {
            return Err(fail(PathsptStatus::NullPointer, "file is null"));
        }
        let name = CStr::from_ptr(file)
            .to_str()
            .map_err(|_| fail(PathsptStatus::InvalidArgument, "file name is not UTF-8"))?;
        store(out, PathsptPath(read_csv(name)?))
    })
}

/// # Safety
/// `path` must come from a path constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pathspt_path_free(path: *mut PathsptPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// Number of samples, or 0 for null.
///
/// # Safety
/// `path` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pathspt_path_len(path: *const PathsptPath) -> usize {
    path.as_ref().map_or(0, |p| p.0.len())
}

/// Number of assets, or 0 for null.
///
/// # Safety
/// `path` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pathspt_path_assets(path: *const PathsptPath) -> usize {
    path.as_ref().map_or(0, |p| p.0.assets())
}

/// Copies the sample times into `out` (`len` ≥ path length).
///
/// # Safety
/// `path` must be live and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn pathspt_path_copy_times(path: *const PathsptPath, out: *mut f64, len: usize) -> PathsptStatus {
    guard(|| {
        let p = &handle(path, "path")?.0;
        output(out, len, p.len(), "out")?.copy_from_slice(p.times());
        Ok(PathsptStatus::Ok)
    })
}

/// Copies the row-major weight matrix into `out` (`len` ≥ samples × assets).
///
/// # Safety
/// `path` must be live and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn pathspt_path_copy_weights(
    path: *const PathsptPath,
    out: *mut f64,
    len: usize,
) -> PathsptStatus {
    guard(|| {
        let p = &handle(path, "path")?.0;
        let dst = output(out, len, p.len() * p.assets(), "out")?;
        for (chunk, row) in dst.chunks_mut(p.assets()).zip(p.rows()) {
            chunk.copy_from_slice(row);
        }
        Ok(PathsptStatus::Ok)
    })
}

/// Running `Σ_j [μ_j]` at every sample.
///
/// # Safety
/// `path` must be live and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn pathspt_path_total_qv(path: *const PathsptPath, out: *mut f64, len: usize) -> PathsptStatus {
    guard(|| {
        let p = &handle(path, "path")?.0;
        let qv = p.total_quadratic_variation();
        output(out, len, qv.len(), "out")?.copy_from_slice(qv.values());
        Ok(PathsptStatus::Ok)
    })
}

/// `p` is used only by the diversity generator and must lie in (0, 1).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pathspt_generator_new(
    kind: PathsptGeneratorKind,
    p: f64,
    out: *mut *mut PathsptGenerator,
) -> PathsptStatus {
    guard(|| {
        let gen = match kind {
            PathsptGeneratorKind::Quadratic => Generator::Quadratic,
            PathsptGeneratorKind::Entropy => Generator::Entropy,
            PathsptGeneratorKind::Diversity => Generator::diversity(p)?,
        };
        store(out, PathsptGenerator(gen))
    })
}

/// # Safety
/// `gen` must come from [`pathspt_generator_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pathspt_generator_free(gen: *mut PathsptGenerator) {
    if !gen.is_null() {
        drop(Box::from_raw(gen));
    }
}

/// Portfolio weights generated at the open-simplex point `x`.
///
/// # Safety
/// `gen` must be live; `x` and `out` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn pathspt_generated_portfolio(
    gen: *const PathsptGenerator,
    x: *const f64,
    n: usize,
    out: *mut f64,
) -> PathsptStatus {
    guard(|| {
        let g = &handle(gen, "generator")?.0;
        let w = generated_portfolio(g, input(x, n, "x")?)?;
        output(out, n, n, "out")?.copy_from_slice(&w);
        Ok(PathsptStatus::Ok)
    })
}

/// Relative wealth of the generated portfolio at every sample.
///
/// # Safety
/// `gen` and `path` must be live; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn pathspt_value_process(
    gen: *const PathsptGenerator,
    path: *const PathsptPath,
    out: *mut f64,
    len: usize,
) -> PathsptStatus {
    guard(|| {
        let g = &handle(gen, "generator")?.0;
        let p = &handle(path, "path")?.0;
        let z = value_process(&GeneratedPortfolio(g), p)?;
        output(out, len, z.len(), "out")?.copy_from_slice(z.values());
        Ok(PathsptStatus::Ok)
    })
}

/// Relative wealth of a constant-weight portfolio (`assets` weights).
///
/// # Safety
/// `weights` must hold the path's asset count; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn pathspt_constant_value_process(
    weights: *const f64,
    path: *const PathsptPath,
    out: *mut f64,
    len: usize,
) -> PathsptStatus {
    guard(|| {
        let p = &handle(path, "path")?.0;
        let pi = ConstantPortfolio::new(input(weights, p.assets(), "weights")?.to_vec())?;
        let z = value_process(&pi, p)?;
        output(out, len, z.len(), "out")?.copy_from_slice(z.values());
        Ok(PathsptStatus::Ok)
    })
}

/// Max master-equation residual on each dyadic level, coarsest first. The
/// number of levels written is stored in `levels`.
///
/// # Safety
/// `gen` and `path` must be live; `out` must hold `len` values; `levels`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn pathspt_master_residuals(
    gen: *const PathsptGenerator,
    path: *const PathsptPath,
    depth: u32,
    out: *mut f64,
    len: usize,
    levels: *mut usize,
) -> PathsptStatus {
    guard(|| {
        let g = &handle(gen, "generator")?.0;
        let p = &handle(path, "path")?.0;
        if levels.is_null() {
            return Err(fail(PathsptStatus::NullPointer, "levels is null"));
        }
        let report = verify_master(g, &dyadic_partitions(p, depth)?)?;
        let r = &report.residual_by_level;
        output(out, len, r.len(), "out")?.copy_from_slice(r);
        *levels = r.len();
        Ok(PathsptStatus::Ok)
    })
}

/// First sample index with `Σ_j [μ_j] ≥ a`. Returns `NotReached` (and leaves
/// the outputs untouched) when the path's total is below `a`.
///
/// # Safety
/// `path` must be live; `index` and `time` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pathspt_stopping_time(
    path: *const PathsptPath,
    a: f64,
    index: *mut usize,
    time: *mut f64,
) -> PathsptStatus {
    guard(|| {
        let p = &handle(path, "path")?.0;
        if index.is_null() || time.is_null() {
            return Err(fail(PathsptStatus::NullPointer, "index or time is null"));
        }
        match stopping_time(p, a)? {
            StoppingTime::Reached { index: k, time: t, .. } => {
                *index = k;
                *time = t;
                Ok(PathsptStatus::Ok)
            }
            StoppingTime::NotReached { .. } => Ok(PathsptStatus::NotReached),
        }
    })
}

/// Roots of `½e^{A/2} = A` and the `A` where the appendix curve meets the line.
///
/// # Safety
/// The three outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn pathspt_bound_crossings(
    assets: usize,
    lower: *mut f64,
    upper: *mut f64,
    appendix: *mut f64,
) -> PathsptStatus {
    guard(|| {
        if lower.is_null() || upper.is_null() || appendix.is_null() {
            return Err(fail(PathsptStatus::NullPointer, "output is null"));
        }
        if assets < 2 {
            return Err(fail(PathsptStatus::InvalidArgument, "need at least 2 assets"));
        }
        let c = bound_crossings(assets);
        *lower = c.lower;
        *upper = c.upper;
        *appendix = c.appendix;
        Ok(PathsptStatus::Ok)
    })
}

/// `½e^{A/2}`.
#[no_mangle]
pub extern "C" fn pathspt_fernholz_bound(a: f64) -> f64 {
    fernholz_bound(a)
}

/// `1.25 J^{-3/2} A^{1/2}`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pathspt_appendix_bound(assets: usize, a: f64, out: *mut f64) -> PathsptStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(PathsptStatus::NullPointer, "out is null"));
        }
        *out = appendix_bound(assets, a)?;
        Ok(PathsptStatus::Ok)
    })
}
