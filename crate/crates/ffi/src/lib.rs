//! C ABI over `brownsphere`.
//!
//! Objects cross the boundary as opaque handles created by constructors such
//! as `bs_snake_sample` and released with the matching `bs_*_free`. Every fallible
//! call returns a [`BsStatus`]; on failure [`bs_last_error`] describes what
//! went wrong on the calling thread. Output pointers are written only on
//! success.
//!
//! Handles and buffers passed in must be null or valid for the stated length;
//! null is reported as [`BsStatus::NullPointer`], anything else invalid is
//! undefined behaviour.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use brownsphere::inverse::{phi, InverseParams, RecoveredSnake};
use brownsphere::mating::{build_sphere, DistanceMatrix, MarkedSphereSample, Marks, SphereOptions};
use brownsphere::quadvar::duration_of_values;
use brownsphere::rtree::tree_dist;
use brownsphere::snake::{reverse, sample_snake, ContourPair};
use brownsphere::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    IndexOutOfRange = 3,
    MalformedStructure = 4,
    /// The sample is too sparse for the inverse to answer.
    SamplingDensity = 5,
    Io = 6,
    Format = 7,
    /// A caller-provided buffer is too small; nothing was written.
    BufferTooSmall = 8,
    Panic = 9,
}

/// A discretized snake `(f, g)` on `n + 1` grid times.
pub struct BsSnake(ContourPair);

/// A marked sample of the sphere: distances, masses, `x⁰`, `x¹`, `ε`.
pub struct BsSphere(MarkedSphereSample);

/// The output of the inverse map.
pub struct BsRecovered(RecoveredSnake);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> BsStatus {
    match e {
        Error::Param(_) => BsStatus::InvalidParameter,
        Error::Index { .. } => BsStatus::IndexOutOfRange,
        Error::Structure(_) => BsStatus::MalformedStructure,
        Error::Density(_) => BsStatus::SamplingDensity,
        Error::Io(_) => BsStatus::Io,
        Error::Format(_) => BsStatus::Format,
    }
}

struct Fail(BsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(BsStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> BsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            BsStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            BsStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn path(p: *const c_char) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p).to_str().map_err(|_| Fail(BsStatus::InvalidParameter, "path is not UTF-8".into()))?;
    Ok(PathBuf::from(s))
}

/// Checks `out` before doing any work, then stores the boxed result.
unsafe fn put<T>(out: *mut *mut T, make: impl FnOnce() -> Result<T, Fail>) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(make()?));
    Ok(())
}

unsafe fn copy_to(src: &[f64], buf: *mut f64, len: usize) -> Result<(), Fail> {
    if len < src.len() {
        return Err(Fail(BsStatus::BufferTooSmall, format!("buffer holds {len} values, {} needed", src.len())));
    }
    if buf.is_null() {
        return Err(null("buffer"));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Message of the last failed call on this thread, or an empty string. Valid
/// until the next call on the same thread.
#[no_mangle]
pub extern "C" fn bs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Samples a snake with `n` grid intervals (`n` even, at least 2).
#[no_mangle]
pub unsafe extern "C" fn bs_snake_sample(n: usize, seed: u64, out: *mut *mut BsSnake) -> BsStatus {
    guard(|| put(out, || Ok(BsSnake(sample_snake(n, seed)?))))
}

/// A snake from `len` values of `f` and `g`.
#[no_mangle]
pub unsafe extern "C" fn bs_snake_from_arrays(
    f: *const f64,
    g: *const f64,
    len: usize,
    seed: u64,
    out: *mut *mut BsSnake,
) -> BsStatus {
    guard(|| {
        put(out, || {
            let (f, g) = (slice(f, len, "f")?, slice(g, len, "g")?);
            Ok(BsSnake(ContourPair::new(f.to_vec(), g.to_vec(), seed)?))
        })
    })
}

#[no_mangle]
pub unsafe extern "C" fn bs_snake_load(file: *const c_char, out: *mut *mut BsSnake) -> BsStatus {
    guard(|| put(out, || Ok(BsSnake(ContourPair::load(&path(file)?)?))))
}

#[no_mangle]
pub unsafe extern "C" fn bs_snake_save(snake: *const BsSnake, file: *const c_char) -> BsStatus {
    guard(|| Ok(get(snake, "snake")?.0.save(&path(file)?)?))
}

/// Number of grid values, `n + 1`; zero for a null handle.
#[no_mangle]
pub unsafe extern "C" fn bs_snake_len(snake: *const BsSnake) -> usize {
    snake.as_ref().map_or(0, |s| s.0.n + 1)
}

#[no_mangle]
pub unsafe extern "C" fn bs_snake_copy_f(snake: *const BsSnake, buf: *mut f64, len: usize) -> BsStatus {
    guard(|| copy_to(&get(snake, "snake")?.0.f, buf, len))
}

#[no_mangle]
pub unsafe extern "C" fn bs_snake_copy_g(snake: *const BsSnake, buf: *mut f64, len: usize) -> BsStatus {
    guard(|| copy_to(&get(snake, "snake")?.0.g, buf, len))
}

/// First argmin `s*` of the labels and the orientation bit `ε`.
#[no_mangle]
pub unsafe extern "C" fn bs_snake_marks(snake: *const BsSnake, s_star: *mut usize, epsilon: *mut i8) -> BsStatus {
    guard(|| {
        let mk = get(snake, "snake")?.0.marks();
        if s_star.is_null() || epsilon.is_null() {
            return Err(null("output"));
        }
        *s_star = mk.s_star;
        *epsilon = mk.epsilon;
        Ok(())
    })
}

/// The time reversal `R(h)`.
#[no_mangle]
pub unsafe extern "C" fn bs_snake_reverse(snake: *const BsSnake, out: *mut *mut BsSnake) -> BsStatus {
    guard(|| put(out, || Ok(BsSnake(reverse(&get(snake, "snake")?.0)))))
}

/// Distance between grid times `s` and `t` in the tree coded by `f`.
#[no_mangle]
pub unsafe extern "C" fn bs_tree_dist(snake: *const BsSnake, s: usize, t: usize, out: *mut f64) -> BsStatus {
    guard(|| {
        let d = tree_dist(&get(snake, "snake")?.0.f, s, t)?;
        *out.as_mut().ok_or_else(|| null("output"))? = d;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn bs_snake_free(snake: *mut BsSnake) {
    if !snake.is_null() {
        drop(Box::from_raw(snake));
    }
}

/// Samples `m` grid times of `snake` plus its marked times and computes the
/// sphere distance on them. `k_max = 0` and `delta < 0` select the defaults.
#[no_mangle]
pub unsafe extern "C" fn bs_sphere_build(
    snake: *const BsSnake,
    m: usize,
    k_max: usize,
    delta: f64,
    out: *mut *mut BsSphere,
) -> BsStatus {
    guard(|| put(out, || {
        let mut opts = SphereOptions::default();
        if k_max > 0 {
            opts.k_max = k_max;
        }
        if delta >= 0.0 {
            opts.delta = delta;
        }
        let (sample, _) = build_sphere(&get(snake, "snake")?.0, m, &opts)?;
        Ok(BsSphere(sample))
    }))
}

/// A sphere sample from a full `m × m` row-major distance matrix (only the
/// upper triangle is read), uniform masses and the marks. `epsilon` is `+1`,
/// `-1`, or `0` for unknown.
#[no_mangle]
pub unsafe extern "C" fn bs_sphere_from_matrix(
    dist: *const f64,
    m: usize,
    i0: usize,
    i1: usize,
    epsilon: i8,
    out: *mut *mut BsSphere,
) -> BsStatus {
    guard(|| put(out, || {
        let full = slice(dist, m.checked_mul(m).ok_or_else(|| Fail(BsStatus::InvalidParameter, "m is too large".into()))?, "dist")?;
        let d = DistanceMatrix::from_rows((0..m).collect(), full)?;
        let marks = Marks { i0, i1, epsilon: (epsilon != 0).then_some(epsilon) };
        Ok(BsSphere(MarkedSphereSample::with_marks(d, &marks)?))
    }))
}

/// Number of sample points; zero for a null handle.
#[no_mangle]
pub unsafe extern "C" fn bs_sphere_size(sphere: *const BsSphere) -> usize {
    sphere.as_ref().map_or(0, |s| s.0.dist.m())
}

#[no_mangle]
pub unsafe extern "C" fn bs_sphere_distance(sphere: *const BsSphere, i: usize, j: usize, out: *mut f64) -> BsStatus {
    guard(|| {
        let s = &get(sphere, "sphere")?.0;
        let m = s.dist.m();
        if i >= m || j >= m {
            return Err(Error::Index { index: i.max(j), n: m }.into());
        }
        *out.as_mut().ok_or_else(|| null("output"))? = s.dist.get(i, j);
        Ok(())
    })
}

/// Grid times of the sample points, as `u64`.
#[no_mangle]
pub unsafe extern "C" fn bs_sphere_copy_points(sphere: *const BsSphere, buf: *mut u64, len: usize) -> BsStatus {
    guard(|| {
        let pts = &get(sphere, "sphere")?.0.dist.points;
        if len < pts.len() {
            return Err(Fail(BsStatus::BufferTooSmall, format!("buffer holds {len} values, {} needed", pts.len())));
        }
        if buf.is_null() {
            return Err(null("buffer"));
        }
        for (k, &p) in pts.iter().enumerate() {
            *buf.add(k) = p as u64;
        }
        Ok(())
    })
}

/// Indices of `x⁰` and `x¹` and the orientation (`0` when unknown).
#[no_mangle]
pub unsafe extern "C" fn bs_sphere_marks(sphere: *const BsSphere, i0: *mut usize, i1: *mut usize, epsilon: *mut i8) -> BsStatus {
    guard(|| {
        let s = &get(sphere, "sphere")?.0;
        if i0.is_null() || i1.is_null() || epsilon.is_null() {
            return Err(null("output"));
        }
        *i0 = s.i0;
        *i1 = s.i1;
        *epsilon = s.epsilon.unwrap_or(0);
        Ok(())
    })
}

/// Replaces the orientation: `+1`, `-1`, or `0` to forget it.
#[no_mangle]
pub unsafe extern "C" fn bs_sphere_set_epsilon(sphere: *mut BsSphere, epsilon: i8) -> BsStatus {
    guard(|| {
        let s = sphere.as_mut().ok_or_else(|| null("sphere"))?;
        if !matches!(epsilon, -1..=1) {
            return Err(Fail(BsStatus::InvalidParameter, format!("epsilon must be -1, 0 or 1, got {epsilon}")));
        }
        s.0.epsilon = (epsilon != 0).then_some(epsilon);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn bs_sphere_free(sphere: *mut BsSphere) {
    if !sphere.is_null() {
        drop(Box::from_raw(sphere));
    }
}

/// Runs the inverse map with default parameters.
#[no_mangle]
pub unsafe extern "C" fn bs_invert(sphere: *const BsSphere, out: *mut *mut BsRecovered) -> BsStatus {
    guard(|| put(out, || Ok(BsRecovered(phi(&get(sphere, "sphere")?.0, &InverseParams::default())?))))
}

/// Number of grid values of the recovered snake, `m + 1`.
#[no_mangle]
pub unsafe extern "C" fn bs_recovered_len(rec: *const BsRecovered) -> usize {
    rec.as_ref().map_or(0, |r| r.0.f_hat.len())
}

#[no_mangle]
pub unsafe extern "C" fn bs_recovered_copy_f(rec: *const BsRecovered, buf: *mut f64, len: usize) -> BsStatus {
    guard(|| copy_to(&get(rec, "recovered snake")?.0.f_hat, buf, len))
}

#[no_mangle]
pub unsafe extern "C" fn bs_recovered_copy_g(rec: *const BsRecovered, buf: *mut f64, len: usize) -> BsStatus {
    guard(|| copy_to(&get(rec, "recovered snake")?.0.g_hat, buf, len))
}

/// Recovered time of `x¹`; NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn bs_recovered_s_star(rec: *const BsRecovered) -> f64 {
    rec.as_ref().map_or(f64::NAN, |r| r.0.s_star_hat)
}

#[no_mangle]
pub unsafe extern "C" fn bs_recovered_free(rec: *mut BsRecovered) {
    if !rec.is_null() {
        drop(Box::from_raw(rec));
    }
}

/// Duration of a time-changed Brownian path from its `len` values, over a
/// strictly decreasing spacing schedule.
#[no_mangle]
pub unsafe extern "C" fn bs_quadvar_duration(
    values: *const f64,
    len: usize,
    schedule: *const f64,
    schedule_len: usize,
    out: *mut f64,
) -> BsStatus {
    guard(|| {
        let est = duration_of_values(slice(values, len, "values")?, slice(schedule, schedule_len, "schedule")?)?;
        *out.as_mut().ok_or_else(|| null("output"))? = est.duration;
        Ok(())
    })
}
