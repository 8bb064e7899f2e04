//! C interface to `vwwave-core`.
//!
//! Every fallible function returns a [`VwwStatus`]; on failure the message
//! is available from [`vww_last_error`] on the same thread. Handles are
//! opaque and must be released with their `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use vwwave_core::bathymetry::{self, DepthProfile, RegularizedDepth};
use vwwave_core::solver1d::{run_1d, Run1D, SimConfig1D};
use vwwave_core::tridiag::{thomas_into, CyclicReduction};
use vwwave_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VwwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    ShapeMismatch = 3,
    SingularSystem = 4,
    Io = 5,
    Parse = 6,
    Panic = 7,
    OutOfRange = 8,
}

/// Piecewise-constant depth with optional singular terms.
pub struct VwwProfile(DepthProfile);

/// Regularized depth `h_ε`.
pub struct VwwDepth(RegularizedDepth);

/// Result of a 1D simulation.
pub struct VwwRun1D(Run1D);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: VwwStatus, msg: impl Into<String>) -> VwwStatus {
    set_error(msg);
    status
}

fn status_of(err: &Error) -> VwwStatus {
    match err {
        Error::InvalidParameter(_) | Error::InvalidFigure(_) | Error::DegenerateLadder(_) => {
            VwwStatus::InvalidParameter
        }
        Error::Shape { .. } | Error::GridMismatch(_) => VwwStatus::ShapeMismatch,
        Error::SingularSystem { .. } => VwwStatus::SingularSystem,
        Error::Io(_) => VwwStatus::Io,
        Error::Parse { .. } | Error::Json(_) => VwwStatus::Parse,
        _ => VwwStatus::InvalidParameter,
    }
}

fn guard(f: impl FnOnce() -> Result<(), VwwStatus>) -> VwwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VwwStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(VwwStatus::Panic, "internal panic"),
    }
}

fn check<T>(r: vwwave_core::Result<T>) -> Result<T, VwwStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), VwwStatus> {
    if p.is_null() {
        Err(fail(VwwStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn vww_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vww_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Normalization constant `c` of the mollifier.
#[no_mangle]
pub extern "C" fn vww_mollifier_constant() -> f64 {
    bathymetry::Mollifier::standard().c()
}

/// Built-in profile `case_id` (1, 2 or 3) with singular amplitude `amp`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn vww_profile_builtin(
    case_id: u8,
    amp: f64,
    out: *mut *mut VwwProfile,
) -> VwwStatus {
    guard(|| {
        non_null(out, "out")?;
        let p = check(DepthProfile::builtin(case_id, amp))?;
        *out = Box::into_raw(Box::new(VwwProfile(p)));
        Ok(())
    })
}

/// Profile from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vww_profile_from_json(
    json: *const c_char,
    out: *mut *mut VwwProfile,
) -> VwwStatus {
    guard(|| {
        non_null(json, "json")?;
        non_null(out, "out")?;
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| fail(VwwStatus::Parse, format!("json is not UTF-8: {e}")))?;
        let p = check(DepthProfile::from_json(text))?;
        *out = Box::into_raw(Box::new(VwwProfile(p)));
        Ok(())
    })
}

/// # Safety
/// `profile` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn vww_profile_free(profile: *mut VwwProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Regularizes `profile` with parameter `eps` in (0, 1].
///
/// # Safety
/// `profile` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vww_regularize(
    profile: *const VwwProfile,
    eps: f64,
    out: *mut *mut VwwDepth,
) -> VwwStatus {
    guard(|| {
        non_null(profile, "profile")?;
        non_null(out, "out")?;
        let d = check(bathymetry::regularize(&(*profile).0, eps))?;
        *out = Box::into_raw(Box::new(VwwDepth(d)));
        Ok(())
    })
}

/// Writes `h_ε(xs[i])` into `values[i]` for `i < n`.
///
/// # Safety
/// `depth` must be live; `xs` and `values` must hold `n` elements.
#[no_mangle]
pub unsafe extern "C" fn vww_depth_sample(
    depth: *const VwwDepth,
    xs: *const f64,
    n: usize,
    values: *mut f64,
) -> VwwStatus {
    guard(|| {
        non_null(depth, "depth")?;
        if n == 0 {
            return Ok(());
        }
        non_null(xs, "xs")?;
        non_null(values, "values")?;
        let xs = slice::from_raw_parts(xs, n);
        let values = slice::from_raw_parts_mut(values, n);
        for (v, &x) in values.iter_mut().zip(xs) {
            *v = (*depth).0.eval(x);
        }
        Ok(())
    })
}

/// # Safety
/// `depth` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn vww_depth_free(depth: *mut VwwDepth) {
    if !depth.is_null() {
        drop(Box::from_raw(depth));
    }
}

unsafe fn tridiag_args<'a>(
    lower: *const f64,
    diag: *const f64,
    upper: *const f64,
    rhs: *const f64,
    n: usize,
    x: *mut f64,
) -> Result<[&'a [f64]; 4], VwwStatus> {
    for (p, name) in [
        (lower, "lower"),
        (diag, "diag"),
        (upper, "upper"),
        (rhs, "rhs"),
    ] {
        non_null(p, name)?;
    }
    non_null(x, "x")?;
    Ok([
        slice::from_raw_parts(lower, n),
        slice::from_raw_parts(diag, n),
        slice::from_raw_parts(upper, n),
        slice::from_raw_parts(rhs, n),
    ])
}

/// Thomas algorithm. All bands have length `n`; `lower[0]` and
/// `upper[n-1]` are ignored.
///
/// # Safety
/// All pointers must reference `n` valid elements.
#[no_mangle]
pub unsafe extern "C" fn vww_thomas_solve(
    lower: *const f64,
    diag: *const f64,
    upper: *const f64,
    rhs: *const f64,
    n: usize,
    x: *mut f64,
) -> VwwStatus {
    guard(|| {
        if n == 0 {
            return Ok(());
        }
        let [l, d, u, r] = tridiag_args(lower, diag, upper, rhs, n, x)?;
        let out = slice::from_raw_parts_mut(x, n);
        let mut scratch = vec![0.0; n];
        check(thomas_into(l, d, u, r, out, &mut scratch))
    })
}

/// Cyclic reduction with the same band layout as [`vww_thomas_solve`].
///
/// # Safety
/// All pointers must reference `n` valid elements.
#[no_mangle]
pub unsafe extern "C" fn vww_cyclic_reduction_solve(
    lower: *const f64,
    diag: *const f64,
    upper: *const f64,
    rhs: *const f64,
    n: usize,
    x: *mut f64,
) -> VwwStatus {
    guard(|| {
        if n == 0 {
            return Ok(());
        }
        let [l, d, u, r] = tridiag_args(lower, diag, upper, rhs, n, x)?;
        let out = slice::from_raw_parts_mut(x, n);
        check(CyclicReduction::default().solve(l, d, u, r, out))
    })
}

/// Runs the 1D solver with Gaussian data up to `t_final`, keeping one
/// snapshot at `t_final`.
///
/// # Safety
/// `profile` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vww_run_1d(
    profile: *const VwwProfile,
    eps: f64,
    dt: f64,
    dx: f64,
    t_final: f64,
    out: *mut *mut VwwRun1D,
) -> VwwStatus {
    guard(|| {
        non_null(profile, "profile")?;
        non_null(out, "out")?;
        let mut cfg = SimConfig1D::new((*profile).0.clone(), eps, t_final);
        cfg.dt = dt;
        cfg.dx = dx;
        let run = check(run_1d(&cfg))?;
        *out = Box::into_raw(Box::new(VwwRun1D(run)));
        Ok(())
    })
}

/// Runs the 1D solver from a JSON `SimConfig1D`.
///
/// # Safety
/// `config_json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vww_run_1d_json(
    config_json: *const c_char,
    out: *mut *mut VwwRun1D,
) -> VwwStatus {
    guard(|| {
        non_null(config_json, "config_json")?;
        non_null(out, "out")?;
        let text = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|e| fail(VwwStatus::Parse, format!("config is not UTF-8: {e}")))?;
        let cfg = check(SimConfig1D::from_json(text))?;
        let run = check(run_1d(&cfg))?;
        *out = Box::into_raw(Box::new(VwwRun1D(run)));
        Ok(())
    })
}

/// Grid nodes per snapshot.
///
/// # Safety
/// `run` must be live.
#[no_mangle]
pub unsafe extern "C" fn vww_run_1d_node_count(run: *const VwwRun1D) -> usize {
    if run.is_null() {
        return 0;
    }
    (*run).0.grid.nx
}

/// Number of stored snapshots.
///
/// # Safety
/// `run` must be live.
#[no_mangle]
pub unsafe extern "C" fn vww_run_1d_snapshot_count(run: *const VwwRun1D) -> usize {
    if run.is_null() {
        return 0;
    }
    (*run).0.snapshots.len()
}

/// Copies snapshot `k` into `u` (length `len`, equal to the node count)
/// and its time into `t`.
///
/// # Safety
/// `run` must be live; `t` must be writable; `u` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn vww_run_1d_snapshot(
    run: *const VwwRun1D,
    k: usize,
    t: *mut f64,
    u: *mut f64,
    len: usize,
) -> VwwStatus {
    guard(|| {
        non_null(run, "run")?;
        non_null(t, "t")?;
        non_null(u, "u")?;
        let snaps = &(*run).0.snapshots;
        let s = snaps.get(k).ok_or_else(|| {
            fail(
                VwwStatus::OutOfRange,
                format!("snapshot {k} of {}", snaps.len()),
            )
        })?;
        if len != s.u.len() {
            return Err(fail(
                VwwStatus::ShapeMismatch,
                format!("buffer holds {len}, snapshot has {}", s.u.len()),
            ));
        }
        *t = s.t;
        slice::from_raw_parts_mut(u, len).copy_from_slice(&s.u);
        Ok(())
    })
}

/// Largest relative change of the conserved discrete energy.
///
/// # Safety
/// `run` must be live; `drift` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vww_run_1d_energy_drift(
    run: *const VwwRun1D,
    drift: *mut f64,
) -> VwwStatus {
    guard(|| {
        non_null(run, "run")?;
        non_null(drift, "drift")?;
        *drift = (*run).0.energy.discrete_drift();
        Ok(())
    })
}

/// # Safety
/// `run` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn vww_run_1d_free(run: *mut VwwRun1D) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
