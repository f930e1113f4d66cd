//! C ABI over mhdlab: opaque configuration and solver handles, status codes
//! and a per-thread last-error message.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mhdlab::config::RunConfig;
use mhdlab::decay::{fit_exponent, Monitor, NormSeries};
use mhdlab::dispersion::{lambda_pm, omega};
use mhdlab::ibvp::{make_initial_data, Solver};
use mhdlab::spectral::Grid;
use mhdlab::Error;
use num_complex::Complex64;

/// Return codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MhdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Domain = 4,
    Numerical = 5,
    Io = 6,
    Panic = 7,
}

/// Validated run configuration.
pub struct MhdConfig {
    inner: RunConfig,
}

/// Time stepper built from a configuration and its initial data.
pub struct MhdSolver {
    inner: Solver,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn status_of(e: &Error) -> MhdStatus {
    match e {
        Error::Config { .. } | Error::Json(_) => MhdStatus::Config,
        Error::Io(_) => MhdStatus::Io,
        Error::InvalidGrid(_) | Error::ShapeMismatch { .. } | Error::Domain(_) | Error::Incompatible(_) => {
            MhdStatus::Domain
        }
        _ => MhdStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (MhdStatus, String)>) -> MhdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            MhdStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside mhdlab");
            MhdStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (MhdStatus, String) {
    (status_of(&e), e.to_string())
}

fn null() -> (MhdStatus, String) {
    (MhdStatus::NullPointer, "null pointer argument".into())
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, (MhdStatus, String)> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p).to_str().map_err(|_| (MhdStatus::InvalidArgument, "string is not UTF-8".into()))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn mhd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn mhd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Roots λ₊, λ₋ of λ² + |ξ|²λ + ξ₁²; `out` receives re λ₊, im λ₊, re λ₋, im λ₋.
///
/// # Safety
/// `out` must point to 4 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mhd_lambda_pm(xi1: f64, xi2: f64, out: *mut f64) -> MhdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        if !(xi1.is_finite() && xi2.is_finite()) {
            return Err((MhdStatus::InvalidArgument, "xi must be finite".into()));
        }
        let (p, m) = lambda_pm(xi1, xi2);
        let o = std::slice::from_raw_parts_mut(out, 4);
        o.copy_from_slice(&[p.re, p.im, m.re, m.im]);
        Ok(())
    })
}

/// Principal ω(λ; ξ₁) with ω² = λ + ξ₁² + ξ₁²/λ; `out` receives re ω, im ω.
///
/// # Safety
/// `out` must point to 2 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mhd_omega(re_lambda: f64, im_lambda: f64, xi1: f64, out: *mut f64) -> MhdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let w = omega(Complex64::new(re_lambda, im_lambda), xi1).map_err(lib_err)?;
        let o = std::slice::from_raw_parts_mut(out, 2);
        o.copy_from_slice(&[w.re, w.im]);
        Ok(())
    })
}

/// Default configuration.
///
/// # Safety
/// `out` must be a valid pointer; the handle is released with [`mhd_config_free`].
#[no_mangle]
pub unsafe extern "C" fn mhd_config_new_default(out: *mut *mut MhdConfig) -> MhdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        *out = Box::into_raw(Box::new(MhdConfig { inner: RunConfig::default() }));
        Ok(())
    })
}

/// Parses JSON text (defaults filled, validated). On failure `*out` is null.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mhd_config_from_json(json: *const c_char, out: *mut *mut MhdConfig) -> MhdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        *out = ptr::null_mut();
        let cfg = RunConfig::from_json(str_arg(json)?).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(MhdConfig { inner: cfg }));
        Ok(())
    })
}

/// Effective configuration as JSON; free the string with [`mhd_string_free`].
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mhd_config_to_json(cfg: *const MhdConfig, out: *mut *mut c_char) -> MhdStatus {
    guard(|| {
        if cfg.is_null() || out.is_null() {
            return Err(null());
        }
        let s = CString::new((*cfg).inner.to_json()).map_err(|e| (MhdStatus::Numerical, e.to_string()))?;
        *out = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mhd_config_free(cfg: *mut MhdConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mhd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds the grid and initial data of `cfg` and a solver on them.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mhd_solver_new(cfg: *const MhdConfig, out: *mut *mut MhdSolver) -> MhdStatus {
    guard(|| {
        if cfg.is_null() || out.is_null() {
            return Err(null());
        }
        *out = ptr::null_mut();
        let c = &(*cfg).inner;
        let g = Grid::new(c.grid).map_err(lib_err)?;
        let (u0, b0) = make_initial_data(&g, &c.init_spec()).map_err(lib_err)?;
        let s = Solver::new(c.solver.clone(), &u0, &b0).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(MhdSolver { inner: s }));
        Ok(())
    })
}

/// Takes `n` steps.
///
/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mhd_solver_step(s: *mut MhdSolver, n: u64) -> MhdStatus {
    guard(|| {
        let s = s.as_mut().ok_or_else(null)?;
        for _ in 0..n {
            s.inner.step().map_err(lib_err)?;
        }
        Ok(())
    })
}

/// Steps until the time reaches `t` (rounded to whole steps).
///
/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mhd_solver_advance_to(s: *mut MhdSolver, t: f64) -> MhdStatus {
    guard(|| {
        let s = s.as_mut().ok_or_else(null)?;
        if !t.is_finite() {
            return Err((MhdStatus::InvalidArgument, "t must be finite".into()));
        }
        s.inner.advance_to(t).map_err(lib_err)?;
        Ok(())
    })
}

/// Current time, energy ½(‖u‖²+‖b‖²) and accumulated dissipation ∫‖∇u‖².
/// Any output pointer may be null.
///
/// # Safety
/// `s` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhd_solver_stats(
    s: *const MhdSolver,
    t: *mut f64,
    energy: *mut f64,
    dissipation: *mut f64,
) -> MhdStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(null)?;
        let st = s.inner.stats();
        for (p, v) in [(t, st.t), (energy, st.energy), (dissipation, st.dissipation)] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Evaluates a monitor such as "u:L2" or "b1:Linf" on the current state.
///
/// # Safety
/// `s` must be a live handle, `monitor` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mhd_solver_monitor(s: *const MhdSolver, monitor: *const c_char, out: *mut f64) -> MhdStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let m: Monitor = str_arg(monitor)?.parse().map_err(lib_err)?;
        let state = s.inner.state().map_err(lib_err)?;
        *out = m.evaluate(&state).map_err(lib_err)?;
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mhd_solver_free(s: *mut MhdSolver) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Least-squares exponent α of y ≈ C⟨t⟩^α over samples with t in [t0, t1].
///
/// # Safety
/// `t` and `y` must point to `n` doubles; `alpha` must be writable; `r2` may be null.
#[no_mangle]
pub unsafe extern "C" fn mhd_fit_exponent(
    t: *const f64,
    y: *const f64,
    n: usize,
    t0: f64,
    t1: f64,
    alpha: *mut f64,
    r2: *mut f64,
) -> MhdStatus {
    guard(|| {
        if t.is_null() || y.is_null() || alpha.is_null() {
            return Err(null());
        }
        let m: Monitor = "u:L2".parse().map_err(lib_err)?;
        let mut series = NormSeries::new(vec![m]);
        let (ts, ys) = (std::slice::from_raw_parts(t, n), std::slice::from_raw_parts(y, n));
        for (a, b) in ts.iter().zip(ys) {
            series.push(*a, &[*b]).map_err(lib_err)?;
        }
        let fit = fit_exponent(&series, &m, [t0, t1]).map_err(lib_err)?;
        *alpha = fit.alpha;
        if !r2.is_null() {
            *r2 = fit.r2;
        }
        Ok(())
    })
}
