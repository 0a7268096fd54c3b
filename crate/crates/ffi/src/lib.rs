//! C ABI over the `uaosc` solver.
//!
//! Objects are opaque handles created by `*_new` functions and released by
//! the matching `*_free`. Every fallible call returns a [`UaoscStatus`]; the
//! message of the most recent failure on the calling thread is available
//! through [`uaosc_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use uaosc::discretization::Potential;
use uaosc::harness::measure::Detector;
use uaosc::harness::study::Problem;
use uaosc::harness::{Method, StudyConfig};
use uaosc::solver::{SolveSettings, SolverKind};
use uaosc::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UaoscStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numeric = 4,
    Solve = 5,
    Parse = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Experiment configuration (opaque).
pub struct UaoscConfig {
    inner: StudyConfig,
}

/// Assembled problem for one grid size and period (opaque).
pub struct UaoscProblem {
    inner: Problem,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> UaoscStatus {
    match e {
        Error::Config(_) => UaoscStatus::Config,
        Error::Argument(_) => UaoscStatus::InvalidArgument,
        Error::Numeric(_) | Error::OracleUnstable { .. } => UaoscStatus::Numeric,
        Error::Assembly(_) => UaoscStatus::Config,
        Error::Solve { .. } => UaoscStatus::Solve,
        Error::Step { source, .. } => status_of(source),
        Error::Parse(_) => UaoscStatus::Parse,
        Error::Io { .. } => UaoscStatus::Io,
    }
}

enum Failure {
    Status(UaoscStatus, String),
    Solver(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Solver(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> UaoscStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => UaoscStatus::Ok,
        Ok(Err(Failure::Status(s, msg))) => {
            set_last_error(msg);
            s
        }
        Ok(Err(Failure::Solver(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            UaoscStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(UaoscStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(UaoscStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `cap`). Returns the full message length plus one, or 0 when
/// there is no error. `buf` may be null to query the length.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn uaosc_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if !buf.is_null() && cap > 0 {
                let n = bytes.len().min(cap);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n - 1) = 0;
            }
            bytes.len()
        }
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn uaosc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New configuration with default values.
#[no_mangle]
pub extern "C" fn uaosc_config_new() -> *mut UaoscConfig {
    Box::into_raw(Box::new(UaoscConfig {
        inner: StudyConfig::default(),
    }))
}

/// Parse a `key = value` configuration text into a new handle.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uaosc_config_parse(text: *const c_char, out: *mut *mut UaoscConfig) -> UaoscStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = str_arg(text, "text")?;
        let cfg = StudyConfig::parse(text)?;
        *out = Box::into_raw(Box::new(UaoscConfig { inner: cfg }));
        Ok(())
    })
}

/// Set one configuration key.
///
/// # Safety
/// `cfg` must come from this library; `key` and `value` must be
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn uaosc_config_set(cfg: *mut UaoscConfig, key: *const c_char, value: *const c_char) -> UaoscStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("cfg"))?;
        let key = str_arg(key, "key")?;
        let value = str_arg(value, "value")?;
        let mut next = cfg.inner.clone();
        next.set(key, value)?;
        next.validate()?;
        cfg.inner = next;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uaosc_config_free(cfg: *mut UaoscConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Adsorption length `M` for potential range `delta` and well depth `phi`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uaosc_adsorption_length(delta: f64, phi: f64, out: *mut f64) -> UaoscStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = Potential::new(delta, phi).adsorption_length()?;
        Ok(())
    })
}

/// Assemble the problem on an `n × n` grid with period `eps`.
///
/// # Safety
/// `cfg` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uaosc_problem_new(
    cfg: *const UaoscConfig,
    n: usize,
    eps: f64,
    out: *mut *mut UaoscProblem,
) -> UaoscStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let problem = Problem::build(&cfg.inner, n, eps)?;
        *out = Box::into_raw(Box::new(UaoscProblem { inner: problem }));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uaosc_problem_free(p: *mut UaoscProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of unknowns (active grid points); 0 for a null handle.
///
/// # Safety
/// `p` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn uaosc_problem_unknowns(p: *const UaoscProblem) -> usize {
    p.as_ref().map_or(0, |p| p.inner.domain.n_active())
}

/// Copy the initial condition into `buf[0..len]`; `len` must equal the
/// number of unknowns.
///
/// # Safety
/// `p` must come from this library and `buf` point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn uaosc_problem_initial(p: *const UaoscProblem, buf: *mut f64, len: usize) -> UaoscStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("problem"))?;
        let n = p.inner.c0.len();
        if len != n {
            return Err(Failure::Status(
                UaoscStatus::BufferTooSmall,
                format!("buffer holds {len} values, problem has {n}"),
            ));
        }
        slice_mut(buf, len, "buf")?.copy_from_slice(&p.inner.c0);
        Ok(())
    })
}

/// Integrate `state[0..len]` in place from `t = 0` to `t_fin` with step
/// `dt` (rounded so that `t_fin` is hit exactly). `method` is one of
/// `ua1`, `ua2`, `cn`, `ua2-flipped`, `twoscale1`, `twoscale2`; `solver` is
/// `direct` or `krylov`. For `twoscale*` the state must be the initial
/// condition. `steps_out` may be null.
///
/// # Safety
/// Handles must come from this library; strings must be NUL-terminated;
/// `state` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn uaosc_problem_integrate(
    p: *const UaoscProblem,
    method: *const c_char,
    solver: *const c_char,
    dt: f64,
    t_fin: f64,
    state: *mut f64,
    len: usize,
    steps_out: *mut usize,
) -> UaoscStatus {
    guard(|| {
        let p = &p.as_ref().ok_or_else(|| null("problem"))?.inner;
        let method: Method = str_arg(method, "method")?.parse()?;
        let kind: SolverKind = str_arg(solver, "solver")?.parse()?;
        let n = p.domain.n_active();
        if len != n {
            return Err(Failure::Status(
                UaoscStatus::BufferTooSmall,
                format!("state holds {len} values, problem has {n}"),
            ));
        }
        let state = slice_mut(state, len, "state")?;
        let settings = SolveSettings {
            method: kind,
            ..SolveSettings::default()
        };
        let out = match method {
            Method::Scheme(s) => {
                let mut st = uaosc::integrators::Stepper::new(&p.ops, &p.velocity, s, settings)?;
                uaosc::integrators::integrate(&mut st, state, dt, t_fin, |_, _, _| Ok(()))?
            }
            Method::TwoScale(order) => {
                let model = uaosc::twoscale::AveragedModel::new(order, &p.ops, &p.velocity, Default::default())?;
                model.integrate(state, dt, t_fin, &settings, |_, _, _| Ok(()))?
            }
        };
        state.copy_from_slice(&out.state.values);
        if let Some(s) = steps_out.as_mut() {
            *s = out.steps;
        }
        Ok(())
    })
}

/// Bilinear value of `state` at `(x, y)`.
///
/// # Safety
/// `p` must come from this library, `state` point to `len` doubles and
/// `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn uaosc_problem_probe(
    p: *const UaoscProblem,
    x: f64,
    y: f64,
    state: *const f64,
    len: usize,
    out: *mut f64,
) -> UaoscStatus {
    guard(|| {
        let p = &p.as_ref().ok_or_else(|| null("problem"))?.inner;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if state.is_null() {
            return Err(null("state"));
        }
        let n = p.domain.n_active();
        if len != n {
            return Err(Failure::Status(
                UaoscStatus::BufferTooSmall,
                format!("state holds {len} values, problem has {n}"),
            ));
        }
        let det = Detector::new(&p.domain, (x, y))?;
        *out = det.value(std::slice::from_raw_parts(state, len));
        Ok(())
    })
}
