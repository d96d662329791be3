//! C ABI over the `semistab` toolkit.
//!
//! Scenarios and run reports are opaque handles. Every fallible call returns a
//! [`SemistabStatus`]; on failure the message is available from
//! [`semistab_last_error`] until the next failing call on the same thread.
//! Strings returned by the library are owned by the caller and released with
//! [`semistab_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use semistab::cli::{run, RunConfig, RunReport};
use semistab::scenarios::{Scenario, ScenarioSpec};
use semistab::{Error, SpectralVector, C64};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemistabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidParameter = 3,
    UnknownScenario = 4,
    Config = 5,
    Json = 6,
    Io = 7,
    /// Spectrum hits, sectoriality, eigensolver residuals and similar.
    Numerical = 8,
    BlowUp = 9,
    Panic = 10,
}

/// Built scenario: generator, input operator, expectations.
pub struct SemistabScenario {
    inner: Scenario,
}

/// Finished analysis run.
pub struct SemistabReport {
    inner: RunReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn status_of(e: &Error) -> SemistabStatus {
    match e {
        Error::InvalidParameter(_) | Error::InvalidGrid(_) | Error::NegativeTime(_) => {
            SemistabStatus::InvalidParameter
        }
        Error::LengthMismatch { .. } | Error::MissingGraphNorm(_) => SemistabStatus::InvalidParameter,
        Error::UnknownScenario(_) => SemistabStatus::UnknownScenario,
        Error::Config(_) => SemistabStatus::Config,
        Error::Json(_) => SemistabStatus::Json,
        Error::Io(_) => SemistabStatus::Io,
        Error::BlowUpSuspected { .. } => SemistabStatus::BlowUp,
        Error::SpectrumHit { .. } | Error::NotSectorial { .. } | Error::Eigensolver { .. } => {
            SemistabStatus::Numerical
        }
    }
}

struct Failure(SemistabStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SemistabStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SemistabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SemistabStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            SemistabStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SemistabStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure(SemistabStatus::Json, "interior NUL in output".into()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn scenario_ref<'a>(h: *const SemistabScenario) -> Result<&'a Scenario, Failure> {
    h.as_ref().map(|s| &s.inner).ok_or_else(|| null("scenario handle"))
}

unsafe fn read_vector(re: *const f64, im: *const f64, len: usize) -> Result<SpectralVector, Failure> {
    if len == 0 {
        return Ok(SpectralVector::zeros(0));
    }
    if re.is_null() {
        return Err(null("real part"));
    }
    let re = std::slice::from_raw_parts(re, len);
    let coeffs = if im.is_null() {
        re.iter().map(|&r| C64::new(r, 0.0)).collect()
    } else {
        let im = std::slice::from_raw_parts(im, len);
        re.iter().zip(im).map(|(&r, &i)| C64::new(r, i)).collect()
    };
    Ok(SpectralVector::new(coeffs))
}

unsafe fn write_vector(v: &SpectralVector, re: *mut f64, im: *mut f64) -> Result<(), Failure> {
    if v.is_empty() {
        return Ok(());
    }
    if re.is_null() || im.is_null() {
        return Err(null("output buffer"));
    }
    let re = std::slice::from_raw_parts_mut(re, v.len());
    let im = std::slice::from_raw_parts_mut(im, v.len());
    for ((r, i), c) in re.iter_mut().zip(im.iter_mut()).zip(v.coeffs()) {
        *r = c.re;
        *i = c.im;
    }
    Ok(())
}

/// Message of the last failure on this thread; empty if none. Owned by the library.
#[no_mangle]
pub extern "C" fn semistab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn semistab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn semistab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a built-in scenario; `truncation == 0` keeps its default mode count.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn semistab_scenario_builtin(
    name: *const c_char,
    truncation: usize,
    out: *mut *mut SemistabScenario,
) -> SemistabStatus {
    guard(|| {
        let name = read_str(name, "name")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut spec = ScenarioSpec::builtin(name)?;
        if truncation > 0 {
            spec = spec.with_truncation(truncation)?;
        }
        *out = Box::into_raw(Box::new(SemistabScenario { inner: spec.build()? }));
        Ok(())
    })
}

/// Builds a scenario from a JSON scenario spec or a full scenario dump.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn semistab_scenario_from_json(
    json: *const c_char,
    out: *mut *mut SemistabScenario,
) -> SemistabStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = match serde_json::from_str::<ScenarioSpec>(text) {
            Ok(spec) => spec.build()?,
            Err(_) => serde_json::from_str::<Scenario>(text).map_err(Error::from)?,
        };
        *out = Box::into_raw(Box::new(SemistabScenario { inner }));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn semistab_scenario_free(h: *mut SemistabScenario) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of modes; 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn semistab_scenario_modes(h: *const SemistabScenario) -> usize {
    h.as_ref().map_or(0, |s| s.inner.generator().len())
}

/// Copies the eigenvalues into `re`/`im`, each of length `semistab_scenario_modes`.
///
/// # Safety
/// `h` must be a live handle; `re` and `im` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn semistab_scenario_eigenvalues(
    h: *const SemistabScenario,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> SemistabStatus {
    guard(|| {
        let s = scenario_ref(h)?;
        let ev = s.generator().eigenvalues();
        if len != ev.len() {
            return Err(Error::LengthMismatch { expected: ev.len(), found: len }.into());
        }
        write_vector(&SpectralVector::new(ev.to_vec()), re, im)
    })
}

/// Full scenario as JSON; free the result with `semistab_string_free`.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn semistab_scenario_to_json(
    h: *const SemistabScenario,
    out: *mut *mut c_char,
) -> SemistabStatus {
    guard(|| {
        let s = scenario_ref(h)?;
        if out.is_null() {
            return Err(null("out"));
        }
        write_string(out, s.to_json()?)
    })
}

/// `T(t)x` in spectral coordinates. `x_im` may be null for real input.
///
/// # Safety
/// Input buffers must hold `len` doubles, output buffers likewise.
#[no_mangle]
pub unsafe extern "C" fn semistab_semigroup_apply(
    h: *const SemistabScenario,
    t: f64,
    x_re: *const f64,
    x_im: *const f64,
    out_re: *mut f64,
    out_im: *mut f64,
    len: usize,
) -> SemistabStatus {
    guard(|| {
        let s = scenario_ref(h)?;
        let x = read_vector(x_re, x_im, len)?;
        let y = s.generator().semigroup_apply(t, &x)?;
        write_vector(&y, out_re, out_im)
    })
}

/// `‖T(t)(−A)^(−β)‖` in coordinates, with its Riesz bracket.
///
/// # Safety
/// `h` must be a live handle; the output pointers must be valid (any may be null).
#[no_mangle]
pub unsafe extern "C" fn semistab_decay_norm(
    h: *const SemistabScenario,
    beta: f64,
    t: f64,
    value: *mut f64,
    lower: *mut f64,
    upper: *mut f64,
) -> SemistabStatus {
    guard(|| {
        let s = scenario_ref(h)?;
        let d = s.generator().operator_decay_norm(beta, t)?;
        for (p, v) in [(value, d.value), (lower, d.lower), (upper, d.upper)] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Runs the analyses of a JSON run config (same schema as the CLI's `--config`).
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn semistab_run(
    config_json: *const c_char,
    out: *mut *mut SemistabReport,
) -> SemistabStatus {
    guard(|| {
        let text = read_str(config_json, "config")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        *out = Box::into_raw(Box::new(SemistabReport { inner: run(&cfg)? }));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a report handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn semistab_report_free(h: *mut SemistabReport) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// 1 if every analysis ran and every expectation matched, 0 otherwise or for null.
///
/// # Safety
/// `h` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn semistab_report_expectations_met(h: *const SemistabReport) -> i32 {
    h.as_ref().map_or(0, |r| r.inner.expectations_met as i32)
}

/// Report as JSON; `canonical != 0` drops wall-clock timings.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn semistab_report_to_json(
    h: *const SemistabReport,
    canonical: i32,
    out: *mut *mut c_char,
) -> SemistabStatus {
    guard(|| {
        let r = h.as_ref().map(|r| &r.inner).ok_or_else(|| null("report handle"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let json = if canonical != 0 { r.canonical_json()? } else { r.to_json()? };
        write_string(out, json)
    })
}
