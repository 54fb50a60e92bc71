//! C ABI over the momentopo library.
//!
//! Objects cross the boundary as opaque handles created by `mt_*_new`,
//! `mt_*_load` or `mt_*_read` functions and released with the matching
//! `mt_*_free`. Every fallible call returns an [`MtStatus`]; on failure the
//! message is available from [`mt_last_error`] on the same thread.
//!
//! Strings are returned by copying into a caller buffer. Those functions
//! return the length needed including the terminating NUL, so a call with a
//! zero-length buffer sizes the allocation.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use momentopo::campaign::simulate_trial;
use momentopo::estimator::{candidate_topologies, select_topology, EstimationReport, EstimatorConfig};
use momentopo::fixtures::{self, Fixture};
use momentopo::trial::{read_trial, write_trial, TrialRecord};
use momentopo::Error;

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtStatus {
    Ok = 0,
    InvalidArgument = 1,
    OutOfRange = 2,
    Aliasing = 3,
    NumericalDivergence = 4,
    Parse = 5,
    Validation = 6,
    SchemaVersion = 7,
    Io = 8,
    Config = 9,
    NullPointer = 10,
    /// A Rust panic was caught at the boundary.
    Internal = 11,
}

impl From<&Error> for MtStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidArgument(_) => MtStatus::InvalidArgument,
            Error::OutOfRange(_) => MtStatus::OutOfRange,
            Error::Aliasing { .. } => MtStatus::Aliasing,
            Error::NumericalDivergence { .. } => MtStatus::NumericalDivergence,
            Error::Parse { .. } => MtStatus::Parse,
            Error::Validation(_) => MtStatus::Validation,
            Error::SchemaVersion { .. } => MtStatus::SchemaVersion,
            Error::Io { .. } => MtStatus::Io,
            Error::Config(_) => MtStatus::Config,
        }
    }
}

/// Object description plus true topology and excitation protocol.
pub struct MtFixture(Fixture);

/// A recorded trial.
pub struct MtTrial(TrialRecord);

/// Hypothesis errors and selection for one trial.
pub struct MtReport(EstimationReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: MtStatus, msg: impl Into<String>) -> MtStatus {
    set_error(msg.into());
    status
}

/// Runs `f` with panics and errors turned into status codes.
fn guard(f: impl FnOnce() -> Result<(), MtStatus>) -> MtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MtStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(MtStatus::Internal, "panic in momentopo"),
    }
}

fn lib(e: Error) -> MtStatus {
    let status = MtStatus::from(&e);
    set_error(e.to_string());
    status
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, MtStatus> {
    if p.is_null() {
        return Err(fail(MtStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(MtStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, MtStatus> {
    p.as_ref()
        .ok_or_else(|| fail(MtStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, MtStatus> {
    p.as_mut()
        .ok_or_else(|| fail(MtStatus::NullPointer, format!("{what} is null")))
}

/// Copies `s` into `buf` if it fits and returns the needed size.
unsafe fn copy_out(s: &str, buf: *mut c_char, len: usize) -> usize {
    let needed = s.len() + 1;
    if !buf.is_null() && len >= needed {
        ptr::copy_nonoverlapping(s.as_ptr().cast::<c_char>(), buf, s.len());
        *buf.add(s.len()) = 0;
    }
    needed
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Looks up a built-in fixture such as `"revolute-demo"`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mt_fixture_builtin(name: *const c_char, out: *mut *mut MtFixture) -> MtStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let name = str_arg(name, "name")?;
        let fx = fixtures::builtin(name)
            .ok_or_else(|| fail(MtStatus::InvalidArgument, format!("unknown fixture {name:?}")))?;
        *out = Box::into_raw(Box::new(MtFixture(fx)));
        Ok(())
    })
}

/// Loads and validates a fixture TOML file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mt_fixture_load(path: *const c_char, out: *mut *mut MtFixture) -> MtStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let path = PathBuf::from(str_arg(path, "path")?);
        let fx = Fixture::from_file(&path).map_err(lib)?;
        *out = Box::into_raw(Box::new(MtFixture(fx)));
        Ok(())
    })
}

/// # Safety
/// `fixture` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mt_fixture_free(fixture: *mut MtFixture) {
    if !fixture.is_null() {
        drop(Box::from_raw(fixture));
    }
}

/// Number of joints of the fixture's object; 0 for a null handle.
///
/// # Safety
/// `fixture` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mt_fixture_joint_count(fixture: *const MtFixture) -> usize {
    fixture.as_ref().map_or(0, |f| f.0.object.joint_count())
}

/// Simulates one exploration trial of `duration` seconds.
///
/// # Safety
/// `fixture` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mt_simulate(
    fixture: *const MtFixture,
    seed: u64,
    duration: f64,
    out: *mut *mut MtTrial,
) -> MtStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let fx = ref_arg(fixture, "fixture")?;
        let (record, _) = simulate_trial(&fx.0, seed, duration).map_err(lib)?;
        *out = Box::into_raw(Box::new(MtTrial(record)));
        Ok(())
    })
}

/// Reads a `trial/v1` file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mt_trial_read(path: *const c_char, out: *mut *mut MtTrial) -> MtStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let path = PathBuf::from(str_arg(path, "path")?);
        let record = read_trial(&path).map_err(lib)?;
        *out = Box::into_raw(Box::new(MtTrial(record)));
        Ok(())
    })
}

/// Writes a trial in the `trial/v1` format.
///
/// # Safety
/// `trial` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mt_trial_write(trial: *const MtTrial, path: *const c_char) -> MtStatus {
    guard(|| {
        let trial = ref_arg(trial, "trial")?;
        let path = PathBuf::from(str_arg(path, "path")?);
        write_trial(&trial.0, &path).map_err(lib)
    })
}

/// # Safety
/// `trial` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mt_trial_free(trial: *mut MtTrial) {
    if !trial.is_null() {
        drop(Box::from_raw(trial));
    }
}

/// Number of samples; 0 for a null handle.
///
/// # Safety
/// `trial` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mt_trial_sample_count(trial: *const MtTrial) -> usize {
    trial.as_ref().map_or(0, |t| t.0.samples.len())
}

/// Fraction of samples flagged as moving; 0 for a null handle.
///
/// # Safety
/// `trial` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mt_trial_motion_fraction(trial: *const MtTrial) -> f64 {
    trial.as_ref().map_or(0.0, |t| t.0.motion_fraction())
}

/// Copies the recorded true topology (for example `"R"`) into `buf`.
/// Returns the size needed, or 0 when the trial carries no true topology.
///
/// # Safety
/// `trial` must be null or a live handle; `buf` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn mt_trial_true_topology(trial: *const MtTrial, buf: *mut c_char, len: usize) -> usize {
    match trial.as_ref().and_then(|t| t.0.metadata.true_topology.as_ref()) {
        Some(t) => copy_out(&t.to_string(), buf, len),
        None => 0,
    }
}

/// Scores every candidate topology of the trial's object against the trial
/// and selects the best. `smoothing_window` must be odd; pass 0 for the
/// default.
///
/// # Safety
/// `trial` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mt_estimate(
    trial: *const MtTrial,
    smoothing_window: usize,
    out: *mut *mut MtReport,
) -> MtStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let trial = ref_arg(trial, "trial")?;
        let mut cfg = EstimatorConfig::default();
        if smoothing_window != 0 {
            cfg.smoothing_window = smoothing_window;
        }
        let spec = &trial.0.metadata.object;
        let candidates = candidate_topologies(spec).map_err(lib)?;
        let report = select_topology(&trial.0, spec, &candidates, &cfg).map_err(lib)?;
        *out = Box::into_raw(Box::new(MtReport(report)));
        Ok(())
    })
}

/// # Safety
/// `report` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mt_report_free(report: *mut MtReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of scored candidates; 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mt_report_candidate_count(report: *const MtReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.errors.len())
}

/// Error of candidate `index` and its topology string.
///
/// # Safety
/// `report` must be a live handle, `error` a valid pointer or null, and
/// `buf` must hold `len` bytes or be null.
#[no_mangle]
pub unsafe extern "C" fn mt_report_candidate(
    report: *const MtReport,
    index: usize,
    error: *mut f64,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> MtStatus {
    guard(|| {
        let report = ref_arg(report, "report")?;
        let c = report.0.errors.get(index).ok_or_else(|| {
            fail(
                MtStatus::OutOfRange,
                format!("candidate {index} of {}", report.0.errors.len()),
            )
        })?;
        if let Some(e) = error.as_mut() {
            *e = c.error;
        }
        let n = copy_out(&c.topology.to_string(), buf, len);
        if let Some(needed) = needed.as_mut() {
            *needed = n;
        }
        Ok(())
    })
}

/// Copies the selected topology into `buf` and returns the size needed;
/// 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle; `buf` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn mt_report_selected(report: *const MtReport, buf: *mut c_char, len: usize) -> usize {
    match report.as_ref() {
        Some(r) => copy_out(&r.0.selected.to_string(), buf, len),
        None => 0,
    }
}

/// Whether the candidates were too close to call or the object barely moved.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mt_report_inconclusive(report: *const MtReport) -> bool {
    report.as_ref().is_none_or(|r| r.0.inconclusive)
}
