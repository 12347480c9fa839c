//! C interface to `greedy-degrade`.
//!
//! Every fallible function returns a [`GdStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and read
//! back with [`gd_last_error_message`]. Handles are opaque and owned by the
//! caller, who releases them with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use greedy_degrade::experiments::{run_oracle, OracleMethod};
use greedy_degrade::io::{parse_channel, ReportFile};
use greedy_degrade::{
    bounds, greedy_merge, random_channel, to_posterior_form, Channel, DegradeReport, Error, InputDistribution,
    PosteriorChannel,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed channel, JSON, index or size.
    InvalidInput = 2,
    /// A bound was evaluated outside the range where it is stated.
    BoundRange = 3,
    /// Exhaustive search refused an alphabet that is too large.
    Guard = 4,
    /// The operation needs a binary-input channel.
    NotBinary = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdOracleMethod {
    BruteForce = 0,
    DynamicProgramming = 1,
}

/// One merge: the two merged letters, named by their smallest original
/// output index, the loss in nats and the alphabet size before the merge.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdMergeStep {
    pub a: usize,
    pub b: usize,
    pub delta: f64,
    pub size_before: usize,
}

/// A validated channel together with its input distribution.
pub struct GdChannel {
    channel: Channel,
    input: InputDistribution,
    posterior: PosteriorChannel,
}

/// Result of a greedy degrade run.
pub struct GdReport {
    report: DegradeReport,
    file: ReportFile,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(e: &Error) -> GdStatus {
    match e {
        Error::BoundRange(_) => GdStatus::BoundRange,
        Error::Guard(_) => GdStatus::Guard,
        Error::NotBinary(_) => GdStatus::NotBinary,
        _ => GdStatus::InvalidInput,
    }
}

struct Failure(GdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(GdStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guarded(f: impl FnOnce() -> Result<(), Failure>) -> GdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GdStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GdStatus::Panic
        }
    }
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn borrow<'a, T>(handle: *const T, what: &str) -> Result<&'a T, Failure> {
    handle.as_ref().ok_or_else(|| null(what))
}

fn new_channel(channel: Channel, input: InputDistribution) -> Result<*mut GdChannel, Failure> {
    let posterior = to_posterior_form(&channel, &input)?;
    Ok(Box::into_raw(Box::new(GdChannel {
        channel,
        input,
        posterior,
    })))
}

/// Message of the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a channel from `rows`, a row-major `num_inputs x num_outputs`
/// array of `W(y|x)`, and `input_dist` of length `num_inputs`.
///
/// # Safety
/// `rows` and `input_dist` must point to arrays of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn gd_channel_new(
    rows: *const f64,
    num_inputs: usize,
    num_outputs: usize,
    input_dist: *const f64,
    out: *mut *mut GdChannel,
) -> GdStatus {
    guarded(|| {
        if rows.is_null() || input_dist.is_null() {
            return Err(null("rows or input_dist"));
        }
        let len = num_inputs
            .checked_mul(num_outputs)
            .ok_or_else(|| Failure(GdStatus::InvalidInput, "channel size overflows".into()))?;
        let flat = std::slice::from_raw_parts(rows, len);
        let rows: Vec<Vec<f64>> = if num_outputs == 0 {
            vec![Vec::new(); num_inputs]
        } else {
            flat.chunks(num_outputs).map(<[f64]>::to_vec).collect()
        };
        let input = InputDistribution::new(std::slice::from_raw_parts(input_dist, num_inputs).to_vec())?;
        let channel = Channel::new(rows)?;
        if channel.num_inputs() != input.len() {
            return Err(Failure(GdStatus::InvalidInput, "input_dist length differs from channel rows".into()));
        }
        write_out(out, new_channel(channel, input)?)
    })
}

/// Parses a channel file: `{"input_dist": [...], "channel": [[...], ...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gd_channel_from_json(json: *const c_char, renormalize: bool, out: *mut *mut GdChannel) -> GdStatus {
    guarded(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Failure(GdStatus::InvalidInput, "json is not UTF-8".into()))?;
        let (channel, input) = parse_channel(text, renormalize)?;
        write_out(out, new_channel(channel, input)?)
    })
}

/// Seeded random channel with flat-Dirichlet rows and input distribution.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_channel_random(
    num_inputs: usize,
    num_outputs: usize,
    seed: u64,
    out: *mut *mut GdChannel,
) -> GdStatus {
    guarded(|| {
        let (channel, input) = random_channel(num_inputs, num_outputs, seed)?;
        write_out(out, new_channel(channel, input)?)
    })
}

/// # Safety
/// `channel` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gd_channel_free(channel: *mut GdChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

/// Input alphabet size as given, including zero-probability inputs; 0 for null.
///
/// # Safety
/// `channel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gd_channel_num_inputs(channel: *const GdChannel) -> usize {
    channel.as_ref().map_or(0, |c| c.channel.num_inputs())
}

/// Output alphabet size as given, including zero-mass outputs; 0 for null.
///
/// # Safety
/// `channel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gd_channel_num_outputs(channel: *const GdChannel) -> usize {
    channel.as_ref().map_or(0, |c| c.channel.num_outputs())
}

/// Mutual information in nats.
///
/// # Safety
/// `channel` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_channel_mutual_information(channel: *const GdChannel, out: *mut f64) -> GdStatus {
    guarded(|| {
        let channel = borrow(channel, "channel")?;
        write_out(out, channel.posterior.mutual_information())
    })
}

/// Greedy merging down to at most `target` output letters.
///
/// # Safety
/// `channel` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_degrade(channel: *const GdChannel, target: usize, out: *mut *mut GdReport) -> GdStatus {
    guarded(|| {
        let channel = borrow(channel, "channel")?;
        let report = greedy_merge(&channel.posterior, target)?;
        let file = ReportFile::new(&report, &channel.channel, &channel.input, false)?;
        write_out(out, Box::into_raw(Box::new(GdReport { report, file })))
    })
}

/// # Safety
/// `report` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gd_report_free(report: *mut GdReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Total mutual-information loss in nats.
///
/// # Safety
/// `report` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_report_total_delta(report: *const GdReport, out: *mut f64) -> GdStatus {
    guarded(|| write_out(out, borrow(report, "report")?.report.total_delta))
}

/// Number of merges performed; 0 for null.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gd_report_num_steps(report: *const GdReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.steps.len())
}

/// # Safety
/// `report` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_report_step(report: *const GdReport, index: usize, out: *mut GdMergeStep) -> GdStatus {
    guarded(|| {
        let steps = &borrow(report, "report")?.report.steps;
        let s = steps.get(index).ok_or_else(|| {
            Failure(GdStatus::InvalidInput, format!("step {index} out of range for {} steps", steps.len()))
        })?;
        write_out(
            out,
            GdMergeStep {
                a: s.a,
                b: s.b,
                delta: s.delta,
                size_before: s.size_before,
            },
        )
    })
}

/// Copies the degrading map (original output -> merged output) into `buf`.
/// `needed` receives the map length; with `buf` null only `needed` is set.
///
/// # Safety
/// `buf` must be null or valid for `capacity` writes; `needed` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_report_map(
    report: *const GdReport,
    buf: *mut usize,
    capacity: usize,
    needed: *mut usize,
) -> GdStatus {
    guarded(|| {
        let map = borrow(report, "report")?.report.map.assignment();
        write_out(needed, map.len())?;
        if buf.is_null() {
            return Ok(());
        }
        if capacity < map.len() {
            return Err(Failure(
                GdStatus::BufferTooSmall,
                format!("map needs {} entries, buffer holds {capacity}", map.len()),
            ));
        }
        ptr::copy_nonoverlapping(map.as_ptr(), buf, map.len());
        Ok(())
    })
}

/// The merged channel as a new handle.
///
/// # Safety
/// `report` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_report_result(report: *const GdReport, out: *mut *mut GdChannel) -> GdStatus {
    guarded(|| {
        let file = &borrow(report, "report")?.file;
        let input = InputDistribution::new(file.input_dist.clone())?;
        let channel = Channel::new(file.channel.clone())?;
        write_out(out, new_channel(channel, input)?)
    })
}

/// The report as JSON; release it with [`gd_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_report_to_json(report: *const GdReport, out: *mut *mut c_char) -> GdStatus {
    guarded(|| {
        let json = borrow(report, "report")?.file.to_json();
        let c = CString::new(json).expect("JSON has no NUL bytes");
        write_out(out, c.into_raw())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_mu(num_inputs: usize, out: *mut f64) -> GdStatus {
    guarded(|| write_out(out, bounds::mu(num_inputs)?))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_nu(num_inputs: usize, out: *mut f64) -> GdStatus {
    guarded(|| write_out(out, bounds::nu(num_inputs)?))
}

/// Per-merge bound at alphabet size `num_outputs`; needs `num_outputs > 2 num_inputs`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_theorem1_rhs(num_inputs: usize, num_outputs: usize, out: *mut f64) -> GdStatus {
    guarded(|| write_out(out, bounds::theorem1_rhs(num_inputs, num_outputs)?))
}

/// Cumulative bound for target size `target`; needs `target >= 2 num_inputs`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_corollary_rhs(num_inputs: usize, target: usize, out: *mut f64) -> GdStatus {
    guarded(|| write_out(out, bounds::corollary_rhs(num_inputs, target)?))
}

/// Optimal loss over all degradings to at most `target` letters. Brute force
/// handles up to 12 output letters; the DP needs a binary input.
///
/// # Safety
/// `channel` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gd_oracle_optimal(
    channel: *const GdChannel,
    target: usize,
    method: GdOracleMethod,
    out: *mut f64,
) -> GdStatus {
    guarded(|| {
        let channel = borrow(channel, "channel")?;
        let method = match method {
            GdOracleMethod::BruteForce => OracleMethod::BruteForce,
            GdOracleMethod::DynamicProgramming => OracleMethod::DynamicProgramming,
        };
        write_out(out, run_oracle(&channel.posterior, target, method)?.optimal_delta)
    })
}
