//! C ABI for the one-bit field reconstruction library.
//!
//! Conventions, uniform across the surface:
//!
//! - Handles (`DfrsField`, `DfrsPartition`, ...) are opaque pointers owned
//!   by the library. Constructors write the new handle through an
//!   out-pointer and return a status; each handle type has a paired
//!   `dfrs_*_free` which accepts null.
//! - Every fallible call returns [`DfrsStatus`]. On any non-OK status the
//!   thread-local error message is readable via [`dfrs_last_error`].
//! - Out-parameters are written only when the call returns
//!   `DFRS_STATUS_OK`.
//! - No panic crosses the boundary; an internal panic maps to
//!   `DFRS_STATUS_PANIC`.
//! - Labels follow the library convention: supercells `j`, subcells `k`,
//!   and snapshots `t` are 1-based; sensor indices are 0-based.

use std::cell::RefCell;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use dfrs_core::analysis;
use dfrs_core::fields::{FieldKind, FieldModel};
use dfrs_core::geometry::{self, CellPartition, Deployment};
use dfrs_core::reconstruction::{self, FieldEstimate};
use dfrs_core::sensing::{self, CorrelationMode, NoiseFamily, NoiseModel, ThresholdModel};
use dfrs_core::Error;

/// Result of every fallible call in this API.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfrsStatus {
    /// Success; out-parameters are valid.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A scalar or array argument was rejected by the model.
    InvalidArgument = 2,
    /// An array length or label did not match the model's shape.
    DimensionMismatch = 3,
    /// A coordinate or value fell outside its admissible interval.
    OutOfRange = 4,
    /// A count violated a divisibility requirement of the schedule.
    Divisibility = 5,
    /// The requested quantity has no closed form for this model.
    NoClosedForm = 6,
    /// The noise density is not regular enough for Fisher information.
    NonRegularPdf = 7,
    /// A wire message or tally violated the transport contract.
    Protocol = 8,
    /// Configuration-file error (not reachable through this API's own
    /// calls; present so core statuses map totally).
    Config = 9,
    /// An I/O error from the underlying platform.
    Io = 10,
    /// The library caught an internal panic; state may be stale but the
    /// process is intact.
    Panic = 11,
}

/// Field model handle.
pub struct DfrsField(FieldModel);
/// Cell partition handle.
pub struct DfrsPartition(CellPartition);
/// Sensor deployment handle.
pub struct DfrsDeployment(Deployment);
/// Noise model handle.
pub struct DfrsNoise(NoiseModel);
/// Random threshold model handle.
pub struct DfrsThreshold(ThresholdModel);
/// Reconstructed field handle.
pub struct DfrsEstimate(FieldEstimate);

/// Noise families constructible through [`dfrs_noise_new`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfrsNoiseFamily {
    /// No noise; parameters ignored.
    Zero = 0,
    /// Uniform on `[-b, b]`; parameters ignored.
    Uniform = 1,
    /// Symmetric two-point on `{-b, +b}`; parameters ignored.
    Rademacher = 2,
    /// Zero-mean two-point taking `+param1` and `-param2`.
    AsymmetricTwoPoint = 3,
    /// Gaussian with standard deviation `param1`, truncated to `[-b, b]`.
    TruncatedGaussian = 4,
    /// Raised-cosine density supported on `[-b, b]`; parameters ignored.
    RaisedCosine = 5,
}

/// Temporal correlation of one sensor's random series.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfrsCorrelation {
    /// Fresh independent draw at every snapshot.
    IidPerSnapshot = 0,
    /// One draw per sensor, repeated across snapshots.
    FixedPerSensor = 1,
    /// Alternating `+z, -z` pairs.
    AntitheticPair = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_last_error(msg: String) {
    LAST_ERROR.with(|e| {
        let mut e = e.borrow_mut();
        e.clear();
        e.extend_from_slice(msg.as_bytes());
    });
}

fn status_of(err: &Error) -> DfrsStatus {
    match err {
        Error::OutOfDomain { .. } | Error::OutOfRange { .. } => DfrsStatus::OutOfRange,
        Error::BadSnapshot { .. } | Error::DimensionMismatch { .. } => {
            DfrsStatus::DimensionMismatch
        }
        Error::Divisibility { .. } => DfrsStatus::Divisibility,
        Error::InvalidParameter { .. } | Error::NonMonotoneDither { .. } => {
            DfrsStatus::InvalidArgument
        }
        Error::MalformedHeader { .. }
        | Error::WrongPayloadLength { .. }
        | Error::WrongCount { .. } => DfrsStatus::Protocol,
        Error::NoClosedForm { .. } => DfrsStatus::NoClosedForm,
        Error::NonRegularPdf => DfrsStatus::NonRegularPdf,
        Error::Config { .. } => DfrsStatus::Config,
        Error::Io { .. } => DfrsStatus::Io,
    }
}

fn fail_core(err: Error) -> DfrsStatus {
    let status = status_of(&err);
    set_last_error(err.to_string());
    status
}

fn fail(status: DfrsStatus, msg: &str) -> DfrsStatus {
    set_last_error(msg.to_string());
    status
}

/// Run `f`, converting any panic into `DFRS_STATUS_PANIC`.
fn guard<F: FnOnce() -> DfrsStatus>(f: F) -> DfrsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown internal panic".to_string());
            fail(DfrsStatus::Panic, &format!("internal panic: {msg}"))
        }
    }
}

/// View `(ptr, len)` as a slice; `(null, 0)` is the empty slice, while a
/// null pointer with nonzero length is rejected by the caller.
unsafe fn slice_arg<'a>(ptr: *const f64, len: usize) -> Option<&'a [f64]> {
    if len == 0 {
        Some(&[])
    } else if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

unsafe fn put<T>(out: *mut T, value: T) {
    *out = value;
}

unsafe fn put_handle<H>(out: *mut *mut H, handle: H) {
    *out = Box::into_raw(Box::new(handle));
}

unsafe fn free_handle<H>(ptr: *mut H) {
    if !ptr.is_null() {
        drop(Box::from_raw(ptr));
    }
}

macro_rules! need {
    ($ptr:expr, $name:literal) => {
        if $ptr.is_null() {
            return fail(
                DfrsStatus::NullArgument,
                concat!($name, " must not be null"),
            );
        }
    };
}

/// Library version as a static NUL-terminated string; never freed by the
/// caller.
#[no_mangle]
pub extern "C" fn dfrs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copy the calling thread's last error message into `buf` as a
/// NUL-terminated string, truncating to `cap - 1` bytes. Returns the full
/// message length in bytes (excluding the NUL), so calling with
/// `(NULL, 0)` sizes a buffer. The message is replaced by each failing
/// call on the same thread and survives intervening successes.
///
/// # Safety
///
/// `buf` must be null or valid for writing `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn dfrs_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = e.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(e.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        e.len()
    })
}

/// Create a spatially constant field: `values[t-1]` at snapshot `t`.
/// `values_len` must equal `t_count` and every value must lie in
/// `[-range, range]`.
///
/// # Safety
///
/// `values` must point to `values_len` readable doubles (or be null with
/// `values_len == 0`); `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn dfrs_field_constant_new(
    d: usize,
    t_count: usize,
    range: f64,
    values: *const f64,
    values_len: usize,
    out: *mut *mut DfrsField,
) -> DfrsStatus {
    need!(out, "out");
    let Some(values) = slice_arg(values, values_len) else {
        return fail(DfrsStatus::NullArgument, "values must not be null");
    };
    let values = values.to_vec();
    guard(|| match FieldModel::new(d, t_count, range, FieldKind::Constant { values }) {
        Ok(f) => {
            put_handle(out, DfrsField(f));
            DfrsStatus::Ok
        }
        Err(e) => fail_core(e),
    })
}

/// Create an affine field `slopes . x + offsets[t-1]`. `slopes_len` must
/// equal `d` and `offsets_len` must equal `t_count`; the field must stay
/// within `[-range, range]` over the unit cube.
///
/// # Safety
///
/// `slopes` and `offsets` must point to their stated number of readable
/// doubles; `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn dfrs_field_linear_new(
    d: usize,
    t_count: usize,
    range: f64,
    slopes: *const f64,
    slopes_len: usize,
    offsets: *const f64,
    offsets_len: usize,
    out: *mut *mut DfrsField,
) -> DfrsStatus {
    need!(out, "out");
    let Some(slopes) = slice_arg(slopes, slopes_len) else {
        return fail(DfrsStatus::NullArgument, "slopes must not be null");
    };
    let Some(offsets) = slice_arg(offsets, offsets_len) else {
        return fail(DfrsStatus::NullArgument, "offsets must not be null");
    };
    let kind = FieldKind::LipschitzLinear {
        slopes: slopes.to_vec(),
        offsets: offsets.to_vec(),
    };
    guard(|| match FieldModel::new(d, t_count, range, kind) {
        Ok(f) => {
            put_handle(out, DfrsField(f));
            DfrsStatus::Ok
        }
        Err(e) => fail_core(e),
    })
}

/// Create the smooth field
/// `amplitude * sin(2 pi frequencies . x + phases[t-1])`.
/// `frequencies_len` must equal `d` and `phases_len` must equal `t_count`;
/// `amplitude` must not exceed `range`.
///
/// # Safety
///
/// `frequencies` and `phases` must point to their stated number of
/// readable doubles; `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn dfrs_field_sinusoidal_new(
    d: usize,
    t_count: usize,
    range: f64,
    amplitude: f64,
    frequencies: *const f64,
    frequencies_len: usize,
    phases: *const f64,
    phases_len: usize,
    out: *mut *mut DfrsField,
) -> DfrsStatus {
    need!(out, "out");
    let Some(frequencies) = slice_arg(frequencies, frequencies_len) else {
        return fail(DfrsStatus::NullArgument, "frequencies must not be null");
    };
    let Some(phases) = slice_arg(phases, phases_len) else {
        return fail(DfrsStatus::NullArgument, "phases must not be null");
    };
    let kind = FieldKind::Sinusoidal {
        amplitude,
        frequencies: frequencies.to_vec(),
        phases: phases.to_vec(),
    };
    guard(|| match FieldModel::new(d, t_count, range, kind) {
        Ok(f) => {
            put_handle(out, DfrsField(f));
            DfrsStatus::Ok
        }
        Err(e) => fail_core(e),
    })
}

/// Create the discontinuous benchmark field: two levels split by the
/// hyperplane `normal . x = offset`, taking `level_high` where
/// `normal . x >= offset`, constant over time. `normal_len` must equal
/// `d`.
///
/// # Safety
///
/// `normal` must point to `normal_len` readable doubles; `out` must be
/// valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn dfrs_field_step_new(
    d: usize,
    t_count: usize,
    range: f64,
    normal: *const f64,
    normal_len: usize,
    offset: f64,
    level_low: f64,
    level_high: f64,
    out: *mut *mut DfrsField,
) -> DfrsStatus {
    need!(out, "out");
    let Some(normal) = slice_arg(normal, normal_len) else {
        return fail(DfrsStatus::NullArgument, "normal must not be null");
    };
    let kind = FieldKind::PiecewiseStep {
        normal: normal.to_vec(),
        offset,
        level_low,
        level_high,
    };
    guard(|| match FieldModel::new(d, t_count, range, kind) {
        Ok(f) => {
            put_handle(out, DfrsField(f));
            DfrsStatus::Ok
        }
        Err(e) => fail_core(e),
    })
}

/// Evaluate the true field at position `x` (inside the unit cube, length
/// `x_len == d`) and 1-based snapshot `t`.
///
/// # Safety
///
/// `field` must be a live handle from a `dfrs_field_*_new` call; `x` must
/// point to `x_len` readable doubles; `out_value` must be valid for
/// writing one double.
#[no_mangle]
pub unsafe extern "C" fn dfrs_field_eval(
    field: *const DfrsField,
    x: *const f64,
    x_len: usize,
    t: usize,
    out_value: *mut f64,
) -> DfrsStatus {
    need!(field, "field");
    need!(out_value, "out_value");
    let Some(x) = slice_arg(x, x_len) else {
        return fail(DfrsStatus::NullArgument, "x must not be null");
    };
    let field = &(*field).0;
    guard(|| match field.evaluate(x, t) {
        Ok(v) => {
            put(out_value, v);
            DfrsStatus::Ok
        }
        Err(e) => fail_core(e),
    })
}

/// Release a field handle. Null is a no-op.
///
/// # Safety
///
/// `field` must be null or a handle not freed before; it must not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn dfrs_field_free(field: *mut DfrsField) {
    free_handle(field);
}

/// Create the two-level partition of the `d`-dimensional unit cube:
/// `l` supercells per axis, each split into `m` subcells per axis
/// (`L = l^d` supercells, `M = m^d` subcells each).
///
/// # Safety
///
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn dfrs_partition_new(
    d: usize,
    l: usize,
    m: usize,
    out: *mut *mut DfrsPartition,
) -> DfrsStatus {
    need!(out, "out");
    guard(|| match CellPartition::new(d, l, m) {
        Ok(p) => {
            put_handle(out, DfrsPartition(p));
            DfrsStatus::Ok
        }
        Err(e) => fail_core(e),
    })
}

/// Release a partition handle. Null is a no-op.
///
/// # Safety
///
/// `partition` must be null or a handle not freed before; it must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dfrs_partition_free(partition: *mut DfrsPartition) {
    free_handle(partition);
}

/// Deploy exactly `per_subcell` sensors in every subcell, on a regular
/// lattice within each.
///
/// # Safety
///
/// `partition` must be a live handle; `out` must be valid for writing one
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn dfrs_deploy_grid(
    partition: *const DfrsPartition,
    per_subcell: usize,
    out: *mut *mut DfrsDeployment,
) -> DfrsStatus {
    need!(partition, "partition");
    need!(out, "out");
    let partition = &(*partition).0;
    guard(|| match geometry::deploy_grid(partition, per_subcell) {
        Ok(dep) => {
            put_handle(out, DfrsDeployment(dep));
            DfrsStatus::Ok
        }
        Err(e) => fail_core(e),
    })
}

/// Deploy `n_total` sensors independently and uniformly in the unit cube,
/// reproducibly from `seed`.
///
/// # Safety
///
/// `partition` must be a live handle; `out` must be valid for writing one
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn dfrs_deploy_iid_uniform(
    partition: *const DfrsPartition,
    n_total: usize,
    seed: u64,
    out: *mut *mut DfrsDeployment,
) -> DfrsStatus {
    need!(partition, "partition");
    need!(out, "out");
    let partition = &(*partition).0;
    guard(|| match geometry::deploy_iid_uniform(partition, n_total, seed) {
        Ok(dep) => {
            put_handle(out, DfrsDeployment(dep));
            DfrsStatus::Ok
        }
        Err(e) => fail_core(e),
    })
}

/// Number of deployed sensors.
///
/// # Safety
///
/// `deployment` must be a live handle; `out_count` must be valid for
/// writing one value.
#[no_mangle]
pub unsafe extern "C" fn dfrs_deployment_sensor_count(
    deployment: *const DfrsDeployment,
    out_count: *mut usize,
) -> DfrsStatus {
    need!(deployment, "deployment");
    need!(out_count, "out_count");
    put(out_count, (*deployment).0.sensor_count());
    DfrsStatus::Ok
}

/// Copy the position of 0-based sensor `i` into `buf`; `buf_len` must be
/// at least the partition dimension `d`, and exactly `d` doubles are
/// written.
///
/// # Safety
///
/// `deployment` must be a live handle; `buf` must be valid for writing
/// `buf_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dfrs_deployment_position(
    deployment: *const DfrsDeployment,
    i: usize,
    buf: *mut f64,
    buf_len: usize,
) -> DfrsStatus {
    need!(deployment, "deployment");
    need!(buf, "buf");
    let dep = &(*deployment).0;
    if i >= dep.sensor_count() {
        return fail(
            DfrsStatus::OutOfRange,
            &format!("sensor index {i} out of range (N = {})", dep.sensor_count()),
        );
    }
    let pos = dep.position(i);
    if buf_len < pos.len() {
        return fail(
            DfrsStatus::DimensionMismatch,
            &format!("buffer holds {buf_len} doubles, position needs {}", pos.len()),
        );
    }
    std::ptr::copy_nonoverlapping(pos.as_ptr(), buf, pos.len());
    DfrsStatus::Ok
}

/// Release a deployment handle. Null is a no-op.
///
/// # Safety
///
/// `deployment` must be null or a handle not freed before; it must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dfrs_deployment_free(deployment: *mut DfrsDeployment) {
    free_handle(deployment);
}

/// Create a zero-mean noise model bounded by `b`. `param1`/`param2` carry
/// the family-specific parameters (see [`DfrsNoiseFamily`]); unused ones
/// are ignored.
///
/// # Safety
///
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn dfrs_noise_new(
    family: DfrsNoiseFamily,
    param1: f64,
    param2: f64,
    b: f64,
    correlation: DfrsCorrelation,
    out: *mut *mut DfrsNoise,
) -> DfrsStatus {
    need!(out, "out");
    let family = match family {
        DfrsNoiseFamily::Zero => NoiseFamily::Zero,
        DfrsNoiseFamily::Uniform => NoiseFamily::Uniform,
        DfrsNoiseFamily::Rademacher => NoiseFamily::Rademacher,
        DfrsNoiseFamily::AsymmetricTwoPoint => NoiseFamily::AsymmetricTwoPoint {
            up: param1,
            down: param2,
        },
        DfrsNoiseFamily::TruncatedGaussian => NoiseFamily::TruncatedGaussian { sigma: param1 },
        DfrsNoiseFamily::RaisedCosine => NoiseFamily::RaisedCosine,
    };
    let correlation = correlation_of(correlation);
    guard(|| match NoiseModel::new(family, b, correlation) {
        Ok(n) => {
            put_handle(out, DfrsNoise(n));
            DfrsStatus::Ok
        }
        Err(e) => fail_core(e),
    })
}

fn correlation_of(c: DfrsCorrelation) -> CorrelationMode {
    match c {
        DfrsCorrelation::IidPerSnapshot => CorrelationMode::IidPerSnapshot,
        DfrsCorrelation::FixedPerSensor => CorrelationMode::FixedPerSensor,
        DfrsCorrelation::AntitheticPair => CorrelationMode::AntitheticPair,
    }
}

/// Release a noise handle. Null is a no-op.
///
/// # Safety
///
/// `noise` must be null or a handle not freed before; it must not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn dfrs_noise_free(noise: *mut DfrsNoise) {
    free_handle(noise);
}

/// Create the random-threshold model: thresholds drawn uniformly from
/// `[-c, c]`. `c` must cover the signal-plus-noise range `a + b`.
///
/// # Safety
///
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn dfrs_threshold_new(
    c: f64,
    correlation: DfrsCorrelation,
    out: *mut *mut DfrsThreshold,
) -> DfrsStatus {
    need!(out, "out");
    let correlation = correlation_of(correlation);
    guard(|| match ThresholdModel::new(c, correlation) {
        Ok(t) => {
            put_handle(out, DfrsThreshold(t));
            DfrsStatus::Ok
        }
        Err(e) => fail_core(e),
    })
}

/// Release a threshold handle. Null is a no-op.
///
/// # Safety
///
/// `threshold` must be null or a handle not freed before; it must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dfrs_threshold_free(threshold: *mut DfrsThreshold) {
    free_handle(threshold);
}

/// Run one full simulation pass: every sensor observes, quantizes with
/// its own reproducible randomness derived from `seed`, and the fusion
/// rule produces the piecewise-constant reconstruction. The deployment
/// must place the same count in every subcell.
///
/// # Safety
///
/// `field`, `deployment`, `noise`, and `threshold` must be live handles;
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn dfrs_estimate_direct(
    field: *const DfrsField,
    deployment: *const DfrsDeployment,
    noise: *const DfrsNoise,
    threshold: *const DfrsThreshold,
    seed: u64,
    out: *mut *mut DfrsEstimate,
) -> DfrsStatus {
    need!(field, "field");
    need!(deployment, "deployment");
    need!(noise, "noise");
    need!(threshold, "threshold");
    need!(out, "out");
    let field = &(*field).0;
    let deployment = &(*deployment).0;
    let noise = &(*noise).0;
    let threshold = &(*threshold).0;
    guard(
        || match reconstruction::estimate_direct(field, deployment, noise, threshold, seed) {
            Ok(est) => {
                put_handle(out, DfrsEstimate(est));
                DfrsStatus::Ok
            }
            Err(e) => fail_core(e),
        },
    )
}

/// Reconstructed value of 1-based supercell `j` at 1-based snapshot `t`.
///
/// # Safety
///
/// `estimate` must be a live handle; `out_value` must be valid for
/// writing one double.
#[no_mangle]
pub unsafe extern "C" fn dfrs_estimate_value(
    estimate: *const DfrsEstimate,
    t: usize,
    j: usize,
    out_value: *mut f64,
) -> DfrsStatus {
    need!(estimate, "estimate");
    need!(out_value, "out_value");
    let est = &(*estimate).0;
    let l_count = est.partition().supercell_count();
    if t == 0 || t > est.snapshots() {
        return fail(
            DfrsStatus::OutOfRange,
            &format!("snapshot {t} out of range (T = {})", est.snapshots()),
        );
    }
    if j == 0 || j > l_count {
        return fail(
            DfrsStatus::OutOfRange,
            &format!("supercell {j} out of range (L = {l_count})"),
        );
    }
    put(out_value, est.value(t, j));
    DfrsStatus::Ok
}

/// Evaluate the reconstruction at position `x` (length `x_len == d`) and
/// 1-based snapshot `t`.
///
/// # Safety
///
/// `estimate` must be a live handle; `x` must point to `x_len` readable
/// doubles; `out_value` must be valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn dfrs_estimate_evaluate(
    estimate: *const DfrsEstimate,
    x: *const f64,
    x_len: usize,
    t: usize,
    out_value: *mut f64,
) -> DfrsStatus {
    need!(estimate, "estimate");
    need!(out_value, "out_value");
    let Some(x) = slice_arg(x, x_len) else {
        return fail(DfrsStatus::NullArgument, "x must not be null");
    };
    let est = &(*estimate).0;
    guard(|| match est.evaluate(x, t) {
        Ok(v) => {
            put(out_value, v);
            DfrsStatus::Ok
        }
        Err(e) => fail_core(e),
    })
}

/// Release an estimate handle. Null is a no-op.
///
/// # Safety
///
/// `estimate` must be null or a handle not freed before; it must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dfrs_estimate_free(estimate: *mut DfrsEstimate) {
    free_handle(estimate);
}

/// Pointwise mean-squared-error guarantee for a design with `l_count`
/// supercells, `m_count` subcells each, `n_total` sensors, and threshold
/// range `c`, evaluated at position `x` and snapshot `t`. Writes the
/// local (smoothness at `x`) and global (worst-case smoothness) bounds.
///
/// # Safety
///
/// `field` must be a live handle; `x` must point to `x_len` readable
/// doubles; `out_local` and `out_global` must each be valid for writing
/// one double.
#[no_mangle]
pub unsafe extern "C" fn dfrs_pointwise_mse_bound(
    field: *const DfrsField,
    l_count: usize,
    m_count: usize,
    n_total: usize,
    c: f64,
    x: *const f64,
    x_len: usize,
    t: usize,
    out_local: *mut f64,
    out_global: *mut f64,
) -> DfrsStatus {
    need!(field, "field");
    need!(out_local, "out_local");
    need!(out_global, "out_global");
    let Some(x) = slice_arg(x, x_len) else {
        return fail(DfrsStatus::NullArgument, "x must not be null");
    };
    let field = &(*field).0;
    guard(
        || match analysis::pointwise_mse_bound(field, l_count, m_count, n_total, c, x, t) {
            Ok((local, global)) => {
                put(out_local, local);
                put(out_global, global);
                DfrsStatus::Ok
            }
            Err(e) => fail_core(e),
        },
    )
}

/// Large-deviation upper bound on the probability that an iid-uniform
/// deployment of `n_total` sensors leaves some subcell more than a factor
/// `delta` away from its fair share. Writes the probability bound and the
/// divergence exponent (bits).
///
/// # Safety
///
/// `out_probability` and `out_divergence` must each be valid for writing
/// one double.
#[no_mangle]
pub unsafe extern "C" fn dfrs_sanov_bound(
    n_total: usize,
    l_count: usize,
    m_count: usize,
    delta: f64,
    out_probability: *mut f64,
    out_divergence: *mut f64,
) -> DfrsStatus {
    need!(out_probability, "out_probability");
    need!(out_divergence, "out_divergence");
    guard(
        || match geometry::sanov_bound(n_total, l_count, m_count, delta) {
            Ok(b) => {
                put(out_probability, b.probability);
                put(out_divergence, b.divergence);
                DfrsStatus::Ok
            }
            Err(e) => fail_core(e),
        },
    )
}

/// Supercell count `L` minimizing the worst-case error bound for `field`
/// with `n_total` sensors, `m_count` subcells per supercell, and
/// threshold range `c`.
///
/// # Safety
///
/// `field` must be a live handle; `out_l` must be valid for writing one
/// value.
#[no_mangle]
pub unsafe extern "C" fn dfrs_optimal_supercells(
    n_total: usize,
    field: *const DfrsField,
    m_count: usize,
    c: f64,
    out_l: *mut usize,
) -> DfrsStatus {
    need!(field, "field");
    need!(out_l, "out_l");
    let field = &(*field).0;
    guard(|| match analysis::optimal_l(n_total, field, m_count, c) {
        Ok(l) => {
            put(out_l, l);
            DfrsStatus::Ok
        }
        Err(e) => fail_core(e),
    })
}

/// Monte Carlo check that the two one-bit quantizer implementations
/// (threshold comparison and dither-sign expansion) draw from the same
/// conditional law. Runs `trials` draws at each of `points` signal values
/// spanning `[-c, c]` and writes the worst empirical deviation along with
/// the acceptance tolerance `4 sqrt(0.25 / trials)`.
///
/// # Safety
///
/// `out_max_deviation` and `out_tolerance` must each be valid for writing
/// one double.
#[no_mangle]
pub unsafe extern "C" fn dfrs_equivalence_max_deviation(
    c: f64,
    points: usize,
    trials: usize,
    seed: u64,
    out_max_deviation: *mut f64,
    out_tolerance: *mut f64,
) -> DfrsStatus {
    need!(out_max_deviation, "out_max_deviation");
    need!(out_tolerance, "out_tolerance");
    guard(|| match sensing::equivalence_test(c, points, trials, seed) {
        Ok(r) => {
            put(
                out_max_deviation,
                r.max_dev_threshold
                    .max(r.max_dev_expansion)
                    .max(r.max_dev_cross),
            );
            put(out_tolerance, r.tolerance);
            DfrsStatus::Ok
        }
        Err(e) => fail_core(e),
    })
}

/// Cramer-Rao lower bound on the variance of any unbiased location
/// estimate from `n_obs` real-valued observations under `noise`. Fails
/// with `DFRS_STATUS_NON_REGULAR_PDF` when the family has no density or
/// its density is not regular enough for the bound (discrete, uniform,
/// and edge-truncated families).
///
/// # Safety
///
/// `noise` must be a live handle; `out_bound` must be valid for writing
/// one double.
#[no_mangle]
pub unsafe extern "C" fn dfrs_cramer_rao_bound(
    noise: *const DfrsNoise,
    n_obs: usize,
    out_bound: *mut f64,
) -> DfrsStatus {
    need!(noise, "noise");
    need!(out_bound, "out_bound");
    let noise = &(*noise).0;
    guard(|| match analysis::cramer_rao_for_noise(noise, n_obs) {
        Ok(b) => {
            put(out_bound, b);
            DfrsStatus::Ok
        }
        Err(e) => fail_core(e),
    })
}
