//! C ABI for the expose anomaly-scoring library.
//!
//! Conventions:
//! * models are opaque handles created by the `expose_*` constructors and
//!   released with [`expose_model_free`];
//! * every fallible call returns an [`ExposeStatus`]; `Ok` is zero;
//! * on failure a thread-local message is retrievable with
//!   [`expose_last_error`];
//! * vectors are `double` arrays with an explicit length, matrices are
//!   row-major.
//!
//! The header `include/expose.h` is generated from this file by cbindgen
//! at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use expose::features::{FeatureMap, RksProjection};
use expose::model::{ExposeModel, Mode};
use expose::persist;
use expose::ExposeError;

/// Result code of a C API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExposeStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// An argument failed validation (bad sigma, gamma, counts, ...).
    InvalidArgument = 2,
    /// Vector length does not match the model.
    DimensionMismatch = 3,
    /// Update rule does not match the model's mode.
    WrongMode = 4,
    /// The model has no observations yet.
    Unfitted = 5,
    /// Normalized score requested but the weight vector is zero.
    ZeroNormWeights = 6,
    /// File could not be read or written.
    Io = 7,
    /// File contents could not be parsed as a model.
    Parse = 8,
    /// A path or string argument was not valid UTF-8.
    Utf8 = 9,
    /// Unexpected internal failure.
    Internal = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: impl Into<String>) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message.into());
}

fn status_of(err: &ExposeError) -> ExposeStatus {
    match err {
        ExposeError::DimensionMismatch { .. } => ExposeStatus::DimensionMismatch,
        ExposeError::WrongMode { .. } => ExposeStatus::WrongMode,
        ExposeError::Unfitted => ExposeStatus::Unfitted,
        ExposeError::ZeroNormWeights => ExposeStatus::ZeroNormWeights,
        ExposeError::Io(_) => ExposeStatus::Io,
        ExposeError::Parse(_) | ExposeError::ModelFile(_) => ExposeStatus::Parse,
        _ => ExposeStatus::InvalidArgument,
    }
}

fn fail(err: ExposeError) -> ExposeStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

/// Runs `f` with panics contained at the ABI boundary.
fn guarded(f: impl FnOnce() -> ExposeStatus) -> ExposeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            ExposeStatus::Internal
        }
    }
}

/// Opaque model handle.
pub struct ExposeModelHandle {
    inner: ExposeModel,
}

unsafe fn slice_arg<'a>(data: *const f64, len: usize) -> Option<&'a [f64]> {
    if data.is_null() {
        None
    } else {
        Some(unsafe { std::slice::from_raw_parts(data, len) })
    }
}

unsafe fn write_handle(
    out: *mut *mut ExposeModelHandle,
    model: Result<ExposeModel, ExposeError>,
) -> ExposeStatus {
    if out.is_null() {
        set_error("out handle is null");
        return ExposeStatus::NullArgument;
    }
    match model {
        Ok(inner) => {
            let handle = Box::new(ExposeModelHandle { inner });
            unsafe { *out = Box::into_raw(handle) };
            ExposeStatus::Ok
        }
        Err(e) => {
            unsafe { *out = ptr::null_mut() };
            fail(e)
        }
    }
}

fn rks_map(
    dim: usize,
    expansions: usize,
    sigma: f64,
    seed: u64,
) -> Result<FeatureMap, ExposeError> {
    Ok(FeatureMap::Rks(RksProjection::fit(
        dim, expansions, sigma, seed,
    )?))
}

/// Fits a batch model over `n_rows` row-major `dim`-dimensional vectors
/// using a random-projection feature map with `expansions` frequencies.
///
/// # Safety
/// `data` must point to `n_rows * dim` doubles; `out` must be a valid
/// pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn expose_fit_batch_rks(
    data: *const f64,
    n_rows: usize,
    dim: usize,
    expansions: usize,
    sigma: f64,
    seed: u64,
    out: *mut *mut ExposeModelHandle,
) -> ExposeStatus {
    guarded(|| {
        if dim == 0 || n_rows == 0 {
            set_error("n_rows and dim must be positive");
            return ExposeStatus::InvalidArgument;
        }
        let Some(flat) = (unsafe { slice_arg(data, n_rows.saturating_mul(dim)) }) else {
            set_error("data is null");
            return ExposeStatus::NullArgument;
        };
        let rows: Vec<Vec<f64>> = flat.chunks_exact(dim).map(|c| c.to_vec()).collect();
        let model = rks_map(dim, expansions, sigma, seed)
            .and_then(|map| ExposeModel::fit_batch(map, &rows));
        unsafe { write_handle(out, model) }
    })
}

/// Creates an empty streaming model with the exact running-mean update.
///
/// # Safety
/// `out` must be a valid pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn expose_streaming_online_rks(
    dim: usize,
    expansions: usize,
    sigma: f64,
    seed: u64,
    out: *mut *mut ExposeModelHandle,
) -> ExposeStatus {
    guarded(|| {
        let model = rks_map(dim, expansions, sigma, seed)
            .and_then(|m| ExposeModel::streaming(m, Mode::Online));
        unsafe { write_handle(out, model) }
    })
}

/// Creates an empty streaming model averaging the last `window_len`
/// observations.
///
/// # Safety
/// `out` must be a valid pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn expose_streaming_window_rks(
    dim: usize,
    expansions: usize,
    sigma: f64,
    seed: u64,
    window_len: usize,
    out: *mut *mut ExposeModelHandle,
) -> ExposeStatus {
    guarded(|| {
        let model = rks_map(dim, expansions, sigma, seed)
            .and_then(|m| ExposeModel::streaming(m, Mode::Window { len: window_len }));
        unsafe { write_handle(out, model) }
    })
}

/// Creates an empty streaming model with geometric forgetting at rate
/// `gamma` in `[0, 1)`.
///
/// # Safety
/// `out` must be a valid pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn expose_streaming_decay_rks(
    dim: usize,
    expansions: usize,
    sigma: f64,
    seed: u64,
    gamma: f64,
    out: *mut *mut ExposeModelHandle,
) -> ExposeStatus {
    guarded(|| {
        let model = rks_map(dim, expansions, sigma, seed)
            .and_then(|m| ExposeModel::streaming(m, Mode::Decay { gamma }));
        unsafe { write_handle(out, model) }
    })
}

/// Feeds one observation to a streaming model.
///
/// # Safety
/// `model` must be a live handle; `x` must point to `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn expose_model_update(
    model: *mut ExposeModelHandle,
    x: *const f64,
    dim: usize,
) -> ExposeStatus {
    guarded(|| {
        let Some(handle) = (unsafe { model.as_mut() }) else {
            set_error("model handle is null");
            return ExposeStatus::NullArgument;
        };
        let Some(x) = (unsafe { slice_arg(x, dim) }) else {
            set_error("x is null");
            return ExposeStatus::NullArgument;
        };
        match handle.inner.update(x) {
            Ok(()) => ExposeStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Scores a query. `raw` always receives the inner product; `normalized`
/// receives the normalized score when `normalize` is set (and NaN
/// otherwise).
///
/// # Safety
/// `model` must be a live handle; `x` must point to `dim` doubles; `raw`
/// and `normalized` must each be valid or null.
#[no_mangle]
pub unsafe extern "C" fn expose_model_score(
    model: *const ExposeModelHandle,
    x: *const f64,
    dim: usize,
    normalize: bool,
    raw: *mut f64,
    normalized: *mut f64,
) -> ExposeStatus {
    guarded(|| {
        let Some(handle) = (unsafe { model.as_ref() }) else {
            set_error("model handle is null");
            return ExposeStatus::NullArgument;
        };
        let Some(x) = (unsafe { slice_arg(x, dim) }) else {
            set_error("x is null");
            return ExposeStatus::NullArgument;
        };
        match handle.inner.score(x, normalize) {
            Ok(scored) => {
                if !raw.is_null() {
                    unsafe { *raw = scored.raw };
                }
                if !normalized.is_null() {
                    unsafe { *normalized = scored.normalized.unwrap_or(f64::NAN) };
                }
                ExposeStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of observations the model has absorbed.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn expose_model_count(
    model: *const ExposeModelHandle,
    out: *mut u64,
) -> ExposeStatus {
    guarded(|| {
        let (Some(handle), false) = (unsafe { model.as_ref() }, out.is_null()) else {
            set_error("null argument");
            return ExposeStatus::NullArgument;
        };
        unsafe { *out = handle.inner.count() };
        ExposeStatus::Ok
    })
}

/// Expected input dimension of queries and updates.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn expose_model_input_dim(
    model: *const ExposeModelHandle,
    out: *mut usize,
) -> ExposeStatus {
    guarded(|| {
        let (Some(handle), false) = (unsafe { model.as_ref() }, out.is_null()) else {
            set_error("null argument");
            return ExposeStatus::NullArgument;
        };
        unsafe { *out = handle.inner.map().input_dim() };
        ExposeStatus::Ok
    })
}

/// Length of the model's weight vector.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn expose_model_feature_dim(
    model: *const ExposeModelHandle,
    out: *mut usize,
) -> ExposeStatus {
    guarded(|| {
        let (Some(handle), false) = (unsafe { model.as_ref() }, out.is_null()) else {
            set_error("null argument");
            return ExposeStatus::NullArgument;
        };
        unsafe { *out = handle.inner.map().feature_dim() };
        ExposeStatus::Ok
    })
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a Path, ExposeStatus> {
    if path.is_null() {
        set_error("path is null");
        return Err(ExposeStatus::NullArgument);
    }
    match unsafe { CStr::from_ptr(path) }.to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => {
            set_error("path is not valid UTF-8");
            Err(ExposeStatus::Utf8)
        }
    }
}

/// Writes the model to `path` as the versioned JSON document.
///
/// # Safety
/// `model` must be a live handle; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn expose_model_save(
    model: *const ExposeModelHandle,
    path: *const c_char,
) -> ExposeStatus {
    guarded(|| {
        let Some(handle) = (unsafe { model.as_ref() }) else {
            set_error("model handle is null");
            return ExposeStatus::NullArgument;
        };
        let path = match unsafe { path_arg(path) } {
            Ok(p) => p,
            Err(status) => return status,
        };
        match persist::save_model(&handle.inner, path) {
            Ok(()) => ExposeStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Loads a model document written by [`expose_model_save`] (or the CLI).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn expose_model_load(
    path: *const c_char,
    out: *mut *mut ExposeModelHandle,
) -> ExposeStatus {
    guarded(|| {
        let path = match unsafe { path_arg(path) } {
            Ok(p) => p,
            Err(status) => return status,
        };
        unsafe { write_handle(out, persist::load_model(path)) }
    })
}

/// Releases a handle. Passing null is a no-op.
///
/// # Safety
/// `model` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn expose_model_free(model: *mut ExposeModelHandle) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Copies the current thread's last error message (NUL-terminated,
/// truncated to `capacity`) into `buffer` and returns the full message
/// length in bytes, excluding the terminator.
///
/// # Safety
/// `buffer` must point to `capacity` writable bytes, or be null to query
/// the length only.
#[no_mangle]
pub unsafe extern "C" fn expose_last_error(buffer: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buffer.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr(), buffer.cast::<u8>(), n);
                *buffer.add(n) = 0;
            }
        }
        bytes.len()
    })
}
