//! C ABI for the scatter-ra toolkit.
//!
//! The surface mirrors how an embedded caller would use the library: feed a
//! raw 20-channel intensity buffer straight from the sensor into the
//! closed-form baseline, or load a trained model file and predict Ra per
//! reading. Datasets and models are opaque handles created and destroyed
//! here; every fallible call returns a [`ScatterRaStatus`] and leaves a
//! human-readable message retrievable with [`scatter_ra_last_error`].
//!
//! The C header is generated into `include/scatter_ra.h` by the build script.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;

use scatter_ra::baseline::{baseline_ra, BaselineConfig};
use scatter_ra::dataset::{load_dataset, Dataset};
use scatter_ra::error::Error;
use scatter_ra::eval::{
    apply_norm, evaluate_trained, parse_model_json, tcn_receptive_field, TrainedModel,
};
use scatter_ra::features::FeatureMatrix;
use scatter_ra::geometry::{build_sensor_geometry, SENSOR_COUNT, STEP_UM};
use scatter_ra::reading::LaserReading;

/// Result of every fallible call. Anything but `Ok` leaves a message in
/// [`scatter_ra_last_error`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScatterRaStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The operating system reported an I/O failure.
    Io = 3,
    /// A file or buffer does not have the expected format.
    BadFormat = 4,
    /// Buffer or matrix dimensions do not match what the operation needs.
    BadDimensions = 5,
    /// A numeric argument violates a domain invariant.
    InvalidValue = 6,
    /// Contradictory or incomplete configuration.
    BadConfig = 7,
    /// Artifacts that do not belong together (e.g. model vs. reading shape).
    Mismatch = 8,
}

/// Opaque handle to a loaded dataset.
pub struct ScatterRaDataset {
    inner: Dataset,
}

/// Opaque handle to a trained feature-regression model.
pub struct ScatterRaModel {
    inner: TrainedModel,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let owned = CString::new(message)
        .unwrap_or_else(|_| CString::new("error message contained NUL").expect("no NUL"));
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn status_of(err: &Error) -> ScatterRaStatus {
    match err {
        Error::Io(_) => ScatterRaStatus::Io,
        Error::Json(_)
        | Error::BadMagic { .. }
        | Error::UnsupportedVersion { .. }
        | Error::TruncatedPayload { .. }
        | Error::Manifest(_) => ScatterRaStatus::BadFormat,
        Error::Dimensions(_) => ScatterRaStatus::BadDimensions,
        Error::Value(_) => ScatterRaStatus::InvalidValue,
        Error::Config(_) => ScatterRaStatus::BadConfig,
        Error::Mismatch(_) => ScatterRaStatus::Mismatch,
    }
}

fn fail(err: &Error) -> ScatterRaStatus {
    set_last_error(&err.to_string());
    status_of(err)
}

fn fail_null(what: &str) -> ScatterRaStatus {
    set_last_error(&format!("{what} must not be null"));
    ScatterRaStatus::NullArgument
}

/// Message describing the most recent failure on this thread.
///
/// The pointer stays valid until the next failing scatter-ra call on the same
/// thread. Before any failure it is the empty string, never null.
#[no_mangle]
pub extern "C" fn scatter_ra_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Crate version as a static NUL-terminated string; never freed by the caller.
#[no_mangle]
pub extern "C" fn scatter_ra_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Number of sensor channels a raw intensity buffer must carry.
#[no_mangle]
pub extern "C" fn scatter_ra_sensor_count() -> usize {
    SENSOR_COUNT
}

/// Receptive field of a stacked dilated-convolution network: twice the sum of
/// `(kernel_size - 1) * base^level` over all levels.
///
/// # Safety
/// `out_rf` must point to writable memory for one `uint64_t`.
#[no_mangle]
pub unsafe extern "C" fn scatter_ra_receptive_field(
    kernel_size: u64,
    levels: u32,
    dilation_base: u64,
    out_rf: *mut u64,
) -> ScatterRaStatus {
    if out_rf.is_null() {
        return fail_null("out_rf");
    }
    match tcn_receptive_field(kernel_size, levels, dilation_base) {
        Ok(rf) => {
            *out_rf = rf;
            ScatterRaStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

unsafe fn reading_from_raw(
    data: *const u8,
    timesteps: usize,
    step_um: f64,
) -> Result<LaserReading, Error> {
    let raw = std::slice::from_raw_parts(data, SENSOR_COUNT * timesteps);
    LaserReading::new("ffi", step_um, timesteps, raw.to_vec())
}

/// Closed-form baseline Ra of one raw reading.
///
/// `data` is channel-major `uint8_t` intensities, [`scatter_ra_sensor_count`]
/// channels of `timesteps` values each. `step_um` is the spatial distance
/// between timesteps (0.8 in the reference sensor), `theta` the row-threshold
/// rank (2 by default in the pipeline) and `cutoff_um` the waviness cutoff
/// wavelength (80 by default).
///
/// # Safety
/// `data` must point to `scatter_ra_sensor_count() * timesteps` readable
/// bytes and `out_ra_um` to one writable `double`.
#[no_mangle]
pub unsafe extern "C" fn scatter_ra_baseline(
    data: *const u8,
    timesteps: usize,
    step_um: f64,
    theta: usize,
    cutoff_um: f64,
    out_ra_um: *mut f64,
) -> ScatterRaStatus {
    if data.is_null() {
        return fail_null("data");
    }
    if out_ra_um.is_null() {
        return fail_null("out_ra_um");
    }
    let result = reading_from_raw(data, timesteps, step_um).and_then(|reading| {
        baseline_ra(&reading, &build_sensor_geometry(), &BaselineConfig { theta, cutoff_um })
    });
    match result {
        Ok(ra) => {
            *out_ra_um = ra;
            ScatterRaStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

unsafe fn c_path<'a>(path: *const c_char) -> Result<&'a Path, ScatterRaStatus> {
    if path.is_null() {
        return Err(fail_null("path"));
    }
    match CStr::from_ptr(path).to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => {
            set_last_error("path is not valid UTF-8");
            Err(ScatterRaStatus::InvalidUtf8)
        }
    }
}

/// Loads a dataset directory (as written by the `simulate` command) into an
/// opaque handle. On success `*out` owns the dataset; release it with
/// [`scatter_ra_dataset_free`].
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn scatter_ra_dataset_load(
    path: *const c_char,
    out: *mut *mut ScatterRaDataset,
) -> ScatterRaStatus {
    if out.is_null() {
        return fail_null("out");
    }
    let path = match c_path(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match load_dataset(path) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(ScatterRaDataset { inner }));
            ScatterRaStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Releases a dataset handle. Null is a no-op.
///
/// # Safety
/// `ds` must be a pointer returned by [`scatter_ra_dataset_load`] that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn scatter_ra_dataset_free(ds: *mut ScatterRaDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Number of steel samples in the dataset.
///
/// # Safety
/// `ds` must be a live dataset handle and `out` a writable `size_t` slot.
#[no_mangle]
pub unsafe extern "C" fn scatter_ra_dataset_sample_count(
    ds: *const ScatterRaDataset,
    out: *mut usize,
) -> ScatterRaStatus {
    if ds.is_null() {
        return fail_null("ds");
    }
    if out.is_null() {
        return fail_null("out");
    }
    *out = (*ds).inner.samples.len();
    ScatterRaStatus::Ok
}

/// Total number of laser readings across all samples.
///
/// # Safety
/// `ds` must be a live dataset handle and `out` a writable `size_t` slot.
#[no_mangle]
pub unsafe extern "C" fn scatter_ra_dataset_reading_count(
    ds: *const ScatterRaDataset,
    out: *mut usize,
) -> ScatterRaStatus {
    if ds.is_null() {
        return fail_null("ds");
    }
    if out.is_null() {
        return fail_null("out");
    }
    *out = (*ds).inner.reading_count();
    ScatterRaStatus::Ok
}

/// Loads a trained-model JSON file (as written by the `train` command, or the
/// bare model object) into an opaque handle. Release it with
/// [`scatter_ra_model_free`].
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn scatter_ra_model_load(
    path: *const c_char,
    out: *mut *mut ScatterRaModel,
) -> ScatterRaStatus {
    if out.is_null() {
        return fail_null("out");
    }
    let path = match c_path(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    let parsed = std::fs::read_to_string(path)
        .map_err(Error::from)
        .and_then(|text| parse_model_json(&text));
    match parsed {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(ScatterRaModel { inner }));
            ScatterRaStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Releases a model handle. Null is a no-op.
///
/// # Safety
/// `model` must be a pointer returned by [`scatter_ra_model_load`] that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn scatter_ra_model_free(model: *mut ScatterRaModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of features the model's extractor produces (= ridge weights).
///
/// # Safety
/// `model` must be a live model handle and `out` a writable `size_t` slot.
#[no_mangle]
pub unsafe extern "C" fn scatter_ra_model_feature_count(
    model: *const ScatterRaModel,
    out: *mut usize,
) -> ScatterRaStatus {
    if model.is_null() {
        return fail_null("model");
    }
    if out.is_null() {
        return fail_null("out");
    }
    *out = (*model).inner.ridge.weights.len();
    ScatterRaStatus::Ok
}

/// Predicts Ra for one raw reading with a trained model: threshold with the
/// model's rank, z-score with its train statistics, extract features, apply
/// the ridge weights.
///
/// `data` is channel-major as in [`scatter_ra_baseline`]; `timesteps` must
/// match the length the extractor was fitted for.
///
/// # Safety
/// `data` must point to `scatter_ra_sensor_count() * timesteps` readable
/// bytes and `out_ra_um` to one writable `double`.
#[no_mangle]
pub unsafe extern "C" fn scatter_ra_model_predict(
    model: *const ScatterRaModel,
    data: *const u8,
    timesteps: usize,
    out_ra_um: *mut f64,
) -> ScatterRaStatus {
    if model.is_null() {
        return fail_null("model");
    }
    if data.is_null() {
        return fail_null("data");
    }
    if out_ra_um.is_null() {
        return fail_null("out_ra_um");
    }
    let model = &(*model).inner;
    let result = reading_from_raw(data, timesteps, STEP_UM).and_then(|reading| {
        let thresholded = scatter_ra::baseline::threshold(&reading, model.theta)?;
        let features = model.extractor.transform(&apply_norm(&model.norm, &thresholded)?)?;
        let matrix = FeatureMatrix::from_rows(vec![features])?;
        Ok(scatter_ra::features::ridge_predict(&model.ridge, &matrix)?[0])
    });
    match result {
        Ok(ra) => {
            *out_ra_um = ra;
            ScatterRaStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Scores a trained model on the held-out split recorded inside it, writing
/// the root-mean-square error over those readings.
///
/// # Safety
/// `model` and `ds` must be live handles and `out_rmse_um` a writable
/// `double` slot.
#[no_mangle]
pub unsafe extern "C" fn scatter_ra_model_evaluate(
    model: *const ScatterRaModel,
    ds: *const ScatterRaDataset,
    out_rmse_um: *mut f64,
) -> ScatterRaStatus {
    if model.is_null() {
        return fail_null("model");
    }
    if ds.is_null() {
        return fail_null("ds");
    }
    if out_rmse_um.is_null() {
        return fail_null("out_rmse_um");
    }
    match evaluate_trained(&(*ds).inner, &(*model).inner) {
        Ok(report) => {
            *out_rmse_um = report.rmse_um;
            ScatterRaStatus::Ok
        }
        Err(e) => fail(&e),
    }
}
