//! C ABI over `arff-core`.
//!
//! Datasets and models are opaque handles created by `*_new`/`arff_train` and
//! released with the matching `*_free`. Every fallible call returns an
//! [`ArffStatus`]; the message of the last failure on the calling thread is
//! available from [`arff_last_error_message`]. Matrices are row-major.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use arff_core::dataset::{normalize_dataset_with, ConstantColumns, Dataset};
use arff_core::experiments::generalization_error;
use arff_core::features::ActivationKind;
use arff_core::model::FourierModel;
use arff_core::sampler::{train, AdaptiveCovConfig, SamplerConfig};
use arff_core::{DMatrix, Error};

/// Status codes. Values 3 to 5 match the exit codes of the `arff` tool.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArffStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Data = 4,
    Numerical = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArffActivation {
    Fourier = 0,
    Sigmoid = 1,
}

/// Sampler settings. Fill with [`arff_sampler_params_default`] and adjust.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArffSamplerParams {
    pub num_features: usize,
    pub iterations: usize,
    pub delta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub refresh_every: usize,
    pub seed: u64,
    /// Nonzero enables the adaptive proposal covariance.
    pub adaptive_cov: u8,
    pub burn_in: usize,
    /// Use `INFINITY` for no cap.
    pub omega_max: f64,
    pub activation: ArffActivation,
}

/// Raw training or test data.
pub struct ArffDataset {
    inner: Dataset,
}

/// A trained network with its normalization statistics.
pub struct ArffModel {
    inner: FourierModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> ArffStatus {
    match e.exit_code() {
        3 => ArffStatus::Config,
        4 => ArffStatus::Data,
        _ => ArffStatus::Numerical,
    }
}

fn guard<F>(f: F) -> ArffStatus
where
    F: FnOnce() -> Result<(), (ArffStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ArffStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            ArffStatus::Panic
        }
    }
}

fn core_err(e: Error) -> (ArffStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (ArffStatus, String) {
    (ArffStatus::NullPointer, format!("{what} is null"))
}

unsafe fn matrix(ptr: *const f64, rows: usize, cols: usize, what: &str) -> Result<DMatrix<f64>, (ArffStatus, String)> {
    if ptr.is_null() {
        return Err(null(what));
    }
    let len = rows
        .checked_mul(cols)
        .ok_or((ArffStatus::InvalidArgument, format!("{what} is too large")))?;
    let slice = std::slice::from_raw_parts(ptr, len);
    Ok(DMatrix::from_row_slice(rows, cols, slice))
}

/// Copies the message of the last failure on this thread into `buf`
/// (nul-terminated, truncated to `len`). Returns the full message length
/// without the terminator, or 0 when there is none.
#[no_mangle]
pub unsafe extern "C" fn arff_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Builds a dataset from `x` (`n × d`) and `y` (`n × c`). With `c > 1` the
/// rows of `y` must be one-hot.
#[no_mangle]
pub unsafe extern "C" fn arff_dataset_new(
    x: *const f64,
    n: usize,
    d: usize,
    y: *const f64,
    c: usize,
    out: *mut *mut ArffDataset,
) -> ArffStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let x = matrix(x, n, d, "x")?;
        let y = matrix(y, n, c, "y")?;
        let inner = Dataset::new(x, y).map_err(core_err)?;
        *out = Box::into_raw(Box::new(ArffDataset { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn arff_dataset_free(data: *mut ArffDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Published defaults for inputs of dimension `dim`.
#[no_mangle]
pub unsafe extern "C" fn arff_sampler_params_default(
    dim: usize,
    num_features: usize,
    out: *mut ArffSamplerParams,
) -> ArffStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let c = SamplerConfig::new(dim, num_features);
        *out = ArffSamplerParams {
            num_features,
            iterations: c.iterations(),
            delta: c.delta,
            gamma: c.gamma,
            lambda: c.lambda,
            refresh_every: c.refresh_every,
            seed: c.seed,
            adaptive_cov: 0,
            burn_in: c.iterations() / 10,
            omega_max: f64::INFINITY,
            activation: ArffActivation::Fourier,
        };
        Ok(())
    })
}

/// Normalizes `data`, runs the adaptive sampler and returns a model that
/// accepts raw inputs. `mean_acceptance` may be null.
#[no_mangle]
pub unsafe extern "C" fn arff_train(
    data: *const ArffDataset,
    params: *const ArffSamplerParams,
    out: *mut *mut ArffModel,
    mean_acceptance: *mut f64,
) -> ArffStatus {
    guard(|| {
        let data = data.as_ref().ok_or_else(|| null("data"))?;
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let activation = match p.activation {
            ArffActivation::Fourier => ActivationKind::Fourier,
            ArffActivation::Sigmoid => ActivationKind::Sigmoid,
        };
        let mut config = SamplerConfig::new(1, p.num_features)
            .with_delta(p.delta)
            .with_iterations(p.iterations);
        config.gamma = p.gamma;
        config.lambda = p.lambda;
        config.refresh_every = p.refresh_every;
        config.seed = p.seed;
        if p.adaptive_cov != 0 {
            config.adaptive_cov = Some(AdaptiveCovConfig {
                burn_in: p.burn_in,
                omega_max: p.omega_max,
            });
        }
        let (normalized, stats) =
            normalize_dataset_with(data.inner.clone(), ConstantColumns::CenterOnly).map_err(core_err)?;
        let normalized = if activation.uses_bias() {
            normalized.with_bias()
        } else {
            normalized
        };
        let (model, trace) = train(&normalized, &stats, &config, activation).map_err(core_err)?;
        if !mean_acceptance.is_null() {
            *mean_acceptance = trace.mean_acceptance();
        }
        *out = Box::into_raw(Box::new(ArffModel { inner: model }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn arff_model_free(model: *mut ArffModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of hidden nodes, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn arff_model_num_features(model: *const ArffModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.num_features())
}

/// Raw input dimension, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn arff_model_dim(model: *const ArffModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.stats().dim())
}

/// Output columns, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn arff_model_outputs(model: *const ArffModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.outputs())
}

/// Predicts raw outputs for `x` (`n × d`) into `out` (`n × outputs`).
#[no_mangle]
pub unsafe extern "C" fn arff_model_predict(
    model: *const ArffModel,
    x: *const f64,
    n: usize,
    d: usize,
    out: *mut f64,
    out_len: usize,
) -> ArffStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let c = model.inner.outputs();
        if out_len < n * c {
            return Err((
                ArffStatus::InvalidArgument,
                format!("output buffer holds {out_len} values, {} needed", n * c),
            ));
        }
        let x = matrix(x, n, d, "x")?;
        let pred = model.inner.predict(&x).map_err(core_err)?;
        let out = std::slice::from_raw_parts_mut(out, n * c);
        for i in 0..n {
            for j in 0..c {
                out[i * c + j] = pred.values[(i, j)];
            }
        }
        Ok(())
    })
}

/// Generalization error in normalized output units. `test` holds raw data
/// and is normalized with the model's training statistics.
#[no_mangle]
pub unsafe extern "C" fn arff_generalization_error(
    model: *const ArffModel,
    test: *const ArffDataset,
    out: *mut f64,
) -> ArffStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let test = test.as_ref().ok_or_else(|| null("test"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut normalized = model.inner.stats().apply(test.inner.clone()).map_err(core_err)?;
        if model.inner.activation().uses_bias() {
            normalized = normalized.with_bias();
        }
        *out = generalization_error(&model.inner, &normalized).map_err(core_err)?;
        Ok(())
    })
}
