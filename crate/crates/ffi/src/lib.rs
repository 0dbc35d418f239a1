//! C ABI over the `hfa` crate.
//!
//! Every fallible function returns an [`HfaStatus`]; on failure the message is
//! kept per thread and can be copied out with [`hfa_last_error_message`].
//! Models are opaque handles created by [`hfa_model_train`] or
//! [`hfa_model_load`] and released with [`hfa_model_free`]. Panics never cross
//! the boundary; they are reported as `HFA_STATUS_PANIC`.
//!
//! # Safety
//!
//! Every pointer argument must be null or valid for the length the function
//! documents, and model handles must come from this library and not be used
//! after [`hfa_model_free`]. Null pointers are rejected with
//! `HFA_STATUS_NULL_POINTER` where a value is required.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use hfa::data::Dataset;
use hfa::eval::{argmax_class, train_multiclass};
use hfa::hfa::{HfaConfig, KernelChoice, ModelBundle};
use hfa::linalg::KernelFamily;
use hfa::HfaError;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HfaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Degenerate = 3,
    Parse = 4,
    Infeasible = 5,
    Config = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HfaKernel {
    Linear = 0,
    Rbf = 1,
}

/// Training settings; fill with [`hfa_train_options_default`] and adjust.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct HfaTrainOptions {
    pub c: f64,
    pub lambda: f64,
    pub kernel: HfaKernel,
    /// RBF bandwidth; a value `<= 0` selects the per-domain median heuristic.
    pub gamma: f64,
    pub t_max: u32,
    pub conv_tol: f64,
}

/// Opaque trained model (one binary model per class).
pub struct HfaModel {
    bundle: ModelBundle,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &HfaError) -> HfaStatus {
    match err {
        HfaError::Input(_) => HfaStatus::InvalidInput,
        HfaError::Degenerate(_) => HfaStatus::Degenerate,
        HfaError::Parse { .. } => HfaStatus::Parse,
        HfaError::Infeasible(_) => HfaStatus::Infeasible,
        HfaError::Config(_) => HfaStatus::Config,
        HfaError::Io { .. } => HfaStatus::Io,
    }
}

struct Failure(HfaStatus, String);

impl From<HfaError> for Failure {
    fn from(e: HfaError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(HfaStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status plus stored message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HfaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            HfaStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HfaStatus::Panic
        }
    }
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(HfaStatus::InvalidInput, "path is not valid UTF-8".into()))?;
    Ok(PathBuf::from(s))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn model_arg<'a>(m: *const HfaModel) -> Result<&'a HfaModel, Failure> {
    m.as_ref().ok_or_else(|| null("model"))
}

unsafe fn dataset_arg(
    name: &str,
    x: *const f64,
    y: *const u32,
    n: usize,
    dim: usize,
) -> Result<Dataset, Failure> {
    let len = n
        .checked_mul(dim)
        .ok_or_else(|| Failure(HfaStatus::InvalidInput, format!("{name} size overflows")))?;
    let x = slice_arg(x, len, name)?;
    let y = slice_arg(y, n, name)?;
    let features = if dim == 0 {
        Vec::new()
    } else {
        x.chunks(dim).map(<[f64]>::to_vec).collect()
    };
    Ok(Dataset::new(name, dim, features, y.to_vec())?)
}

/// Copies the calling thread's last error message, NUL-terminated, into `buf`.
///
/// Returns the message length in bytes excluding the terminator; if that is
/// `>= len`, the message was truncated. `buf` may be null when `len` is 0.
#[no_mangle]
pub unsafe extern "C" fn hfa_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hfa_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

#[no_mangle]
pub unsafe extern "C" fn hfa_train_options_default(out: *mut HfaTrainOptions) -> HfaStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("options"))?;
        let d = HfaConfig::default();
        *out = HfaTrainOptions {
            c: d.c,
            lambda: d.lambda,
            kernel: HfaKernel::Rbf,
            gamma: 0.0,
            t_max: d.t_max as u32,
            conv_tol: d.conv_tol,
        };
        Ok(())
    })
}

fn config_from(opts: &HfaTrainOptions) -> HfaConfig {
    HfaConfig {
        c: opts.c,
        lambda: opts.lambda,
        kernel: KernelChoice {
            family: match opts.kernel {
                HfaKernel::Linear => KernelFamily::Linear,
                HfaKernel::Rbf => KernelFamily::Rbf,
            },
            gamma: (opts.gamma > 0.0).then_some(opts.gamma),
        },
        t_max: opts.t_max as usize,
        conv_tol: opts.conv_tol,
        ..HfaConfig::default()
    }
}

/// Trains one-vs-rest models from row-major feature arrays.
///
/// `source_x` holds `n_source * source_dim` values, `source_y` holds `n_source`
/// class labels; likewise for the target. `options` may be null for defaults.
/// On success `*out` owns a new model that must be passed to [`hfa_model_free`].
#[no_mangle]
pub unsafe extern "C" fn hfa_model_train(
    source_x: *const f64,
    source_y: *const u32,
    n_source: usize,
    source_dim: usize,
    target_x: *const f64,
    target_y: *const u32,
    n_target: usize,
    target_dim: usize,
    options: *const HfaTrainOptions,
    out: *mut *mut HfaModel,
) -> HfaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = std::ptr::null_mut();
        let source = dataset_arg("source", source_x, source_y, n_source, source_dim)?;
        let target = dataset_arg("target", target_x, target_y, n_target, target_dim)?;
        let cfg = match options.as_ref() {
            Some(o) => config_from(o),
            None => HfaConfig::default(),
        };
        let bundle = train_multiclass(&source, &target, &cfg)?;
        *out = Box::into_raw(Box::new(HfaModel { bundle }));
        Ok(())
    })
}

/// Loads a model file written by [`hfa_model_save`] or the `hfa train` command.
#[no_mangle]
pub unsafe extern "C" fn hfa_model_load(path: *const c_char, out: *mut *mut HfaModel) -> HfaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = std::ptr::null_mut();
        let bundle = ModelBundle::load(&path_arg(path)?)?;
        *out = Box::into_raw(Box::new(HfaModel { bundle }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn hfa_model_save(model: *const HfaModel, path: *const c_char) -> HfaStatus {
    guard(|| {
        let model = model_arg(model)?;
        model.bundle.save(&path_arg(path)?)?;
        Ok(())
    })
}

/// Releases a model; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hfa_model_free(model: *mut HfaModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of classes, or 0 for a null model.
#[no_mangle]
pub unsafe extern "C" fn hfa_model_num_classes(model: *const HfaModel) -> usize {
    model.as_ref().map_or(0, |m| m.bundle.classes().len())
}

/// Target feature dimension, or 0 for a null model.
#[no_mangle]
pub unsafe extern "C" fn hfa_model_target_dim(model: *const HfaModel) -> usize {
    model.as_ref().map_or(0, |m| m.bundle.target_dim())
}

/// Writes the class labels, ascending, into `out` (capacity `len`).
#[no_mangle]
pub unsafe extern "C" fn hfa_model_classes(
    model: *const HfaModel,
    out: *mut u32,
    len: usize,
) -> HfaStatus {
    guard(|| {
        let classes = model_arg(model)?.bundle.classes();
        if len < classes.len() {
            return Err(Failure(
                HfaStatus::BufferTooSmall,
                format!("need room for {} classes, got {len}", classes.len()),
            ));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        std::ptr::copy_nonoverlapping(classes.as_ptr(), out, classes.len());
        Ok(())
    })
}

/// Per-class decision values for one target vector `x` of length `dim`, in class order.
#[no_mangle]
pub unsafe extern "C" fn hfa_model_decision_values(
    model: *const HfaModel,
    x: *const f64,
    dim: usize,
    out: *mut f64,
    len: usize,
) -> HfaStatus {
    guard(|| {
        let model = model_arg(model)?;
        let x = slice_arg(x, dim, "x")?;
        let values = model.bundle.decision_values(x)?;
        if len < values.len() {
            return Err(Failure(
                HfaStatus::BufferTooSmall,
                format!("need room for {} values, got {len}", values.len()),
            ));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        std::ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
        Ok(())
    })
}

/// Predicts a class for each of `n` row-major target vectors; ties go to the smaller class.
#[no_mangle]
pub unsafe extern "C" fn hfa_model_predict(
    model: *const HfaModel,
    xs: *const f64,
    n: usize,
    dim: usize,
    out_labels: *mut u32,
) -> HfaStatus {
    guard(|| {
        let model = model_arg(model)?;
        let total = n
            .checked_mul(dim)
            .ok_or_else(|| Failure(HfaStatus::InvalidInput, "input size overflows".into()))?;
        let xs = slice_arg(xs, total, "xs")?;
        if n == 0 {
            return Ok(());
        }
        if out_labels.is_null() {
            return Err(null("out_labels"));
        }
        if dim == 0 {
            return Err(Failure(
                HfaStatus::InvalidInput,
                "dim must be positive".into(),
            ));
        }
        let classes = model.bundle.classes();
        let mut labels = Vec::with_capacity(n);
        for x in xs.chunks(dim) {
            labels.push(argmax_class(&classes, &model.bundle.decision_values(x)?)?);
        }
        std::ptr::copy_nonoverlapping(labels.as_ptr(), out_labels, n);
        Ok(())
    })
}
