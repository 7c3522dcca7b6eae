//! C interface to `svmscreen`.
//!
//! Objects cross the boundary as opaque handles that the caller releases with
//! the matching `*_free` function. Every fallible call returns an
//! [`SvmStatus`]; on failure a description is available from
//! [`svm_last_error`] on the same thread until the next failing call.
//! Panics are caught and reported as `SVM_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use svmscreen::data::{compute_feature_stats, parse_sparse_text, read_sparse_file, Dataset, ParseOptions};
use svmscreen::error::Error;
use svmscreen::screening::{build_context, screen_all, theta_at_lambda_max, Parallelism, ScreenReport};
use svmscreen::solver::{self, solve_primal, theta_from_primal, PrimalModel, SolverOptions, ThetaVector};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SvmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    Infeasible = 5,
    NotConverged = 6,
    BufferTooSmall = 7,
    Internal = 8,
    Panic = 9,
}

/// Training data.
pub struct SvmDataset(Dataset);
/// A solved model.
pub struct SvmModel(PrimalModel);
/// Result of one screening pass.
pub struct SvmScreenReport(ScreenReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SvmStatus {
    match e {
        Error::Parse { .. } | Error::EmptyInput | Error::Json(_) | Error::Csv(_) => SvmStatus::Parse,
        Error::Io(_) | Error::File { .. } => SvmStatus::Io,
        Error::InfeasibleTheta(_) => SvmStatus::Infeasible,
        Error::InvalidArgument(_)
        | Error::InconsistentInputs(_)
        | Error::NonFinite(_)
        | Error::OracleTooLarge { .. } => SvmStatus::InvalidArgument,
        Error::UndefinedProjection => SvmStatus::Internal,
    }
}

struct Fail(SvmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SvmStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SvmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SvmStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SvmStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(SvmStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_slot<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Copies `src` into `buf[..len]`. With a null `buf` only the required length
/// is reported through `required` (which may itself be null).
unsafe fn copy_out<T: Copy>(src: &[T], buf: *mut T, len: usize, required: *mut usize) -> Result<(), Fail> {
    if let Some(r) = required.as_mut() {
        *r = src.len();
    }
    if buf.is_null() {
        return if required.is_null() { Err(null("buffer")) } else { Ok(()) };
    }
    if len < src.len() {
        return Err(Fail(
            SvmStatus::BufferTooSmall,
            format!("buffer holds {len}, need {}", src.len()),
        ));
    }
    slice::from_raw_parts_mut(buf, src.len()).copy_from_slice(src);
    Ok(())
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn svm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn svm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Reads a sparse `label index:value ...` file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn svm_dataset_read(path: *const c_char, out: *mut *mut SvmDataset) -> SvmStatus {
    guard(|| {
        let out = out_slot(out, "out")?;
        let path = str_arg(path, "path")?;
        let d = read_sparse_file(path, ParseOptions::default())?;
        *out = Box::into_raw(Box::new(SvmDataset(d)));
        Ok(())
    })
}

/// Parses sparse-format text held in memory.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn svm_dataset_parse(text: *const c_char, out: *mut *mut SvmDataset) -> SvmStatus {
    guard(|| {
        let out = out_slot(out, "out")?;
        let text = str_arg(text, "text")?;
        let d = parse_sparse_text(text, ParseOptions::default())?;
        *out = Box::into_raw(Box::new(SvmDataset(d)));
        Ok(())
    })
}

/// Builds a dataset from a row-major `n_samples × n_features` matrix.
///
/// # Safety
/// `rows` must point to `n_samples * n_features` doubles, `labels` to
/// `n_samples` doubles, and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn svm_dataset_from_dense(
    rows: *const f64,
    n_samples: usize,
    n_features: usize,
    labels: *const f64,
    out: *mut *mut SvmDataset,
) -> SvmStatus {
    guard(|| {
        let out = out_slot(out, "out")?;
        if labels.is_null() || (rows.is_null() && n_samples * n_features > 0) {
            return Err(null("rows or labels"));
        }
        let labels = slice::from_raw_parts(labels, n_samples);
        let flat = if n_samples * n_features == 0 {
            &[][..]
        } else {
            slice::from_raw_parts(rows, n_samples * n_features)
        };
        let rows: Vec<Vec<f64>> = (0..n_samples)
            .map(|i| flat[i * n_features..(i + 1) * n_features].to_vec())
            .collect();
        let d = Dataset::from_dense(&rows, labels)?;
        *out = Box::into_raw(Box::new(SvmDataset(d)));
        Ok(())
    })
}

/// # Safety
/// `data` must come from a dataset constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn svm_dataset_free(data: *mut SvmDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// # Safety
/// `data` must be a live handle; out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn svm_dataset_shape(
    data: *const SvmDataset,
    n_samples: *mut usize,
    n_features: *mut usize,
) -> SvmStatus {
    guard(|| {
        let d = &handle(data, "data")?.0;
        *out_slot(n_samples, "n_samples")? = d.n_samples();
        *out_slot(n_features, "n_features")? = d.n_features();
        Ok(())
    })
}

/// Smallest λ with an all-zero solution and the bias of that solution.
///
/// # Safety
/// `data` must be a live handle; out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn svm_lambda_max(
    data: *const SvmDataset,
    lambda_max: *mut f64,
    bias: *mut f64,
) -> SvmStatus {
    guard(|| {
        let d = &handle(data, "data")?.0;
        let lm = solver::lambda_max(d);
        *out_slot(lambda_max, "lambda_max")? = lm.lambda_max;
        *out_slot(bias, "bias")? = lm.bias;
        Ok(())
    })
}

/// Solves at `lambda`. Non-positive `tol` or zero `max_iter` select the
/// defaults. A model is returned even when the solver did not converge; check
/// [`svm_model_converged`].
///
/// # Safety
/// `data` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn svm_solve(
    data: *const SvmDataset,
    lambda: f64,
    tol: f64,
    max_iter: usize,
    out: *mut *mut SvmModel,
) -> SvmStatus {
    guard(|| {
        let d = &handle(data, "data")?.0;
        let out = out_slot(out, "out")?;
        let mut opts = SolverOptions::default();
        if tol > 0.0 {
            opts.tol = tol;
        }
        if max_iter > 0 {
            opts.max_iter = max_iter;
        }
        let m = solve_primal(d, lambda, &opts)?;
        *out = Box::into_raw(Box::new(SvmModel(m)));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`svm_solve`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn svm_model_free(model: *mut SvmModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Copies the dense weight vector. Pass a null `buf` to query the length.
///
/// # Safety
/// `model` must be live; `buf` must hold `len` doubles if non-null.
#[no_mangle]
pub unsafe extern "C" fn svm_model_weights(
    model: *const SvmModel,
    buf: *mut f64,
    len: usize,
    required: *mut usize,
) -> SvmStatus {
    guard(|| copy_out(&handle(model, "model")?.0.weights, buf, len, required))
}

/// # Safety
/// `model` must be live; out pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn svm_model_summary(
    model: *const SvmModel,
    bias: *mut f64,
    objective: *mut f64,
    converged: *mut bool,
) -> SvmStatus {
    guard(|| {
        let m = &handle(model, "model")?.0;
        if let Some(b) = bias.as_mut() {
            *b = m.bias;
        }
        if let Some(o) = objective.as_mut() {
            *o = m.objective;
        }
        if let Some(c) = converged.as_mut() {
            *c = m.converged;
        }
        Ok(())
    })
}

/// # Safety
/// `model` must be live and `converged` valid.
#[no_mangle]
pub unsafe extern "C" fn svm_model_converged(model: *const SvmModel, converged: *mut bool) -> SvmStatus {
    guard(|| {
        *out_slot(converged, "converged")? = handle(model, "model")?.0.converged;
        Ok(())
    })
}

/// Screens every feature for `lambda2`.
///
/// The dual point at `lambda1` is taken from `theta1` (length `n_samples`)
/// when non-null. Otherwise it is computed: in closed form when `lambda1` is
/// non-positive or equals λ_max, by a full solve otherwise.
///
/// # Safety
/// `data` must be live; `theta1` must hold `theta1_len` doubles if non-null;
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn svm_screen(
    data: *const SvmDataset,
    lambda1: f64,
    theta1: *const f64,
    theta1_len: usize,
    lambda2: f64,
    out: *mut *mut SvmScreenReport,
) -> SvmStatus {
    guard(|| {
        let d = &handle(data, "data")?.0;
        let out = out_slot(out, "out")?;
        let lmax = solver::lambda_max(d).lambda_max;
        let l1 = if lambda1 > 0.0 { lambda1 } else { lmax };
        let theta = if !theta1.is_null() {
            ThetaVector::new(slice::from_raw_parts(theta1, theta1_len).to_vec(), l1)?
        } else if l1 >= lmax {
            theta_at_lambda_max(d)?
        } else {
            let m = solve_primal(d, l1, &SolverOptions::default())?;
            if !m.converged {
                return Err(Fail(
                    SvmStatus::NotConverged,
                    format!("solve at lambda1 = {l1} did not converge"),
                ));
            }
            theta_from_primal(d, &m.weights, m.bias, l1)?
        };
        let ctx = build_context(d, &theta, lambda2)?;
        let stats = compute_feature_stats(d);
        let report = screen_all(&ctx, d, &stats, Parallelism::Rayon);
        *out = Box::into_raw(Box::new(SvmScreenReport(report)));
        Ok(())
    })
}

/// # Safety
/// `report` must come from [`svm_screen`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn svm_report_free(report: *mut SvmScreenReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// 0-based indices of kept features. Pass a null `buf` to query the count.
///
/// # Safety
/// `report` must be live; `buf` must hold `len` entries if non-null.
#[no_mangle]
pub unsafe extern "C" fn svm_report_kept(
    report: *const SvmScreenReport,
    buf: *mut usize,
    len: usize,
    required: *mut usize,
) -> SvmStatus {
    guard(|| copy_out(&handle(report, "report")?.0.kept, buf, len, required))
}

/// Per-feature bounds; a feature is kept when its bound is at least `1 − 1e-9`.
///
/// # Safety
/// `report` must be live; `buf` must hold `len` doubles if non-null.
#[no_mangle]
pub unsafe extern "C" fn svm_report_bounds(
    report: *const SvmScreenReport,
    buf: *mut f64,
    len: usize,
    required: *mut usize,
) -> SvmStatus {
    guard(|| {
        let bounds: Vec<f64> = handle(report, "report")?.0.bounds.iter().map(|b| b.bound).collect();
        copy_out(&bounds, buf, len, required)
    })
}
