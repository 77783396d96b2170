//! C ABI over the `fdexplain` engine.
//!
//! Every function returns an [`FdxStatus`]. On anything but `FDX_STATUS_OK` a message is
//! available from [`fdx_last_error_message`] on the same thread. Handles are opaque and
//! must be released with their matching `_free` function; strings returned through
//! `char **` out-parameters are released with [`fdx_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fdexplain::prelude::*;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    NotFound = 4,
    InvalidArgument = 5,
    /// The value is still in the closure, so no explanation exists.
    NotWithdrawn = 6,
    BufferTooSmall = 7,
    Internal = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdxMode {
    Full = 0,
    Bounds = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdxStrategy {
    Worklist = 0,
    RoundRobin = 1,
    /// Seeded uniform choice; uses the `seed` argument.
    Random = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdxFormat {
    Text = 0,
    Dot = 1,
}

/// A parsed model together with its reduction rules.
pub struct FdxModel {
    model: CspModel,
    rules: Vec<ReductionRule>,
}

/// The outcome of one iteration: closure, status and withdrawal trace.
pub struct FdxResult {
    model: CspModel,
    result: ClosureResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

struct Failure(FdxStatus, String);

type FfiResult<T> = std::result::Result<T, Failure>;

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Input(_) | Error::Config(_) => FdxStatus::InvalidArgument,
            Error::UnknownRule(_) => FdxStatus::NotFound,
            Error::NotInTrace { .. } => FdxStatus::NotWithdrawn,
            Error::Internal(_) => FdxStatus::Internal,
        };
        Failure(code, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> FdxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            FdxStatus::Ok
        }
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("panic inside fdexplain");
            FdxStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| Failure(FdxStatus::NullPointer, format!("`{what}` is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(|| Failure(FdxStatus::NullPointer, format!("`{what}` is null")))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure(FdxStatus::NullPointer, format!("`{what}` is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(FdxStatus::InvalidUtf8, format!("`{what}`: {e}")))
}

fn to_c(s: String) -> FfiResult<*mut c_char> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(FdxStatus::Internal, "output contains a NUL byte".into()))
}

fn lookup(model: &CspModel, name: &str) -> FfiResult<VarId> {
    model.var_by_name(name).ok_or_else(|| Failure(FdxStatus::NotFound, format!("no variable named `{name}`")))
}

fn var_at(model: &CspModel, index: usize) -> FfiResult<VarId> {
    if index < model.num_vars() {
        Ok(VarId(index))
    } else {
        Err(Failure(FdxStatus::NotFound, format!("variable index {index} out of range")))
    }
}

/// Message for the last failing call on this thread. Empty after a successful call.
///
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn fdx_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses `source` and builds its rules in `mode`.
///
/// Bounds mode applies to offset equalities; other constraints keep their full rules.
///
/// # Safety
/// `source` must be a NUL-terminated string and `out_model` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fdx_model_parse(
    source: *const c_char,
    mode: FdxMode,
    out_model: *mut *mut FdxModel,
) -> FdxStatus {
    guard(|| {
        let slot = out(out_model, "out_model")?;
        *slot = ptr::null_mut();
        let src = text(source, "source")?;
        let model = parse_model(&ModelSource::inline(src)).map_err(|diags| {
            let msg: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
            Failure(FdxStatus::Parse, msg.join("\n"))
        })?;
        let mode = match mode {
            FdxMode::Full => RuleMode::Full,
            FdxMode::Bounds => RuleMode::Bounds,
        };
        let rules = build_rules(&model, mode)?;
        *slot = Box::into_raw(Box::new(FdxModel { model, rules }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`fdx_model_parse`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fdx_model_free(model: *mut FdxModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle and `out_count` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fdx_model_var_count(model: *const FdxModel, out_count: *mut usize) -> FdxStatus {
    guard(|| {
        *out(out_count, "out_count")? = deref(model, "model")?.model.num_vars();
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle and `out_count` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fdx_model_rule_count(model: *const FdxModel, out_count: *mut usize) -> FdxStatus {
    guard(|| {
        *out(out_count, "out_count")? = deref(model, "model")?.rules.len();
        Ok(())
    })
}

/// Index of the variable called `name`, as used by the domain accessors.
///
/// # Safety
/// `model` must be a live handle, `name` NUL-terminated and `out_index` valid.
#[no_mangle]
pub unsafe extern "C" fn fdx_model_var_index(
    model: *const FdxModel,
    name: *const c_char,
    out_index: *mut usize,
) -> FdxStatus {
    guard(|| {
        let m = deref(model, "model")?;
        *out(out_index, "out_index")? = lookup(&m.model, text(name, "name")?)?.index();
        Ok(())
    })
}

/// Name of variable `index`, as a new string.
///
/// # Safety
/// `model` must be a live handle and `out_name` valid.
#[no_mangle]
pub unsafe extern "C" fn fdx_model_var_name(
    model: *const FdxModel,
    index: usize,
    out_name: *mut *mut c_char,
) -> FdxStatus {
    guard(|| {
        let slot = out(out_name, "out_name")?;
        let m = &deref(model, "model")?.model;
        *slot = to_c(m.name(var_at(m, index)?).to_string())?;
        Ok(())
    })
}

/// Runs the rules to their closure (or to the first empty domain if `stop_on_failure`).
///
/// `seed` is read only for [`FdxStrategy::Random`].
///
/// # Safety
/// `model` must be a live handle and `out_result` valid.
#[no_mangle]
pub unsafe extern "C" fn fdx_propagate(
    model: *const FdxModel,
    strategy: FdxStrategy,
    seed: u64,
    stop_on_failure: bool,
    out_result: *mut *mut FdxResult,
) -> FdxStatus {
    guard(|| {
        let slot = out(out_result, "out_result")?;
        *slot = ptr::null_mut();
        let m = deref(model, "model")?;
        let strategy = match strategy {
            FdxStrategy::Worklist => Strategy::Worklist,
            FdxStrategy::RoundRobin => Strategy::RoundRobin,
            FdxStrategy::Random => Strategy::SeededRandom(seed),
        };
        let result = iterate(&m.model, &m.rules, &Run::Strategy(strategy), stop_on_failure)?;
        *slot = Box::into_raw(Box::new(FdxResult { model: m.model.clone(), result }));
        Ok(())
    })
}

/// # Safety
/// `result` must come from [`fdx_propagate`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fdx_result_free(result: *mut FdxResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Whether the run stopped on an empty domain, and which variable emptied.
///
/// `out_var` is left untouched when the run closed.
///
/// # Safety
/// `result` must be a live handle; `out_failed` valid; `out_var` valid or null.
#[no_mangle]
pub unsafe extern "C" fn fdx_result_failed(
    result: *const FdxResult,
    out_failed: *mut bool,
    out_var: *mut usize,
) -> FdxStatus {
    guard(|| {
        let r = deref(result, "result")?;
        let failed = out(out_failed, "out_failed")?;
        match r.result.status {
            Status::Closed => *failed = false,
            Status::Failed(x) => {
                *failed = true;
                if let Some(v) = out_var.as_mut() {
                    *v = x.index();
                }
            }
        }
        Ok(())
    })
}

/// Number of rule applications in the run.
///
/// # Safety
/// `result` must be a live handle and `out_steps` valid.
#[no_mangle]
pub unsafe extern "C" fn fdx_result_steps(result: *const FdxResult, out_steps: *mut usize) -> FdxStatus {
    guard(|| {
        *out(out_steps, "out_steps")? = deref(result, "result")?.result.trace.applied.len();
        Ok(())
    })
}

/// Copies the final domain of variable `index` into `values`, ascending.
///
/// `out_len` always receives the domain size. If `capacity` is too small nothing is
/// copied and `FDX_STATUS_BUFFER_TOO_SMALL` is returned; `values` may be null to query
/// the size.
///
/// # Safety
/// `result` must be a live handle, `out_len` valid, and `values` point to `capacity` slots.
#[no_mangle]
pub unsafe extern "C" fn fdx_result_domain(
    result: *const FdxResult,
    index: usize,
    values: *mut i64,
    capacity: usize,
    out_len: *mut usize,
) -> FdxStatus {
    guard(|| {
        let r = deref(result, "result")?;
        let len = out(out_len, "out_len")?;
        let dom = r.result.closure.get(var_at(&r.model, index)?);
        *len = dom.len();
        if values.is_null() || capacity < dom.len() {
            return Err(Failure(
                FdxStatus::BufferTooSmall,
                format!("domain has {} values, buffer holds {capacity}", dom.len()),
            ));
        }
        for (i, v) in dom.iter().enumerate() {
            *values.add(i) = v;
        }
        Ok(())
    })
}

/// Explanation of why `value` left the domain of `var` during this run.
///
/// Returns `FDX_STATUS_NOT_WITHDRAWN` when the run kept the value.
///
/// # Safety
/// `result` must be a live handle, `var` NUL-terminated and `out_text` valid.
#[no_mangle]
pub unsafe extern "C" fn fdx_result_explain(
    result: *const FdxResult,
    var: *const c_char,
    value: i64,
    format: FdxFormat,
    out_text: *mut *mut c_char,
) -> FdxStatus {
    guard(|| {
        let slot = out(out_text, "out_text")?;
        *slot = ptr::null_mut();
        let r = deref(result, "result")?;
        let y = lookup(&r.model, text(var, "var")?)?;
        if !r.model.domain(y).contains(value) {
            return Err(Failure(FdxStatus::InvalidArgument, format!("{value} is not in the domain of `{}`", r.model.name(y))));
        }
        let expl = explain_from_trace(&r.model, &r.result.trace, value, y)?;
        let rendered = match format {
            FdxFormat::Text => render_text(&expl, &r.model),
            FdxFormat::Dot => export_dot(&expl, &r.model),
        };
        *slot = to_c(rendered)?;
        Ok(())
    })
}

/// The withdrawal trace as tab-separated `step rule var=value arc` lines.
///
/// # Safety
/// `result` must be a live handle and `out_text` valid.
#[no_mangle]
pub unsafe extern "C" fn fdx_result_trace(result: *const FdxResult, out_text: *mut *mut c_char) -> FdxStatus {
    guard(|| {
        let slot = out(out_text, "out_text")?;
        let r = deref(result, "result")?;
        *slot = to_c(r.result.trace.export_text(&r.model))?;
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fdx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
