//! C ABI over `centering-core`.
//!
//! Documents and runs are opaque handles owned by the caller and released
//! with their `_free` function. Every fallible call returns a
//! [`CenteringStatus`]; on failure `centering_last_error` describes it.
//! Strings handed out by the library are released with
//! `centering_string_free`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use libc::{c_char, c_int, size_t};

use centering_core::corpus::LoadedDocument;
use centering_core::engine::{run_document, EngineConfig, RunReport, TraceLevel};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CenteringStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    LoadFailed = 3,
    EngineFailed = 4,
    InvalidArgument = 5,
    Panicked = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CenteringTrace {
    Off = 0,
    Summary = 1,
    Full = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CenteringArtifact {
    Centering = 0,
    Resolution = 1,
    Trace = 2,
    Ambiguity = 3,
    /// The whole report as one JSON object.
    Json = 4,
}

impl CenteringTrace {
    fn from_raw(v: c_int) -> Option<TraceLevel> {
        match v {
            0 => Some(TraceLevel::Off),
            1 => Some(TraceLevel::Summary),
            2 => Some(TraceLevel::Full),
            _ => None,
        }
    }
}

impl CenteringArtifact {
    fn from_raw(v: c_int) -> Option<Self> {
        [Self::Centering, Self::Resolution, Self::Trace, Self::Ambiguity, Self::Json].into_iter().find(|a| *a as c_int == v)
    }
}

/// Pronoun counts of a run.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CenteringAmbiguity {
    pub pronouns: size_t,
    pub local: size_t,
    pub global: size_t,
    pub unambiguous: size_t,
}

/// A loaded document with its knowledge base.
pub struct CenteringDocument(LoadedDocument);

/// The result of running a document.
pub struct CenteringRun(RunReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: CenteringStatus, message: impl Into<String>) -> CenteringStatus {
    set_error(message);
    status
}

fn guard(f: impl FnOnce() -> CenteringStatus) -> CenteringStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(CenteringStatus::Panicked, "internal panic"),
    }
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<Option<PathBuf>, CenteringStatus> {
    if p.is_null() {
        return Ok(None);
    }
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(Some(PathBuf::from(s))),
        Err(_) => Err(fail(CenteringStatus::InvalidUtf8, format!("{what} is not UTF-8"))),
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn centering_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Loads a document. `taxonomy` and `categories` may be NULL to use the
/// document's own directives.
///
/// # Safety
/// String arguments must be NULL or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn centering_document_load(
    path: *const c_char,
    taxonomy: *const c_char,
    categories: *const c_char,
    out: *mut *mut CenteringDocument,
) -> CenteringStatus {
    guard(|| {
        if out.is_null() {
            return fail(CenteringStatus::NullArgument, "out is NULL");
        }
        *out = ptr::null_mut();
        let path = match path_arg(path, "path") {
            Ok(Some(p)) => p,
            Ok(None) => return fail(CenteringStatus::NullArgument, "path is NULL"),
            Err(s) => return s,
        };
        let (taxonomy, categories) = match (path_arg(taxonomy, "taxonomy"), path_arg(categories, "categories")) {
            (Ok(t), Ok(c)) => (t, c),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match LoadedDocument::load(&path, taxonomy.as_deref(), categories.as_deref()) {
            Ok(doc) => {
                *out = Box::into_raw(Box::new(CenteringDocument(doc)));
                CenteringStatus::Ok
            }
            Err(e) => fail(CenteringStatus::LoadFailed, e.to_string()),
        }
    })
}

/// # Safety
/// `doc` must be NULL or a handle from `centering_document_load` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn centering_document_free(doc: *mut CenteringDocument) {
    if !doc.is_null() {
        drop(Box::from_raw(doc));
    }
}

/// Runs the first `sentences` sentences of `doc` (0 means all). `trace` is
/// a `CenteringTrace` value.
///
/// # Safety
/// `doc` must be a live document handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn centering_run(
    doc: *const CenteringDocument,
    max_readings: size_t,
    trace: c_int,
    sentences: size_t,
    out: *mut *mut CenteringRun,
) -> CenteringStatus {
    guard(|| {
        if doc.is_null() || out.is_null() {
            return fail(CenteringStatus::NullArgument, "doc or out is NULL");
        }
        *out = ptr::null_mut();
        if max_readings == 0 {
            return fail(CenteringStatus::InvalidArgument, "max_readings must be at least 1");
        }
        let Some(trace) = CenteringTrace::from_raw(trace) else {
            return fail(CenteringStatus::InvalidArgument, format!("unknown trace level {trace}"));
        };
        let config = EngineConfig { max_readings, trace, ..EngineConfig::default() };
        let limit = (sentences > 0).then_some(sentences);
        match run_document(&(*doc).0, config, limit) {
            Ok(report) => {
                *out = Box::into_raw(Box::new(CenteringRun(report)));
                CenteringStatus::Ok
            }
            Err(e) => fail(CenteringStatus::EngineFailed, e.to_string()),
        }
    })
}

/// # Safety
/// `run` must be NULL or a handle from `centering_run` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn centering_run_free(run: *mut CenteringRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of centering rows (one per reading per utterance); 0 for NULL.
///
/// # Safety
/// `run` must be NULL or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn centering_run_row_count(run: *const CenteringRun) -> size_t {
    run.as_ref().map_or(0, |r| r.0.rows.len())
}

/// # Safety
/// `run` must be a live run handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn centering_run_ambiguity(run: *const CenteringRun, out: *mut CenteringAmbiguity) -> CenteringStatus {
    guard(|| {
        let (Some(run), false) = (run.as_ref(), out.is_null()) else {
            return fail(CenteringStatus::NullArgument, "run or out is NULL");
        };
        let a = &run.0.ambiguity;
        *out = CenteringAmbiguity { pronouns: a.total(), local: a.local, global: a.global, unambiguous: a.unambiguous };
        CenteringStatus::Ok
    })
}

/// Renders one `CenteringArtifact` as a new string, to be released with
/// `centering_string_free`.
///
/// # Safety
/// `run` must be a live run handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn centering_run_artifact(
    run: *const CenteringRun,
    artifact: c_int,
    out: *mut *mut c_char,
) -> CenteringStatus {
    guard(|| {
        if out.is_null() {
            return fail(CenteringStatus::NullArgument, "out is NULL");
        }
        *out = ptr::null_mut();
        let Some(run) = run.as_ref() else {
            return fail(CenteringStatus::NullArgument, "run is NULL");
        };
        let Some(artifact) = CenteringArtifact::from_raw(artifact) else {
            return fail(CenteringStatus::InvalidArgument, format!("unknown artifact {artifact}"));
        };
        let r = &run.0;
        let text = match artifact {
            CenteringArtifact::Centering => r.centering_text(),
            CenteringArtifact::Resolution => r.resolution_text(),
            CenteringArtifact::Trace => r.trace_text(),
            CenteringArtifact::Ambiguity => r.ambiguity_text(),
            CenteringArtifact::Json => match r.to_json() {
                Ok(s) => s,
                Err(e) => return fail(CenteringStatus::EngineFailed, e.to_string()),
            },
        };
        match CString::new(text) {
            Ok(c) => {
                *out = c.into_raw();
                CenteringStatus::Ok
            }
            Err(_) => fail(CenteringStatus::EngineFailed, "artifact contains a NUL byte"),
        }
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn centering_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
