//! C ABI for the remediation library.
//!
//! Documents and tagmaps are opaque handles created and released through
//! this interface. Every function returns a [`PrStatus`]; on failure the
//! message is available from [`pr_last_error`] on the same thread until the
//! next call. Strings passed in must be NUL-terminated UTF-8. Strings and
//! byte buffers handed out are owned by the caller and released with
//! [`pr_string_free`] and [`pr_bytes_free`].
//!
//! Panics never cross the boundary; they are reported as
//! [`PrStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pdf_remediate::model::TaggedDocument;
use pdf_remediate::scorer::{score_document, TruthMap};
use pdf_remediate::tagmap::{StepAction, Tagmap};
use pdf_remediate::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    MalformedPdf = 3,
    InvalidInput = 4,
    ValidationFailed = 5,
    StateError = 6,
    Io = 7,
    Panic = 8,
}

/// A parsed PDF.
pub struct PrDocument {
    doc: TaggedDocument,
}

/// Tagging decisions for one document.
pub struct PrTagmap {
    map: Tagmap,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

struct Failure(PrStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::MalformedPdf { .. } => PrStatus::MalformedPdf,
            Error::InvalidTree(_) | Error::ValidationFailed(_) | Error::StepsIncomplete { .. } => {
                PrStatus::ValidationFailed
            }
            Error::InvalidInput(_) | Error::Json(_) | Error::Latex(_) | Error::TruthMismatch(_) => {
                PrStatus::InvalidInput
            }
            Error::Io(_) => PrStatus::Io,
            _ => PrStatus::StateError,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PrStatus::NullArgument, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PrStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PrStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("internal panic: {message}"));
            PrStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(PrStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("NULs removed").into_raw()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call on this thread; do not free.
#[no_mangle]
pub extern "C" fn pr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses `len` bytes of PDF into a new document handle.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pr_document_open(data: *const u8, len: usize, out: *mut *mut PrDocument) -> PrStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        if data.is_null() {
            return Err(null("data"));
        }
        let bytes = std::slice::from_raw_parts(data, len);
        let doc = pdf_remediate::pdf::parse_pdf(bytes)?;
        *out = Box::into_raw(Box::new(PrDocument { doc }));
        Ok(())
    })
}

/// # Safety
/// `doc` must be NULL or a handle from [`pr_document_open`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pr_document_free(doc: *mut PrDocument) {
    if !doc.is_null() {
        drop(Box::from_raw(doc));
    }
}

/// Number of pages, or 0 for a NULL handle.
///
/// # Safety
/// `doc` must be NULL or a live document handle.
#[no_mangle]
pub unsafe extern "C" fn pr_document_page_count(doc: *const PrDocument) -> usize {
    doc.as_ref().map_or(0, |d| d.doc.pages.len())
}

/// Runs automatic tagging on `doc`.
///
/// # Safety
/// `doc` must be a live document handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pr_autotag(doc: *const PrDocument, out: *mut *mut PrTagmap) -> PrStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let doc = ref_arg(doc, "doc")?;
        let map = pdf_remediate::autotag::auto_tag(&doc.doc)?;
        *out = Box::into_raw(Box::new(PrTagmap { map }));
        Ok(())
    })
}

/// Loads a tagmap from JSON and checks it against `doc`.
///
/// # Safety
/// `doc` must be a live document handle, `json` a C string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pr_tagmap_from_json(
    doc: *const PrDocument,
    json: *const c_char,
    out: *mut *mut PrTagmap,
) -> PrStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let doc = ref_arg(doc, "doc")?;
        let map = Tagmap::from_json(str_arg(json, "json")?.as_bytes())?;
        map.check_consistency(&doc.doc)?;
        *out = Box::into_raw(Box::new(PrTagmap { map }));
        Ok(())
    })
}

/// # Safety
/// `map` must be NULL or a tagmap handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pr_tagmap_free(map: *mut PrTagmap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Serializes the tagmap; free the result with [`pr_string_free`].
///
/// # Safety
/// `map` must be a live tagmap handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pr_tagmap_to_json(map: *const PrTagmap, out: *mut *mut c_char) -> PrStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let map = ref_arg(map, "map")?;
        *out = c_string(String::from_utf8(map.map.to_json()).expect("JSON is UTF-8"));
        Ok(())
    })
}

/// Applies one step action given as JSON, for example
/// `{"action":"set_heading_level","region":3,"level":2}`. The tagmap is
/// unchanged on failure.
///
/// # Safety
/// `map` and `doc` must be live handles; `action_json` a C string.
#[no_mangle]
pub unsafe extern "C" fn pr_tagmap_apply(
    map: *mut PrTagmap,
    doc: *const PrDocument,
    action_json: *const c_char,
) -> PrStatus {
    guard(|| {
        let map = out_arg(map, "map")?;
        let doc = ref_arg(doc, "doc")?;
        let action: StepAction =
            serde_json::from_str(str_arg(action_json, "action_json")?).map_err(Error::from)?;
        map.map.apply(&doc.doc, &action)?;
        Ok(())
    })
}

/// Writes the tagged PDF described by `map`. The buffer is released with
/// [`pr_bytes_free`] using the returned length.
///
/// # Safety
/// `doc` and `map` must be live handles; `out_data` and `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn pr_export(
    doc: *const PrDocument,
    map: *const PrTagmap,
    out_data: *mut *mut u8,
    out_len: *mut usize,
) -> PrStatus {
    guard(|| {
        let out_data = out_arg(out_data, "out_data")?;
        let out_len = out_arg(out_len, "out_len")?;
        *out_data = ptr::null_mut();
        *out_len = 0;
        let doc = ref_arg(doc, "doc")?;
        let map = ref_arg(map, "map")?;
        let tree = map.map.assemble_valid(&doc.doc)?;
        let bytes = pdf_remediate::pdf::write_tagged_pdf(&doc.doc, &tree, &map.map.meta)?.into_boxed_slice();
        *out_len = bytes.len();
        *out_data = Box::into_raw(bytes).cast::<u8>();
        Ok(())
    })
}

/// Scores the structure tree of `doc` against a ground-truth JSON document
/// and returns the report as JSON.
///
/// # Safety
/// `doc` must be a live handle, `truth_json` a C string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pr_score(doc: *const PrDocument, truth_json: *const c_char, out: *mut *mut c_char) -> PrStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let doc = ref_arg(doc, "doc")?;
        let truth = TruthMap::from_json(str_arg(truth_json, "truth_json")?.as_bytes())?;
        let report = score_document(&doc.doc, &truth)?;
        *out = c_string(serde_json::to_string(&report).map_err(Error::from)?);
        Ok(())
    })
}

/// Spoken form of a LaTeX formula.
///
/// # Safety
/// `latex` must be a C string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pr_mathspeak(latex: *const c_char, out: *mut *mut c_char) -> PrStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let text = pdf_remediate::mathtext::formula_alt_text(str_arg(latex, "latex")?).map_err(Error::from)?;
        *out = c_string(text);
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn pr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `data` must be NULL or a buffer from [`pr_export`] with its length.
#[no_mangle]
pub unsafe extern "C" fn pr_bytes_free(data: *mut u8, len: usize) {
    if !data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(data, len)));
    }
}
