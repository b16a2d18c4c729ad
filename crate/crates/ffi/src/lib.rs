//! C interface to the arboreal library.
//!
//! Every fallible function returns an [`ArbStatus`]; on failure the message
//! is available from [`arb_last_error_message`] on the same thread. Strings
//! returned through out-parameters are owned by the caller and must be
//! released with [`arb_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use arboreal::cayley::CayleyBall;
use arboreal::metric_core::{MetricCore, SearchParams};
use arboreal::stallings::folded_core;
use arboreal::{BackendKind, Error, Group, Presentation, Rational};

/// Result of a call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArbStatus {
    Ok = 0,
    /// Null pointer or malformed UTF-8.
    InvalidArgument = 1,
    /// Input rejected by the library.
    Validation = 2,
    /// The requested radius or depth is too small.
    Horizon = 3,
    BudgetExceeded = 4,
    Panic = 5,
}

/// A group given by a presentation.
pub struct ArbGroup(Group);

/// A metric core over some group.
pub struct ArbCore(MetricCore);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(ArbStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e.exit_code() {
            3 => ArbStatus::Horizon,
            4 => ArbStatus::BudgetExceeded,
            _ => ArbStatus::Validation,
        };
        Fail(status, e.to_string())
    }
}

fn invalid(what: &str) -> Fail {
    Fail(ArbStatus::InvalidArgument, what.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ArbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ArbStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            ArbStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(invalid(&format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(&format!("{name} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| invalid(&format!("{name} is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| invalid(&format!("{name} is null")))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap().into_raw()
}

fn split(r: Rational, num: &mut i64, den: &mut i64) {
    *num = *r.numer();
    *den = *r.denom();
}

/// Parses a presentation file's text. On success `*out` holds a new group,
/// released with [`arb_presentation_free`].
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn arb_presentation_parse(text: *const c_char, out: *mut *mut ArbGroup) -> ArbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let pres = Presentation::parse(str_arg(text, "text")?)?;
        *out = Box::into_raw(Box::new(ArbGroup(Group::new(pres)?)));
        Ok(())
    })
}

/// # Safety
/// `g` must come from [`arb_presentation_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn arb_presentation_free(g: *mut ArbGroup) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Writes the normal form of `word` to `*out`.
///
/// # Safety
/// Pointers must be valid; `word` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn arb_normal_form(g: *const ArbGroup, word: *const c_char, out: *mut *mut c_char) -> ArbStatus {
    guard(|| {
        let g = &ref_arg(g, "group")?.0;
        let out = out_arg(out, "out")?;
        let w = g.parse_word(str_arg(word, "word")?)?;
        *out = to_c_string(g.format(&g.normal_form(&w)?));
        Ok(())
    })
}

/// Four-point constant of the Cayley ball of the given radius, as a fraction.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn arb_delta(g: *const ArbGroup, radius: usize, num: *mut i64, den: *mut i64) -> ArbStatus {
    guard(|| {
        let g = &ref_arg(g, "group")?.0;
        let (num, den) = (out_arg(num, "num")?, out_arg(den, "den")?);
        let d = CayleyBall::new(g, radius)?.estimate_delta()?;
        split(d, num, den);
        Ok(())
    })
}

/// Rose of the comma-separated generators, subdivided into unit edges.
///
/// # Safety
/// Pointers must be valid; `gens` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn arb_core_from_generators(g: *const ArbGroup, gens: *const c_char, out: *mut *mut ArbCore) -> ArbStatus {
    guard(|| {
        let g = &ref_arg(g, "group")?.0;
        let out = out_arg(out, "out")?;
        let core = MetricCore::from_generators(g, &g.parse_words(str_arg(gens, "gens")?)?)?;
        *out = Box::into_raw(Box::new(ArbCore(core)));
        Ok(())
    })
}

/// Applies improvements until none is found within the horizon or
/// `max_moves` have been made. `*out` receives a new core; `*moves`, if not
/// null, the number of moves made.
///
/// # Safety
/// Pointers must be valid; `moves` may be null.
#[no_mangle]
pub unsafe extern "C" fn arb_core_fold_to_minimal(
    g: *const ArbGroup,
    core: *const ArbCore,
    depth: usize,
    radius: usize,
    max_moves: usize,
    out: *mut *mut ArbCore,
    moves: *mut usize,
) -> ArbStatus {
    guard(|| {
        let g = &ref_arg(g, "group")?.0;
        let core = &ref_arg(core, "core")?.0;
        let out = out_arg(out, "out")?;
        let res = core.fold_to_minimal(g, SearchParams { depth, radius }, max_moves)?;
        if let Some(m) = moves.as_mut() {
            *m = res.moves.len();
        }
        *out = Box::into_raw(Box::new(ArbCore(res.core)));
        Ok(())
    })
}

/// Total edge length; 0 for a null core.
///
/// # Safety
/// `core` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn arb_core_size(core: *const ArbCore) -> usize {
    core.as_ref().map_or(0, |c| c.0.size())
}

/// Smallest additive constant at multiplicative constant 1 over the cover
/// ball of the given radius.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn arb_core_measure_qi(
    g: *const ArbGroup,
    core: *const ArbCore,
    radius: usize,
    c_num: *mut i64,
    c_den: *mut i64,
) -> ArbStatus {
    guard(|| {
        let g = &ref_arg(g, "group")?.0;
        let core = &ref_arg(core, "core")?.0;
        let (num, den) = (out_arg(c_num, "c_num")?, out_arg(c_den, "c_den")?);
        split(core.measure_qi(g, radius)?.estimate.c, num, den);
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn arb_core_to_json(g: *const ArbGroup, core: *const ArbCore, out: *mut *mut c_char) -> ArbStatus {
    guard(|| {
        let g = &ref_arg(g, "group")?.0;
        let core = &ref_arg(core, "core")?.0;
        let out = out_arg(out, "out")?;
        let s = serde_json::to_string(&core.to_json(g)).map_err(|e| Fail(ArbStatus::Validation, e.to_string()))?;
        *out = to_c_string(s);
        Ok(())
    })
}

/// # Safety
/// `core` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn arb_core_free(core: *mut ArbCore) {
    if !core.is_null() {
        drop(Box::from_raw(core));
    }
}

/// Whether `word` lies in the subgroup generated by the comma-separated
/// `gens`. Free groups only.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn arb_stallings_member(
    g: *const ArbGroup,
    gens: *const c_char,
    word: *const c_char,
    out: *mut bool,
) -> ArbStatus {
    guard(|| {
        let g = &ref_arg(g, "group")?.0;
        let out = out_arg(out, "out")?;
        if g.backend() != BackendKind::Free {
            return Err(Error::Unsupported("membership needs a free presentation".into()).into());
        }
        let gens = g.parse_words(str_arg(gens, "gens")?)?;
        let w = g.parse_word(str_arg(word, "word")?)?;
        *out = folded_core(&gens).membership(&w)?;
        Ok(())
    })
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn arb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn arb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
