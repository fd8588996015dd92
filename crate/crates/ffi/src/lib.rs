//! C interface to the `amorphic` crate.
//!
//! Algebras live behind the opaque [`AmAlgebra`] handle. Every fallible call
//! returns an [`AmStatus`]; on anything other than `AM_STATUS_OK` a
//! description is available from [`am_last_error_message`] on the same
//! thread. Strings handed out by the library are NUL-terminated UTF-8 and
//! must be released with [`am_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use amorphic::amorphic::{
    construct, generalized_affine_constants, is_amorphic, recover_spec, DegreeSpec,
};
use amorphic::calgebra::{table_check, verify_associativity, verify_axioms, CAlgebra};
use amorphic::duality::{characters, dual_algebra};
use amorphic::fusion::{fuse, Fusion, Partition};
use amorphic::qfield::parse_rational;
use amorphic::realization::{build_plane, matrix_algebra};
use amorphic::{canonical_json, Error};

/// Opaque algebra handle.
pub struct AmAlgebra {
    inner: CAlgebra,
}

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmStatus {
    Ok = 0,
    /// A verification ran to completion and found a violation.
    CheckFailed = 1,
    NullPointer = 2,
    InvalidUtf8 = 3,
    Malformed = 4,
    InvalidSpec = 5,
    NotAmorphic = 6,
    Trivial = 7,
    InvalidPartition = 8,
    StarNotPreserved = 9,
    NotClosed = 10,
    Precondition = 11,
    Plane = 12,
    Characters = 13,
    Arithmetic = 14,
    Internal = 15,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    let c = CString::new(msg).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> AmStatus {
    match err {
        Error::Malformed(_)
        | Error::Json(_)
        | Error::Io(_)
        | Error::AxiomViolated { .. }
        | Error::NotInSpan(_) => AmStatus::Malformed,
        Error::InvalidSpec(_) | Error::BadEpsilon(_) => AmStatus::InvalidSpec,
        Error::NotAmorphic(_) => AmStatus::NotAmorphic,
        Error::Trivial(_) => AmStatus::Trivial,
        Error::InvalidPartition(_) => AmStatus::InvalidPartition,
        Error::StarNotPreserved(_) => AmStatus::StarNotPreserved,
        Error::Precondition(_) | Error::CapExceeded { .. } => AmStatus::Precondition,
        Error::Plane(_) => AmStatus::Plane,
        Error::Characters(_) => AmStatus::Characters,
        Error::Qfield(_) => AmStatus::Arithmetic,
    }
}

fn fail(status: AmStatus, msg: impl Into<String>) -> AmStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> AmStatus) -> AmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(AmStatus::Internal, msg)
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, AmStatus> {
    if p.is_null() {
        return Err(fail(AmStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(AmStatus::InvalidUtf8, "argument is not valid UTF-8"))
}

unsafe fn algebra<'a>(p: *const AmAlgebra) -> Result<&'a CAlgebra, AmStatus> {
    p.as_ref()
        .map(|h| &h.inner)
        .ok_or_else(|| fail(AmStatus::NullPointer, "null algebra handle"))
}

unsafe fn put_algebra(out: *mut *mut AmAlgebra, a: CAlgebra) -> AmStatus {
    *out = Box::into_raw(Box::new(AmAlgebra { inner: a }));
    AmStatus::Ok
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> AmStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            AmStatus::Ok
        }
        Err(_) => fail(AmStatus::Internal, "output contains a NUL byte"),
    }
}

fn check_out<T>(out: *mut *mut T) -> Result<(), AmStatus> {
    if out.is_null() {
        Err(fail(AmStatus::NullPointer, "null output pointer"))
    } else {
        Ok(())
    }
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! lib {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return fail(status_of(&err), err.to_string()),
        }
    };
}

/// Message for the last non-OK status on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn am_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses algebra JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn am_algebra_from_json(
    json: *const c_char,
    out: *mut *mut AmAlgebra,
) -> AmStatus {
    guard(|| {
        tri!(check_out(out));
        let s = tri!(read_str(json));
        put_algebra(out, lib!(CAlgebra::from_json(s)))
    })
}

/// Canonical JSON of an algebra. Free the result with [`am_string_free`].
///
/// # Safety
/// `a` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn am_algebra_to_json(
    a: *const AmAlgebra,
    out: *mut *mut c_char,
) -> AmStatus {
    guard(|| {
        tri!(check_out(out));
        let a = tri!(algebra(a));
        put_string(out, a.to_json())
    })
}

/// Dimension of the algebra, or 0 for a null handle.
///
/// # Safety
/// `a` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn am_algebra_dim(a: *const AmAlgebra) -> usize {
    a.as_ref().map_or(0, |h| h.inner.dim())
}

/// Builds the amorphic algebra of a degree spec given as
/// `{"D": ["p/q", ...], "epsilon": 1}`.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn am_construct(
    spec_json: *const c_char,
    out: *mut *mut AmAlgebra,
) -> AmStatus {
    guard(|| {
        tri!(check_out(out));
        let s = tri!(read_str(spec_json));
        let spec: DegreeSpec = lib!(serde_json::from_str(s).map_err(Error::from));
        put_algebra(out, lib!(construct(&spec)))
    })
}

/// Homogeneous algebra with `d = sqrt(n) + epsilon`; `n` is a rational
/// string such as `"16"`.
///
/// # Safety
/// `n` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn am_generalized_affine(
    n: *const c_char,
    epsilon: i8,
    out: *mut *mut AmAlgebra,
) -> AmStatus {
    guard(|| {
        tri!(check_out(out));
        let n = lib!(parse_rational(tri!(read_str(n))).map_err(Error::from));
        put_algebra(out, lib!(generalized_affine_constants(&n, epsilon)))
    })
}

/// Algebra of the affine plane of prime order `q`, computed from its
/// incidence matrices.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn am_realize_affine(q: u64, out: *mut *mut AmAlgebra) -> AmStatus {
    guard(|| {
        tri!(check_out(out));
        let plane = lib!(build_plane(q));
        put_algebra(out, lib!(matrix_algebra(&plane)))
    })
}

/// Checks the axioms and associativity, plus the amorphic criterion and
/// table condition when requested. Returns `AM_STATUS_CHECK_FAILED` when a
/// check fails. If `report_out` is not NULL it receives the JSON report.
///
/// # Safety
/// `a` must be a live handle; `report_out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn am_verify(
    a: *const AmAlgebra,
    amorphic: bool,
    table: bool,
    report_out: *mut *mut c_char,
) -> AmStatus {
    guard(|| {
        let a = tri!(algebra(a));
        let mut r = verify_axioms(a);
        r.extend(verify_associativity(a));
        if amorphic {
            r.extend(is_amorphic(a));
        }
        if table {
            r.checks.push(table_check(a));
        }
        let passed = r.passed();
        if !report_out.is_null() {
            let v = serde_json::json!({ "passed": passed, "checks": r.checks });
            tri!(match put_string(report_out, canonical_json(&v)) {
                AmStatus::Ok => Ok(()),
                s => Err(s),
            });
        }
        if passed {
            AmStatus::Ok
        } else {
            let w = r
                .first_witness()
                .map(|w| w.message.clone())
                .unwrap_or_default();
            fail(AmStatus::CheckFailed, w)
        }
    })
}

/// Writes whether the algebra satisfies the amorphic criterion.
///
/// # Safety
/// `a` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn am_is_amorphic(a: *const AmAlgebra, out: *mut bool) -> AmStatus {
    guard(|| {
        let a = tri!(algebra(a));
        if out.is_null() {
            return fail(AmStatus::NullPointer, "null output pointer");
        }
        *out = is_amorphic(a).passed();
        AmStatus::Ok
    })
}

/// Recovers the degree spec as JSON.
///
/// # Safety
/// `a` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn am_recover_spec(a: *const AmAlgebra, out: *mut *mut c_char) -> AmStatus {
    guard(|| {
        tri!(check_out(out));
        let a = tri!(algebra(a));
        let spec = lib!(recover_spec(a));
        put_string(out, lib!(serde_json::to_string(&spec).map_err(Error::from)))
    })
}

/// Fuses along `{"classes": [[...], ...]}`. Returns `AM_STATUS_NOT_CLOSED`
/// when the partition does not give a subalgebra.
///
/// # Safety
/// `a` must be a live handle, `partition_json` a NUL-terminated string and
/// `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn am_fuse(
    a: *const AmAlgebra,
    partition_json: *const c_char,
    out: *mut *mut AmAlgebra,
) -> AmStatus {
    guard(|| {
        tri!(check_out(out));
        let a = tri!(algebra(a));
        let p = lib!(Partition::from_json(
            tri!(read_str(partition_json)),
            a.dim(),
            a.identity()
        ));
        match lib!(fuse(a, &p)) {
            Fusion::Closed(f) => put_algebra(out, f),
            Fusion::NotClosed(w) => fail(
                AmStatus::NotClosed,
                format!(
                    "classes {:?} give coefficients {} and {} inside class {}",
                    w.classes, w.values.0, w.values.1, w.t_class
                ),
            ),
        }
    })
}

/// Character table `{"labels", "P", "Q", "dual_degrees"}` as JSON.
///
/// # Safety
/// `a` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn am_characters(
    a: *const AmAlgebra,
    seed: u64,
    out: *mut *mut c_char,
) -> AmStatus {
    guard(|| {
        tri!(check_out(out));
        let a = tri!(algebra(a));
        put_string(out, lib!(characters(a, seed)).to_json())
    })
}

/// Dual algebra on the characters of a commutative symmetric algebra.
///
/// # Safety
/// `a` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn am_dual(
    a: *const AmAlgebra,
    seed: u64,
    out: *mut *mut AmAlgebra,
) -> AmStatus {
    guard(|| {
        tri!(check_out(out));
        let a = tri!(algebra(a));
        let (dual, _) = lib!(dual_algebra(a, seed));
        put_algebra(out, dual)
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `a` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn am_algebra_free(a: *mut AmAlgebra) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn am_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
