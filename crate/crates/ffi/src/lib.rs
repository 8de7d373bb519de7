//! C ABI over `zerosum_stop`.
//!
//! Every fallible call returns a [`ZsStatus`]. On failure the message is kept
//! per thread and can be copied out with [`zs_last_error_message`]. Exact
//! values cross the boundary as NUL-terminated `"p/q"` strings written into
//! caller buffers; `*out_len` always receives the length the full string
//! needs (without the NUL), so callers can retry with a larger buffer.
//!
//! Handles (`ZsTables`, `ZsMultiset`) are owned by the caller and released
//! with the matching `_free` function. They are immutable after
//! construction and may be shared between threads.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use zerosum_stop::engine::{exact_expected_payoff, monte_carlo, Strategy};
use zerosum_stop::numeric::{format_fraction, to_f64};
use zerosum_stop::reduction::f_value;
use zerosum_stop::strategies::{build_tables_with, general_optimal_value, TieRule};
use zerosum_stop::{Error, Multiset, PayoffMode, StrategyTables};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Domain = 4,
    TooLarge = 5,
    BufferTooSmall = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZsMode {
    Suffix = 0,
    Prefix = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZsStrategy {
    Threshold = 0,
    Optimal = 1,
    Middle = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZsTie {
    Stop = 0,
    Continue = 1,
}

/// Monte Carlo summary; mirrors the JSON report minus the strings.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZsSimReport {
    pub n: usize,
    pub reps: u64,
    pub seed: u64,
    pub mean: f64,
    pub stderr: f64,
}

/// Opaque backward-induction tables for the balanced ±1 deck.
pub struct ZsTables(Arc<StrategyTables>);

/// Opaque zero-sum multiset.
pub struct ZsMultiset(Multiset);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: ZsStatus, msg: impl Into<String>) -> ZsStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> ZsStatus {
    let status = match &e {
        Error::Parse { .. } | Error::ZeroDenominator { .. } => ZsStatus::Parse,
        Error::NonZeroSum { .. } | Error::Domain(_) => ZsStatus::Domain,
        Error::TooLarge { .. } => ZsStatus::TooLarge,
        Error::Io(_) => ZsStatus::Io,
    };
    fail(status, e.to_string())
}

/// Runs `f`, converting library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), ZsStatus>) -> ZsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ZsStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(ZsStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, ZsStatus> {
    p.as_ref()
        .ok_or_else(|| fail(ZsStatus::NullPointer, format!("{what} is null")))
}

fn check_out<T>(p: *mut T, what: &str) -> Result<(), ZsStatus> {
    if p.is_null() {
        Err(fail(ZsStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Copies `s` plus a NUL into `buf` when it fits; always reports the length.
unsafe fn write_string(
    s: &str,
    buf: *mut c_char,
    cap: usize,
    out_len: *mut usize,
) -> Result<(), ZsStatus> {
    if !out_len.is_null() {
        *out_len = s.len();
    }
    if buf.is_null() || cap < s.len() + 1 {
        return Err(fail(
            ZsStatus::BufferTooSmall,
            format!(
                "buffer of {cap} bytes cannot hold {} bytes plus NUL",
                s.len()
            ),
        ));
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf as *mut u8, s.len());
    *buf.add(s.len()) = 0;
    Ok(())
}

fn mode(m: ZsMode) -> PayoffMode {
    match m {
        ZsMode::Suffix => PayoffMode::Suffix,
        ZsMode::Prefix => PayoffMode::Prefix,
    }
}

fn strategy(kind: ZsStrategy, multiset: &Multiset, m: PayoffMode) -> Result<Strategy, ZsStatus> {
    Ok(match kind {
        ZsStrategy::Threshold => Strategy::threshold_for(multiset.len()),
        ZsStrategy::Optimal => Strategy::optimal_for(multiset, m).map_err(from_error)?,
        ZsStrategy::Middle => Strategy::Middle,
    })
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to fit) and returns the full message length. Returns 0 when the
/// last call succeeded.
#[no_mangle]
pub unsafe extern "C" fn zs_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let k = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, k);
            *buf.add(k) = 0;
        }
        bytes.len()
    })
}

/// Builds the tables for the deck of `m` minus ones and `m` plus ones.
#[no_mangle]
pub unsafe extern "C" fn zs_tables_build(
    m: usize,
    tie: ZsTie,
    out: *mut *mut ZsTables,
) -> ZsStatus {
    guard(|| {
        check_out(out, "out")?;
        let rule = match tie {
            ZsTie::Stop => TieRule::Stop,
            ZsTie::Continue => TieRule::Continue,
        };
        let tables = build_tables_with(m, rule).map_err(from_error)?;
        *out = Box::into_raw(Box::new(ZsTables(Arc::new(tables))));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn zs_tables_free(tables: *mut ZsTables) {
    if !tables.is_null() {
        drop(Box::from_raw(tables));
    }
}

/// Half-length `m` of the tables, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn zs_tables_m(tables: *const ZsTables) -> usize {
    tables.as_ref().map_or(0, |t| t.0.m())
}

fn check_state(t: &StrategyTables, i: usize, j: usize) -> Result<(), ZsStatus> {
    if i > t.m() || j > t.m() {
        return Err(fail(
            ZsStatus::InvalidArgument,
            format!("state ({i},{j}) is outside 0..={}", t.m()),
        ));
    }
    Ok(())
}

/// Writes `T[i,j]` as `"p/q"`.
#[no_mangle]
pub unsafe extern "C" fn zs_tables_value(
    tables: *const ZsTables,
    i: usize,
    j: usize,
    buf: *mut c_char,
    cap: usize,
    out_len: *mut usize,
) -> ZsStatus {
    guard(|| {
        let t = &deref(tables, "tables")?.0;
        check_state(t, i, j)?;
        write_string(&format_fraction(t.value(i, j)), buf, cap, out_len)
    })
}

/// `T[i,j]` rounded to the nearest double.
#[no_mangle]
pub unsafe extern "C" fn zs_tables_value_f64(
    tables: *const ZsTables,
    i: usize,
    j: usize,
    out: *mut f64,
) -> ZsStatus {
    guard(|| {
        let t = &deref(tables, "tables")?.0;
        check_state(t, i, j)?;
        check_out(out, "out")?;
        *out = to_f64(t.value(i, j));
        Ok(())
    })
}

/// `S[i,j]`: whether the optimal player stops at state `(i,j)`.
#[no_mangle]
pub unsafe extern "C" fn zs_tables_stops(
    tables: *const ZsTables,
    i: usize,
    j: usize,
    out: *mut bool,
) -> ZsStatus {
    guard(|| {
        let t = &deref(tables, "tables")?.0;
        check_state(t, i, j)?;
        check_out(out, "out")?;
        *out = t.stops(i, j);
        Ok(())
    })
}

/// Parses a multiset from text (whitespace or comma separated values such as
/// `-5 1/2 0.25`, `#` comments, or a JSON array).
#[no_mangle]
pub unsafe extern "C" fn zs_multiset_parse(
    text: *const c_char,
    out: *mut *mut ZsMultiset,
) -> ZsStatus {
    guard(|| {
        check_out(out, "out")?;
        let text = deref(text, "text")?;
        let s = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| fail(ZsStatus::Parse, "text is not valid UTF-8"))?;
        let m = zerosum_stop::parse_multiset(s).map_err(from_error)?;
        *out = Box::into_raw(Box::new(ZsMultiset(m)));
        Ok(())
    })
}

/// The balanced deck of `m` minus ones and `m` plus ones.
#[no_mangle]
pub unsafe extern "C" fn zs_multiset_binary(m: usize, out: *mut *mut ZsMultiset) -> ZsStatus {
    guard(|| {
        check_out(out, "out")?;
        if m == 0 {
            return Err(fail(ZsStatus::InvalidArgument, "m must be at least 1"));
        }
        *out = Box::into_raw(Box::new(ZsMultiset(Multiset::binary(m))));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn zs_multiset_len(multiset: *const ZsMultiset) -> usize {
    multiset.as_ref().map_or(0, |m| m.0.len())
}

#[no_mangle]
pub unsafe extern "C" fn zs_multiset_free(multiset: *mut ZsMultiset) {
    if !multiset.is_null() {
        drop(Box::from_raw(multiset));
    }
}

/// Exact optimal expected payoff of an arbitrary small multiset.
#[no_mangle]
pub unsafe extern "C" fn zs_general_optimal_value(
    multiset: *const ZsMultiset,
    payoff: ZsMode,
    buf: *mut c_char,
    cap: usize,
    out_len: *mut usize,
) -> ZsStatus {
    guard(|| {
        let m = &deref(multiset, "multiset")?.0;
        let v = general_optimal_value(m, mode(payoff)).map_err(from_error)?;
        write_string(&format_fraction(&v), buf, cap, out_len)
    })
}

/// Exact expectation of the positive part of the sum of a random half.
#[no_mangle]
pub unsafe extern "C" fn zs_f_value(
    multiset: *const ZsMultiset,
    buf: *mut c_char,
    cap: usize,
    out_len: *mut usize,
) -> ZsStatus {
    guard(|| {
        let m = &deref(multiset, "multiset")?.0;
        let v = f_value(m).map_err(from_error)?;
        write_string(&format_fraction(&v), buf, cap, out_len)
    })
}

/// Exact stop-in-the-middle expectation for the balanced deck of even size `n`.
#[no_mangle]
pub unsafe extern "C" fn zs_w3_exact(
    n: u64,
    buf: *mut c_char,
    cap: usize,
    out_len: *mut usize,
) -> ZsStatus {
    guard(|| {
        let v = zerosum_stop::combinatorics::w3_exact(n).map_err(from_error)?;
        write_string(&format_fraction(&v), buf, cap, out_len)
    })
}

/// Exact expected payoff of a strategy by enumerating every ordering.
#[no_mangle]
pub unsafe extern "C" fn zs_exact_expected(
    kind: ZsStrategy,
    multiset: *const ZsMultiset,
    payoff: ZsMode,
    buf: *mut c_char,
    cap: usize,
    out_len: *mut usize,
) -> ZsStatus {
    guard(|| {
        let m = &deref(multiset, "multiset")?.0;
        let s = strategy(kind, m, mode(payoff))?;
        let v = exact_expected_payoff(&s, m, mode(payoff)).map_err(from_error)?;
        write_string(&format_fraction(&v), buf, cap, out_len)
    })
}

/// Seeded Monte Carlo run; bit-identical to the CLI `simulate` verb.
#[no_mangle]
pub unsafe extern "C" fn zs_simulate(
    kind: ZsStrategy,
    multiset: *const ZsMultiset,
    payoff: ZsMode,
    reps: u64,
    seed: u64,
    out: *mut ZsSimReport,
) -> ZsStatus {
    guard(|| {
        check_out(out, "out")?;
        let m = &deref(multiset, "multiset")?.0;
        let s = strategy(kind, m, mode(payoff))?;
        let r = monte_carlo(&s, m, mode(payoff), reps, seed).map_err(from_error)?;
        *out = ZsSimReport {
            n: r.n,
            reps: r.reps,
            seed: r.seed,
            mean: r.mean,
            stderr: r.stderr,
        };
        Ok(())
    })
}
