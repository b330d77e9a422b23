//! C ABI for the multcomp library.
//!
//! Conventions:
//! - every fallible function returns an `McStatus` code and writes its
//!   results through out-pointers;
//! - handles (`McPrimeTable`, `McFactorSieve`, `McIntegerSet`,
//!   `McPartition`, `McFamily`) are opaque and freed with their matching
//!   `*_free` function exactly once;
//! - the message of the most recent error on the calling thread is
//!   available through `mc_last_error`;
//! - the declarations live in `include/multcomp.h`.
//!
//! The blanket safety contract is the usual C one: handle and out
//! pointers must be valid for the call, and buffers must really have the
//! advertised capacity. Functions with sharper requirements carry their
//! own `# Safety` section.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::sync::Arc;

use multcomp::complement::{
    build_checkpoint_family, build_smooth_family, write_family_file, CheckpointConfig,
    GrowthPolicy,
};
use multcomp::partition::{build_partition, sign_solve, PartitionSpec, PrimePartition, Sign};
use multcomp::primes::{sieve_primes, FactorSieve, PrimeTable};
use multcomp::repr::{
    joint_repr_count, summatory_repr, verify_complement, ComplementFamily, IntegerSet,
    Verification,
};
use multcomp::Error;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    ResourceBudget = 4,
    Domain = 5,
    Infeasible = 6,
    Unverified = 7,
    Parse = 8,
    Io = 9,
    Internal = 10,
    BufferTooSmall = 11,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = sanitized);
}

fn status_of(err: &Error) -> McStatus {
    match err {
        Error::OutOfRange { .. } => McStatus::OutOfRange,
        Error::ResourceBudget { .. } => McStatus::ResourceBudget,
        Error::Domain(_) => McStatus::Domain,
        Error::InvalidArgument(_) => McStatus::InvalidArgument,
        Error::NotVerified { .. } => McStatus::Unverified,
        Error::InfeasibleTarget { .. } | Error::AdjustUnreachable { .. } => McStatus::Infeasible,
        Error::DominanceViolated { .. } => McStatus::Infeasible,
        Error::BlockSizeNotFound { .. } => McStatus::InvalidArgument,
        Error::InvariantViolation(_) => McStatus::Internal,
        Error::Parse { .. } => McStatus::Parse,
        Error::Io(_) => McStatus::Io,
    }
}

fn fail(err: Error) -> McStatus {
    let status = status_of(&err);
    set_error(&err.to_string());
    status
}

fn null_fail(what: &str) -> McStatus {
    set_error(&format!("null pointer: {what}"));
    McStatus::NullPointer
}

/// Copy the last error message (NUL-terminated) into `buf` and return the
/// full length including the terminator; a zero `cap` just queries the
/// length.
///
/// # Safety
/// `buf` must point to at least `cap` writable bytes when `cap > 0`.
#[no_mangle]
pub unsafe extern "C" fn mc_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes_with_nul();
        if cap > 0 && !buf.is_null() {
            let n = bytes.len().min(cap);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                // Always terminate what was written.
                *buf.add(n - 1) = 0;
            }
        }
        bytes.len()
    })
}

/// NUL-terminated library version; static storage, do not free.
#[no_mangle]
pub extern "C" fn mc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

macro_rules! write_out {
    ($ptr:expr, $value:expr, $name:literal) => {
        if $ptr.is_null() {
            return null_fail($name);
        } else {
            unsafe { *$ptr = $value }
        }
    };
}

macro_rules! deref {
    ($ptr:expr, $name:literal) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => return null_fail($name),
        }
    };
}

// --- prime tables ---------------------------------------------------------

pub struct McPrimeTable(Arc<PrimeTable>);

/// Sieve all primes up to `limit` into a new handle.
#[no_mangle]
pub unsafe extern "C" fn mc_prime_table_new(limit: u64, out: *mut *mut McPrimeTable) -> McStatus {
    match sieve_primes(limit) {
        Ok(table) => {
            write_out!(
                out,
                Box::into_raw(Box::new(McPrimeTable(Arc::new(table)))),
                "out"
            );
            McStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `table` must come from `mc_prime_table_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mc_prime_table_free(table: *mut McPrimeTable) {
    if !table.is_null() {
        drop(unsafe { Box::from_raw(table) });
    }
}

#[no_mangle]
pub unsafe extern "C" fn mc_prime_table_len(table: *const McPrimeTable, out: *mut usize) -> McStatus {
    let t = deref!(table, "table");
    write_out!(out, t.0.len(), "out");
    McStatus::Ok
}

/// `pi(x)`: number of primes `<= x`.
#[no_mangle]
pub unsafe extern "C" fn mc_prime_table_count(
    table: *const McPrimeTable,
    x: u64,
    out: *mut u64,
) -> McStatus {
    let t = deref!(table, "table");
    match t.0.prime_count(x) {
        Ok(count) => {
            write_out!(out, count as u64, "out");
            McStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// The prime of 0-based rank `index`.
#[no_mangle]
pub unsafe extern "C" fn mc_prime_table_nth(
    table: *const McPrimeTable,
    index: usize,
    out: *mut u64,
) -> McStatus {
    let t = deref!(table, "table");
    match t.0.primes().get(index) {
        Some(&p) => {
            write_out!(out, p, "out");
            McStatus::Ok
        }
        None => {
            set_error(&format!("prime rank {index} beyond the table"));
            McStatus::OutOfRange
        }
    }
}

// --- factor sieves --------------------------------------------------------

pub struct McFactorSieve(FactorSieve);

#[no_mangle]
pub unsafe extern "C" fn mc_factor_sieve_new(limit: u64, out: *mut *mut McFactorSieve) -> McStatus {
    match FactorSieve::new(limit) {
        Ok(sieve) => {
            write_out!(out, Box::into_raw(Box::new(McFactorSieve(sieve))), "out");
            McStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `sieve` must come from `mc_factor_sieve_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mc_factor_sieve_free(sieve: *mut McFactorSieve) {
    if !sieve.is_null() {
        drop(unsafe { Box::from_raw(sieve) });
    }
}

/// Prime factorization of `n` with multiplicity, ascending, written into
/// `buf`. 64 slots always suffice. Returns `BufferTooSmall` with the
/// required length in `written` when `cap` is short.
///
/// # Safety
/// `buf` must point to at least `cap` writable u64 slots.
#[no_mangle]
pub unsafe extern "C" fn mc_factorize(
    sieve: *const McFactorSieve,
    n: u64,
    buf: *mut u64,
    cap: usize,
    written: *mut usize,
) -> McStatus {
    let s = deref!(sieve, "sieve");
    match s.0.factorize(n) {
        Ok(factors) => {
            write_out!(written, factors.len(), "written");
            if factors.len() > cap {
                set_error(&format!(
                    "buffer of {cap} too small for {} factors",
                    factors.len()
                ));
                return McStatus::BufferTooSmall;
            }
            if !factors.is_empty() {
                if buf.is_null() {
                    return null_fail("buf");
                }
                unsafe {
                    std::ptr::copy_nonoverlapping(factors.as_ptr(), buf, factors.len());
                }
            }
            McStatus::Ok
        }
        Err(e) => fail(e),
    }
}

// --- analytic constants ---------------------------------------------------

#[no_mangle]
pub unsafe extern "C" fn mc_gamma(t: f64, out: *mut f64) -> McStatus {
    match multcomp::analytic::gamma(t) {
        Ok(v) => {
            write_out!(out, v, "out");
            McStatus::Ok
        }
        Err(e) => fail(e),
    }
}

#[no_mangle]
pub unsafe extern "C" fn mc_raikov_constant(h: u32, out: *mut f64) -> McStatus {
    match multcomp::analytic::raikov_constant(h) {
        Ok(v) => {
            write_out!(out, v, "out");
            McStatus::Ok
        }
        Err(e) => fail(e),
    }
}

#[no_mangle]
pub unsafe extern "C" fn mc_upper_constant(h: u32, out: *mut f64) -> McStatus {
    match multcomp::analytic::upper_constant(h) {
        Ok(v) => {
            write_out!(out, v, "out");
            McStatus::Ok
        }
        Err(e) => fail(e),
    }
}

// --- integer sets ---------------------------------------------------------

pub struct McIntegerSet(IntegerSet);

/// Build a set from strictly increasing elements in `[1, limit]`.
///
/// # Safety
/// `elements` must point to `len` readable u64 values.
#[no_mangle]
pub unsafe extern "C" fn mc_integer_set_new(
    elements: *const u64,
    len: usize,
    limit: u64,
    out: *mut *mut McIntegerSet,
) -> McStatus {
    let slice = if len == 0 {
        &[][..]
    } else {
        if elements.is_null() {
            return null_fail("elements");
        }
        unsafe { std::slice::from_raw_parts(elements, len) }
    };
    match IntegerSet::new(slice.to_vec(), limit) {
        Ok(set) => {
            write_out!(out, Box::into_raw(Box::new(McIntegerSet(set))), "out");
            McStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// The full interval `[1, limit]`.
#[no_mangle]
pub unsafe extern "C" fn mc_integer_set_range(limit: u64, out: *mut *mut McIntegerSet) -> McStatus {
    write_out!(
        out,
        Box::into_raw(Box::new(McIntegerSet(IntegerSet::range(limit)))),
        "out"
    );
    McStatus::Ok
}

/// # Safety
/// `set` must come from an `mc_integer_set_*` constructor and not be
/// freed twice.
#[no_mangle]
pub unsafe extern "C" fn mc_integer_set_free(set: *mut McIntegerSet) {
    if !set.is_null() {
        drop(unsafe { Box::from_raw(set) });
    }
}

#[no_mangle]
pub unsafe extern "C" fn mc_integer_set_len(set: *const McIntegerSet, out: *mut usize) -> McStatus {
    let s = deref!(set, "set");
    write_out!(out, s.0.len(), "out");
    McStatus::Ok
}

/// Counting function `A(x)`.
#[no_mangle]
pub unsafe extern "C" fn mc_integer_set_counting(
    set: *const McIntegerSet,
    x: u64,
    out: *mut u64,
) -> McStatus {
    let s = deref!(set, "set");
    match s.0.counting(x) {
        Ok(v) => {
            write_out!(out, v as u64, "out");
            McStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// `A(x) (log x)^(1 - tau) / x`.
#[no_mangle]
pub unsafe extern "C" fn mc_integer_set_density_statistic(
    set: *const McIntegerSet,
    tau: f64,
    x: u64,
    out: *mut f64,
) -> McStatus {
    let s = deref!(set, "set");
    match s.0.density_statistic(tau, x) {
        Ok(v) => {
            write_out!(out, v, "out");
            McStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Truncated Dirichlet sum `sum_{a <= cutoff} a^-s`.
#[no_mangle]
pub unsafe extern "C" fn mc_dirichlet_partial(
    set: *const McIntegerSet,
    s: f64,
    cutoff: u64,
    out: *mut f64,
) -> McStatus {
    let set = deref!(set, "set");
    match multcomp::analytic::dirichlet_partial(&set.0, s, cutoff) {
        Ok(sample) => {
            write_out!(out, sample.value, "out");
            McStatus::Ok
        }
        Err(e) => fail(e),
    }
}

unsafe fn collect_sets<'a>(
    sets: *const *const McIntegerSet,
    h: usize,
) -> Option<Vec<&'a IntegerSet>> {
    if sets.is_null() || h == 0 {
        return None;
    }
    let ptrs = unsafe { std::slice::from_raw_parts(sets, h) };
    ptrs.iter()
        .map(|&p| unsafe { p.as_ref() }.map(|s| &s.0))
        .collect()
}

/// `S_{A_1,...,A_h}(n)` for `h` sets given as an array of handles.
///
/// # Safety
/// `sets` must point to `h` valid set handles.
#[no_mangle]
pub unsafe extern "C" fn mc_joint_repr_count(
    sets: *const *const McIntegerSet,
    h: usize,
    n: u64,
    sieve: *const McFactorSieve,
    out: *mut u64,
) -> McStatus {
    let s = deref!(sieve, "sieve");
    let Some(family) = (unsafe { collect_sets(sets, h) }) else {
        return null_fail("sets");
    };
    match joint_repr_count(&family, n, &s.0) {
        Ok(v) => {
            write_out!(out, v, "out");
            McStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// `S_{A,h}(n)`: the single-set representation count.
#[no_mangle]
pub unsafe extern "C" fn mc_repr_count(
    set: *const McIntegerSet,
    h: usize,
    n: u64,
    sieve: *const McFactorSieve,
    out: *mut u64,
) -> McStatus {
    let set = deref!(set, "set");
    let s = deref!(sieve, "sieve");
    match multcomp::repr::repr_count(&set.0, h, n, &s.0) {
        Ok(v) => {
            write_out!(out, v, "out");
            McStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// `sum_{n <= x} S(n)` over the family.
///
/// # Safety
/// `sets` must point to `h` valid set handles.
#[no_mangle]
pub unsafe extern "C" fn mc_summatory_repr(
    sets: *const *const McIntegerSet,
    h: usize,
    x: u64,
    out: *mut u64,
) -> McStatus {
    let Some(family) = (unsafe { collect_sets(sets, h) }) else {
        return null_fail("sets");
    };
    match summatory_repr(&family, x) {
        Ok(v) => {
            write_out!(out, v, "out");
            McStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Exact complement verification on `[1, x]`. On success `*found` tells
/// whether a counterexample exists and `*counterexample` holds the least
/// one.
///
/// # Safety
/// `sets` must point to `h` valid set handles.
#[no_mangle]
pub unsafe extern "C" fn mc_verify_complement(
    sets: *const *const McIntegerSet,
    h: usize,
    x: u64,
    sieve: *const McFactorSieve,
    found: *mut bool,
    counterexample: *mut u64,
) -> McStatus {
    let s = deref!(sieve, "sieve");
    let Some(family) = (unsafe { collect_sets(sets, h) }) else {
        return null_fail("sets");
    };
    match verify_complement(&family, x, &s.0) {
        Ok(Verification::Verified) => {
            write_out!(found, false, "found");
            write_out!(counterexample, 0, "counterexample");
            McStatus::Ok
        }
        Ok(Verification::FirstFailure(n)) => {
            write_out!(found, true, "found");
            write_out!(counterexample, n, "counterexample");
            McStatus::Ok
        }
        Err(e) => fail(e),
    }
}

// --- sign series ----------------------------------------------------------

/// Greedy sign assignment steering `sum f(k) q_k` to `target`; signs are
/// written as +1/-1 bytes. Dominance is verified against `tail_allowance`.
///
/// # Safety
/// `q` must point to `len` readable doubles and `signs` to `len` writable
/// bytes.
#[no_mangle]
pub unsafe extern "C" fn mc_sign_solve(
    q: *const f64,
    len: usize,
    target: f64,
    tail_allowance: f64,
    signs: *mut i8,
    achieved: *mut f64,
    residual: *mut f64,
) -> McStatus {
    if q.is_null() {
        return null_fail("q");
    }
    if signs.is_null() {
        return null_fail("signs");
    }
    let series = unsafe { std::slice::from_raw_parts(q, len) };
    match sign_solve(series, target, tail_allowance) {
        Ok(solution) => {
            for (i, sign) in solution.signs.iter().enumerate() {
                unsafe {
                    *signs.add(i) = match sign {
                        Sign::Plus => 1,
                        Sign::Minus => -1,
                    };
                }
            }
            write_out!(achieved, solution.achieved, "achieved");
            write_out!(residual, solution.residual, "residual");
            McStatus::Ok
        }
        Err(e) => fail(e),
    }
}

// --- partitions -----------------------------------------------------------

pub struct McPartition(PrimePartition);

/// Build a prime partition with density targets `tau` and Mertens targets
/// `a` (each of length `h`) up to `cutoff`.
///
/// # Safety
/// `tau` and `a` must point to `h` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn mc_partition_build(
    tau: *const f64,
    a: *const f64,
    h: usize,
    cutoff: u64,
    out: *mut *mut McPartition,
) -> McStatus {
    if tau.is_null() || a.is_null() {
        return null_fail("tau/a");
    }
    let tau = unsafe { std::slice::from_raw_parts(tau, h) }.to_vec();
    let a = unsafe { std::slice::from_raw_parts(a, h) }.to_vec();
    let spec = match PartitionSpec::new(tau, a) {
        Ok(spec) => spec,
        Err(e) => return fail(e),
    };
    let table = match sieve_primes(cutoff) {
        Ok(t) => Arc::new(t),
        Err(e) => return fail(e),
    };
    match build_partition(&spec, table, cutoff) {
        Ok(partition) => {
            write_out!(out, Box::into_raw(Box::new(McPartition(partition))), "out");
            McStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `partition` must come from `mc_partition_build` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mc_partition_free(partition: *mut McPartition) {
    if !partition.is_null() {
        drop(unsafe { Box::from_raw(partition) });
    }
}

#[no_mangle]
pub unsafe extern "C" fn mc_partition_part_count(
    partition: *const McPartition,
    out: *mut usize,
) -> McStatus {
    let p = deref!(partition, "partition");
    write_out!(out, p.0.parts().len(), "out");
    McStatus::Ok
}

/// 1-based index of the part containing the prime `p`.
#[no_mangle]
pub unsafe extern "C" fn mc_partition_part_of(
    partition: *const McPartition,
    prime: u64,
    out: *mut usize,
) -> McStatus {
    let p = deref!(partition, "partition");
    match p.0.parts().iter().position(|part| part.contains(prime)) {
        Some(i) => {
            write_out!(out, i + 1, "out");
            McStatus::Ok
        }
        None => {
            set_error(&format!("{prime} is not a prime below the cutoff"));
            McStatus::OutOfRange
        }
    }
}

/// Achieved statistics of part `index` (0-based) at the cutoff.
#[no_mangle]
pub unsafe extern "C" fn mc_partition_part_stats(
    partition: *const McPartition,
    index: usize,
    count: *mut u64,
    density: *mut f64,
    mertens: *mut f64,
) -> McStatus {
    let p = deref!(partition, "partition");
    match p.0.achieved().get(index) {
        Some(stats) => {
            write_out!(count, stats.count as u64, "count");
            write_out!(density, stats.density, "density");
            write_out!(mertens, stats.mertens, "mertens");
            McStatus::Ok
        }
        None => {
            set_error(&format!("part index {index} out of range"));
            McStatus::OutOfRange
        }
    }
}

/// Serialize the partition to `path` in the text artifact format.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mc_partition_write(
    partition: *const McPartition,
    path: *const c_char,
) -> McStatus {
    let p = deref!(partition, "partition");
    let Some(path) = (unsafe { to_path(path) }) else {
        return null_fail("path");
    };
    match std::fs::write(path, p.0.to_text()) {
        Ok(()) => McStatus::Ok,
        Err(e) => fail(Error::Io(e)),
    }
}

unsafe fn to_path<'a>(path: *const c_char) -> Option<&'a Path> {
    if path.is_null() {
        return None;
    }
    unsafe { CStr::from_ptr(path) }.to_str().ok().map(Path::new)
}

// --- families ---------------------------------------------------------------

pub struct McFamily(ComplementFamily);

/// Smooth-number family over a partition, exactly verified on `[1, limit]`.
#[no_mangle]
pub unsafe extern "C" fn mc_smooth_family_build(
    partition: *const McPartition,
    sieve: *const McFactorSieve,
    limit: u64,
    out: *mut *mut McFamily,
) -> McStatus {
    let p = deref!(partition, "partition");
    let s = deref!(sieve, "sieve");
    match build_smooth_family(&p.0, limit, &s.0) {
        Ok(built) => {
            write_out!(out, Box::into_raw(Box::new(McFamily(built.family))), "out");
            McStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Checkpointed family: `n_override = 0` uses `ceil(256/eps^2) + 1`;
/// `growth` is 0 for `x^3 + 1` and 1 for `x^3`.
#[no_mangle]
pub unsafe extern "C" fn mc_checkpoint_family_build(
    h: usize,
    epsilon: f64,
    steps: usize,
    n_override: u64,
    growth: i32,
    table: *const McPrimeTable,
    sieve: *const McFactorSieve,
    out: *mut *mut McFamily,
) -> McStatus {
    let t = deref!(table, "table");
    let s = deref!(sieve, "sieve");
    let growth = match growth {
        0 => GrowthPolicy::CubedPlusOne,
        1 => GrowthPolicy::Cubed,
        other => {
            set_error(&format!("unknown growth policy code {other}"));
            return McStatus::InvalidArgument;
        }
    };
    let config = CheckpointConfig {
        h,
        epsilon,
        steps,
        n_override: (n_override > 0).then_some(n_override),
        growth,
    };
    match build_checkpoint_family(&config, &t.0, &s.0) {
        Ok(built) => {
            write_out!(out, Box::into_raw(Box::new(McFamily(built.family))), "out");
            McStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `family` must come from a family constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mc_family_free(family: *mut McFamily) {
    if !family.is_null() {
        drop(unsafe { Box::from_raw(family) });
    }
}

#[no_mangle]
pub unsafe extern "C" fn mc_family_h(family: *const McFamily, out: *mut usize) -> McStatus {
    let f = deref!(family, "family");
    write_out!(out, f.0.h(), "out");
    McStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn mc_family_checkpoint_count(
    family: *const McFamily,
    out: *mut usize,
) -> McStatus {
    let f = deref!(family, "family");
    write_out!(out, f.0.checkpoints().len(), "out");
    McStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn mc_family_checkpoint(
    family: *const McFamily,
    index: usize,
    out: *mut u64,
) -> McStatus {
    let f = deref!(family, "family");
    match f.0.checkpoints().get(index) {
        Some(&c) => {
            write_out!(out, c, "out");
            McStatus::Ok
        }
        None => {
            set_error(&format!("checkpoint index {index} out of range"));
            McStatus::OutOfRange
        }
    }
}

#[no_mangle]
pub unsafe extern "C" fn mc_family_set_len(
    family: *const McFamily,
    index: usize,
    out: *mut usize,
) -> McStatus {
    let f = deref!(family, "family");
    match f.0.sets().get(index) {
        Some(set) => {
            write_out!(out, set.len(), "out");
            McStatus::Ok
        }
        None => {
            set_error(&format!("set index {index} out of range"));
            McStatus::OutOfRange
        }
    }
}

/// Copy the elements of set `index` into `buf`; `BufferTooSmall` reports
/// the required length in `written`.
///
/// # Safety
/// `buf` must point to at least `cap` writable u64 slots.
#[no_mangle]
pub unsafe extern "C" fn mc_family_set_elements(
    family: *const McFamily,
    index: usize,
    buf: *mut u64,
    cap: usize,
    written: *mut usize,
) -> McStatus {
    let f = deref!(family, "family");
    let Some(set) = f.0.sets().get(index) else {
        set_error(&format!("set index {index} out of range"));
        return McStatus::OutOfRange;
    };
    write_out!(written, set.len(), "written");
    if set.len() > cap {
        set_error(&format!("buffer of {cap} too small for {} elements", set.len()));
        return McStatus::BufferTooSmall;
    }
    if !set.is_empty() {
        if buf.is_null() {
            return null_fail("buf");
        }
        unsafe {
            std::ptr::copy_nonoverlapping(set.elements().as_ptr(), buf, set.len());
        }
    }
    McStatus::Ok
}

/// Exact verification of the family on `[1, x]`; same outputs as
/// `mc_verify_complement`.
#[no_mangle]
pub unsafe extern "C" fn mc_family_verify(
    family: *const McFamily,
    x: u64,
    sieve: *const McFactorSieve,
    found: *mut bool,
    counterexample: *mut u64,
) -> McStatus {
    let f = deref!(family, "family");
    let s = deref!(sieve, "sieve");
    match f.0.verify(x, &s.0) {
        Ok(Verification::Verified) => {
            write_out!(found, false, "found");
            write_out!(counterexample, 0, "counterexample");
            McStatus::Ok
        }
        Ok(Verification::FirstFailure(n)) => {
            write_out!(found, true, "found");
            write_out!(counterexample, n, "counterexample");
            McStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Serialize the family to `path` in the text artifact format.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mc_family_write(
    family: *const McFamily,
    path: *const c_char,
) -> McStatus {
    let f = deref!(family, "family");
    let Some(path) = (unsafe { to_path(path) }) else {
        return null_fail("path");
    };
    match write_family_file(&f.0, path) {
        Ok(()) => McStatus::Ok,
        Err(e) => fail(e),
    }
}
