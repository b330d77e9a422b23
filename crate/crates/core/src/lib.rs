//! Multiplicative bases and complements of order `h` for the positive
//! integers.
//!
//! A set `A` is a multiplicative basis of order `h` when every positive
//! integer is a product of `h` elements of `A`; an `h`-tuple of sets
//! `(A_1, ..., A_h)` is a multiplicative complement when every positive
//! integer factors as `a_1 * ... * a_h` with `a_i` in `A_i`. This crate
//! builds such families constructively, verifies them exactly by brute
//! force over a finite range, and measures their densities against the
//! sharp analytic constants.
//!
//! Module map:
//! - [`primes`] — sieving, factorization, prime subsets, Mertens products;
//! - [`repr`] — representation counting and exact verification;
//! - [`analytic`] — gamma, the sharp constants, truncated Dirichlet sums;
//! - [`partition`] — prime partitions with prescribed densities and
//!   Mertens targets (greedy selection, block pairs, sign correction);
//! - [`complement`] — smooth-number families over a partition and the
//!   checkpointed recursive construction;
//! - [`cli`] — the `multcomp` command-line front end.

// Domain guards are written as `!(x > 0.0)` so NaN parameters are
// rejected along with out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
mod bits;
pub mod cli;
pub mod complement;
pub mod error;
pub mod partition;
pub mod primes;
pub mod repr;

pub use error::{Error, Result};

/// Tool version stamped into CSV headers and serialized artifacts.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
