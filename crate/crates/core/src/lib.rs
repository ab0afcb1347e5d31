//! Exponential sums over digit-restricted integers, Markov-matrix
//! certification of bases with the expected count of missing-digit primes,
//! and exact-measure experiments in metric Diophantine approximation.
//!
//! Module map:
//! - [`digits`]: digit systems, exact counts and the prime-count prediction
//! - [`primes`]: segmented sieve, progressions, Ramanujan sums, `S_P(θ)`
//! - [`fourier`]: the product formula for `S_A(θ)` and the bound hierarchy
//! - [`markov`]: transition matrices and Perron-root certificates
//! - [`arcs`]: Farey dissection, arc classification, the counting identity
//! - [`metric`]: approximation functions, exact interval measures
//! - [`gcd_graph`]: GCD graphs and compression bookkeeping

// NaN-rejecting guards are written as negated comparisons on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod arcs;
pub mod arith;
pub mod digits;
pub mod error;
pub mod farey;
pub mod fourier;
pub mod gcd_graph;
pub mod markov;
pub mod metric;
pub mod numeric;
pub mod primes;

pub use digits::{count_restricted, enumerate_restricted, CensusReport, DigitSystem};
pub use error::{Error, Result};
pub use primes::{sieve_primes, PrimeTable};
