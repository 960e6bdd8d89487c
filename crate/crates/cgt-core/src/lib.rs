//! Combinatorial group testing toolkit.
//!
//! Identifies up to d defective items among n by pooled tests. The crate
//! provides four pooling designs — the Chinese Remainder Sieve, a randomized
//! two-stage rake-and-winnow protocol, a ternary scheme for d=2, and a
//! binary-pair scheme for d=3 — together with their decoders, brute-force
//! matrix-property verifiers for desk-scale validation, closed-form test
//! counts of competing schemes, and a line-oriented matrix file format.
//!
//! Subset enumeration and trial simulation run data-parallel under the
//! `parallel` feature (default); disabling it falls back to the sequential
//! implementations with identical results.

pub mod bignum;
pub mod bounds;
pub mod crs;
pub mod error;
pub mod fileio;
pub mod matrix;
pub mod primes;
pub mod rw;
pub mod smalld;
pub mod verify;

pub use error::{Error, Result};
pub use matrix::{
    decode_disjunct, disjunct_survivors, run_tests, DecodeResult, DefectiveSet, Method,
    MethodParams, OutcomeVector, TestMatrix,
};
