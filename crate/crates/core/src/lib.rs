//! Descent by 2-isogeny on quadratic twist families of rational elliptic
//! curves.
//!
//! The crate computes isogeny Selmer groups and complete 2-Selmer groups by
//! exhausting local conditions at a finite set of places, tracks Tamagawa
//! ratios and localization images across twist families, and compares the
//! resulting empirical rank statistics against exact kernel-rank laws for
//! random matrices over GF(2).
//!
//! Module layout:
//!
//! - [`arith`] — integer factorization, square classes, Hilbert symbols, and
//!   p-adic solvability of descent torsors.
//! - [`gf2`] — dense linear algebra over the two-element field.
//! - [`randmodel`] — exact and limiting kernel-rank distributions, category
//!   moment identities, and composed rank models with their tail exponents.
//! - [`galmod`] — brute-force verification of matrix-ring module lemmas.
//! - [`curves`] — curve models, twists, 2-isogeny enumeration, balanced
//!   isogeny detection, and the five-way case classification.
//! - [`descent`] — Selmer group computation and per-twist invariants.
//! - [`harness`] — twist-class enumeration, parallel sweeps, empirical
//!   distributions, and model comparison.

pub mod arith;
pub mod curves;
pub mod descent;
pub mod galmod;
pub mod gf2;
pub mod harness;
pub mod randmodel;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("zero is not a valid input")]
    ZeroInput,
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),
    #[error("repeated roots: {0:?}")]
    RepeatedRoots((i64, i64, i64)),
    #[error("dimension cap exceeded: {got} > {cap}")]
    DimensionCap { got: usize, cap: usize },
    #[error("curve does not have full rational 2-torsion")]
    NotFullTwoTorsion,
    #[error("curve is not in the requested case: {0}")]
    WrongCase(String),
    #[error("insufficient tail data: need at least {need} supported ranks, found {found}")]
    InsufficientTail { need: usize, found: usize },
    #[error("empty empirical distribution")]
    EmptyDistribution,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
