//! Integer and local-field utilities.
//!
//! Everything here is exact: factorization over the integers, square classes
//! of `Q^x / (Q^x)^2` and of the local fields `R`, `Q_2`, `Q_p`, Legendre and
//! Hilbert symbols, and decision procedures for p-adic solvability of the
//! quartic and quadric-pair torsors that drive descent.
//!
//! All functions are pure; values are immutable and freely shareable across
//! threads.

mod factor;
mod local;
mod solve;
mod square_class;
mod symbols;

pub use factor::{factor, is_prime, Factored};
pub use local::{LocalSquareClass, Place};
pub use solve::{
    biquartic_solvable, quadric_pair_locally_solvable, quartic_locally_solvable,
    simultaneous_squares_solvable,
};
pub use square_class::{squarefree_kernel, SquareClass};
pub use symbols::{hilbert_symbol, is_local_square, legendre};
