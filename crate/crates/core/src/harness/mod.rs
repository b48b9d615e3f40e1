//! Twist-class enumeration, sweeps, empirical distributions, and model
//! comparison.
//!
//! Twists are partitioned across workers; each worker computes independent
//! descents and the shards merge into d-sorted order, so results are
//! identical for every thread count. Sweeps carry no randomness at all.

mod sieve;
mod stats;
mod sweep;

pub use sieve::{enumerate_twist_class, squarefree_integers, TwistClassSpec};
pub use stats::{compare, estimate_moments, CompareReport, MomentEstimate};
pub use sweep::{
    sweep, sweep_records, twist_record, write_report, SweepConfig, SweepReport, SweepResult,
    TwistRecord, CSV_HEADER,
};
