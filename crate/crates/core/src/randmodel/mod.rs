//! Kernel-rank laws for random matrices over GF(2) and the rank models
//! composed from them.
//!
//! Three base laws are provided exactly: the kernel dimension of a uniform
//! rectangular matrix, of a uniform alternating matrix, and of the
//! alternating pairing pulled back through a uniform homomorphism into a
//! fixed symplectic space. On top of them sit the category moment
//! identities and the composed joint rank models whose tails the sweeps
//! are compared against.

mod categories;
mod matrix_laws;
mod models;

pub use categories::{
    count_inj_c, count_inj_d, inj_count, measure_mu_iv, moment_mu_iv, moment_mu_v, MeasureC, ObjC,
    ObjD,
};
pub use matrix_laws::{
    enumerate_p_alt, enumerate_p_mat, enumerate_p_v, p_alt_exact, p_alt_exact_f64, p_alt_log2,
    p_mat_exact, p_mat_exact_f64, p_mat_exact_log2, p_mat_limit, p_mat_limit_log2, p_v_exact,
    p_v_exact_f64, p_v_log2, sample_p_v, sample_p_v_seeded,
};
pub use models::{
    case_iv_r2_model, case_iv_r2_model_capped, case_v_r2_model, case_v_r2_model_capped,
    tail_exponent, JointRankModel,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A probability distribution over nonnegative ranks with an explicit bound
/// on the mass beyond the listed support.
///
/// Probabilities are carried in log2 form so that tails far below the f64
/// linear range stay usable; `prob` converts back (underflowing to 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankDistribution {
    log2_probs: BTreeMap<u32, f64>,
    tail_bound: f64,
    /// Per-value absolute error bound (0 for exact entries).
    value_error: f64,
}

impl RankDistribution {
    pub fn from_log2_probs(log2_probs: BTreeMap<u32, f64>, tail_bound: f64, value_error: f64) -> Self {
        RankDistribution {
            log2_probs,
            tail_bound,
            value_error,
        }
    }

    pub fn from_probs(probs: BTreeMap<u32, f64>, tail_bound: f64, value_error: f64) -> Self {
        RankDistribution {
            log2_probs: probs
                .into_iter()
                .filter(|(_, p)| *p > 0.0)
                .map(|(r, p)| (r, p.log2()))
                .collect(),
            tail_bound,
            value_error,
        }
    }

    /// Empirical distribution from counts.
    pub fn from_counts(counts: &BTreeMap<u32, u64>) -> Result<Self> {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(Error::EmptyDistribution);
        }
        Ok(RankDistribution {
            log2_probs: counts
                .iter()
                .filter(|(_, &c)| c > 0)
                .map(|(&r, &c)| (r, (c as f64 / total as f64).log2()))
                .collect(),
            tail_bound: 0.0,
            value_error: 0.0,
        })
    }

    pub fn prob(&self, r: u32) -> f64 {
        self.log2_probs.get(&r).map_or(0.0, |l| l.exp2())
    }

    pub fn log2_prob(&self, r: u32) -> Option<f64> {
        self.log2_probs.get(&r).copied()
    }

    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.log2_probs.keys().copied()
    }

    pub fn max_rank(&self) -> Option<u32> {
        self.log2_probs.keys().next_back().copied()
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn total_mass(&self) -> f64 {
        self.log2_probs.values().map(|l| l.exp2()).sum()
    }

    /// Total-variation distance over the union of supports, charging this
    /// distribution's tail bound as unmatched mass.
    pub fn tv_distance(&self, other: &RankDistribution) -> f64 {
        let keys: std::collections::BTreeSet<u32> = self
            .support()
            .chain(other.support())
            .collect();
        let sum: f64 = keys
            .iter()
            .map(|&r| (self.prob(r) - other.prob(r)).abs())
            .sum();
        0.5 * (sum + self.tail_bound + other.tail_bound)
    }

    /// CSV table: `rank,probability,error_bound`, one row per supported
    /// rank, with a final `tail` row carrying the unlisted mass bound.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,probability,error_bound\n");
        for (&r, &l) in &self.log2_probs {
            out.push_str(&format!("{},{:e},{:e}\n", r, l.exp2(), self.value_error));
        }
        out.push_str(&format!("tail,{:e},\n", self.tail_bound));
        out
    }
}
