//! Composed joint rank models and tail-exponent fitting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::matrix_laws::{p_alt_log2, p_mat_limit_log2, p_v_log2};
use super::RankDistribution;

/// Joint law of an isogeny-descent rank and the full 2-descent rank,
/// truncated at `max_rank`, in log2 form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointRankModel {
    /// log2 P(r_phi = r, r2 = s)
    pub log2_probs: BTreeMap<(u32, u32), f64>,
    pub max_rank: u32,
}

impl JointRankModel {
    /// Marginal law of the first coordinate.
    pub fn marginal_phi(&self) -> RankDistribution {
        self.marginal(|&(r, _)| r)
    }

    /// Marginal law of the second coordinate.
    pub fn marginal_r2(&self) -> RankDistribution {
        self.marginal(|&(_, s)| s)
    }

    fn marginal(&self, key: impl Fn(&(u32, u32)) -> u32) -> RankDistribution {
        let mut groups: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
        for (k, &l) in &self.log2_probs {
            groups.entry(key(k)).or_default().push(l);
        }
        let log2_probs = groups
            .into_iter()
            .map(|(r, ls)| {
                let peak = ls.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = ls.iter().map(|l| (l - peak).exp2()).sum();
                (r, peak + sum.log2())
            })
            .collect();
        let mass: f64 = self.log2_probs.values().map(|l| l.exp2()).sum();
        RankDistribution::from_log2_probs(log2_probs, (1.0 - mass).abs(), 1e-10)
    }

    /// Conditional law of `r2 - r_phi` given the first coordinate.
    pub fn conditional_given_phi(&self, r_phi: u32) -> Option<RankDistribution> {
        let rows: Vec<((u32, u32), f64)> = self
            .log2_probs
            .iter()
            .filter(|((r, _), _)| *r == r_phi)
            .map(|(k, &l)| (*k, l))
            .collect();
        if rows.is_empty() {
            return None;
        }
        let peak = rows
            .iter()
            .map(|(_, l)| *l)
            .fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = rows.iter().map(|(_, l)| (l - peak).exp2()).sum();
        let log2_total = peak + total.log2();
        Some(RankDistribution::from_log2_probs(
            rows.into_iter()
                .map(|((_, s), l)| (s - r_phi, l - log2_total))
                .collect(),
            0.0,
            1e-10,
        ))
    }
}

/// Joint model for a family with a unique balanced isogeny: the descent
/// rank follows the limiting rectangular law with offset `u`, and the full
/// rank adds the kernel rank of a uniform alternating matrix of size
/// `r_phi - u`.
pub fn case_iv_r2_model(u: i64) -> JointRankModel {
    case_iv_r2_model_capped(u, 40)
}

pub fn case_iv_r2_model_capped(u: i64, max_rank: u32) -> JointRankModel {
    let mut log2_probs = BTreeMap::new();
    for r_phi in 0..=max_rank {
        let Some(lpm) = p_mat_limit_log2(r_phi, u) else {
            continue;
        };
        let n_alt = r_phi as i64 - u;
        debug_assert!(n_alt >= 0);
        for j in 0..=(n_alt as u32) {
            let Some(lpa) = p_alt_log2(j, n_alt as u32) else {
                continue;
            };
            let r2 = r_phi + j;
            if r2 > max_rank {
                continue;
            }
            log2_probs.insert((r_phi, r2), lpm + lpa);
        }
    }
    JointRankModel {
        log2_probs,
        max_rank,
    }
}

/// Joint model for a family with two balanced isogenies: the second factor
/// is the kernel rank of the alternating pairing pulled back through a
/// uniform homomorphism into a symplectic space of dimension `u0`.
pub fn case_v_r2_model(u1: i64, u0: u32) -> Result<JointRankModel> {
    case_v_r2_model_capped(u1, u0, 40)
}

pub fn case_v_r2_model_capped(u1: i64, u0: u32, max_rank: u32) -> Result<JointRankModel> {
    if u0 % 2 == 1 {
        return Err(Error::Precondition(format!("u0 = {u0} must be even")));
    }
    let mut log2_probs = BTreeMap::new();
    for r_phi in 0..=max_rank {
        let Some(lpm) = p_mat_limit_log2(r_phi, u1) else {
            continue;
        };
        let m = r_phi as i64 - u1;
        debug_assert!(m >= 0);
        for j in 0..=(m as u32) {
            let Some(lpv) = p_v_log2(j, m as u32, u0) else {
                continue;
            };
            let r2 = r_phi + j;
            if r2 > max_rank {
                continue;
            }
            log2_probs.insert((r_phi, r2), lpm + lpv);
        }
    }
    Ok(JointRankModel {
        log2_probs,
        max_rank,
    })
}

/// Least-squares slope of `-log2 P(rank = r)` against `r^2` over the
/// supported ranks in `[r_lo, r_hi]`.
pub fn tail_exponent(dist: &RankDistribution, r_lo: u32, r_hi: u32) -> Result<f64> {
    if r_hi <= r_lo || r_lo < 5 {
        return Err(Error::Precondition(format!(
            "need r_hi > r_lo >= 5, got [{r_lo}, {r_hi}]"
        )));
    }
    let pts: Vec<(f64, f64)> = (r_lo..=r_hi)
        .filter_map(|r| dist.log2_prob(r).map(|l| ((r as f64).powi(2), -l)))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientTail {
            need: 3,
            found: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|(x, _)| x).sum();
    let sy: f64 = pts.iter().map(|(_, y)| y).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::ToPrimitive;

    #[test]
    fn case_iv_support_and_parity() {
        for u in [-1i64, 0, 1] {
            let model = case_iv_r2_model(u);
            let mass: f64 = model.log2_probs.values().map(|l| l.exp2()).sum();
            assert!(mass > 0.999999, "u={u}: mass {mass}");
            for (&(r_phi, r2), _) in &model.log2_probs {
                assert!(r2 >= r_phi);
                assert!((r_phi as i64) >= u.max(0));
                // alternating kernel parity
                assert_eq!(
                    (r2 - r_phi) % 2,
                    ((r_phi as i64 - u) % 2) as u32,
                    "u={u} r_phi={r_phi} r2={r2}"
                );
            }
        }
    }

    #[test]
    fn case_iv_marginal_matches_rectangular_law() {
        let model = case_iv_r2_model(1);
        let marg = model.marginal_phi();
        for r in 1..=10u32 {
            let expected = super::super::matrix_laws::p_mat_limit(r, 1, 1e-9);
            assert!((marg.prob(r) - expected).abs() < 1e-9, "r={r}");
        }
    }

    #[test]
    fn case_iv_conditional_matches_alternating_law() {
        let model = case_iv_r2_model(0);
        let cond = model.conditional_given_phi(3).unwrap();
        for j in 0..=3u32 {
            let expected = super::super::matrix_laws::p_alt_exact(j, 3)
                .to_f64()
                .unwrap();
            assert!((cond.prob(j) - expected).abs() < 1e-9, "j={j}");
        }
    }

    #[test]
    fn case_v_zero_target_collapses() {
        // u0 = 0 forces r2 - r_phi = r_phi - u1 deterministically.
        let model = case_v_r2_model(0, 0).unwrap();
        for (&(r_phi, r2), _) in &model.log2_probs {
            assert_eq!(r2, 2 * r_phi);
        }
        assert!(case_v_r2_model(0, 1).is_err());
    }

    #[test]
    fn case_v_support_bound() {
        // r2 - r_phi >= r_phi - u1 - u0 because the pullback kernel
        // contains the kernel of the homomorphism.
        let model = case_v_r2_model(1, 2).unwrap();
        let mass: f64 = model.log2_probs.values().map(|l| l.exp2()).sum();
        assert!(mass > 0.999999);
        for (&(r_phi, r2), _) in &model.log2_probs {
            assert!(r2 as i64 - r_phi as i64 >= r_phi as i64 - 1 - 2);
            assert!(r2 >= r_phi);
        }
        let marg = model.marginal_phi();
        for r in 1..=10u32 {
            let expected = super::super::matrix_laws::p_mat_limit(r, 1, 1e-9);
            assert!((marg.prob(r) - expected).abs() < 1e-9, "r={r}");
        }
    }

    #[test]
    fn tail_exponent_requires_data() {
        let d = RankDistribution::from_probs(
            [(10u32, 0.5), (11, 0.5)].into_iter().collect(),
            0.0,
            0.0,
        );
        assert!(tail_exponent(&d, 10, 30).is_err());
        assert!(tail_exponent(&d, 3, 30).is_err());
    }

    #[test]
    fn tail_exponent_exact_quadratic() {
        // -log2 P = 0.4 r^2 + r exactly: slope fit recovers ~0.4.
        let log2_probs: BTreeMap<u32, f64> = (5u32..=30)
            .map(|r| (r, -(0.4 * (r as f64).powi(2) + r as f64)))
            .collect();
        let d = RankDistribution::from_log2_probs(log2_probs, 0.0, 0.0);
        let slope = tail_exponent(&d, 10, 30).unwrap();
        assert!((slope - 0.4).abs() < 0.03, "slope {slope}");
    }
}
