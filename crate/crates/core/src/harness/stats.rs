//! Distribution comparison and the tuple-count moment estimator.

use serde::{Deserialize, Serialize};

use crate::arith::{squarefree_kernel, SquareClass};
use crate::curves::{classify_case, CaseLabel, CurveModel};
use crate::gf2::Subspace;
use crate::randmodel::RankDistribution;
use crate::{Error, Result};

use super::sweep::SweepResult;

/// Comparison of an empirical distribution against a model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareReport {
    pub tv_distance: f64,
    pub chi_square: f64,
    /// (rank, empirical, model) rows over the union support.
    pub per_rank: Vec<(u32, f64, f64)>,
}

/// Total-variation distance and per-rank deltas. The empirical side must
/// be nonempty.
pub fn compare(emp: &RankDistribution, model: &RankDistribution) -> Result<CompareReport> {
    if emp.support().next().is_none() {
        return Err(Error::EmptyDistribution);
    }
    let ranks: std::collections::BTreeSet<u32> = emp.support().chain(model.support()).collect();
    let per_rank: Vec<(u32, f64, f64)> = ranks
        .iter()
        .map(|&r| (r, emp.prob(r), model.prob(r)))
        .collect();
    let chi_square = per_rank
        .iter()
        .filter(|(_, _, m)| *m > 0.0)
        .map(|(_, e, m)| (e - m) * (e - m) / m)
        .sum();
    Ok(CompareReport {
        tv_distance: emp.tv_distance(model),
        chi_square,
        per_rank,
    })
}

/// Average tuple count against its predicted limit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub a: u32,
    pub b: u32,
    /// Mean of the proxy tuple count over the non-flagged twists. The
    /// proxy replaces independence in the direct limit of Selmer groups by
    /// independence in the 2-Selmer group modulo the torsion image, and is
    /// labeled as such.
    pub estimate: f64,
    /// `#torsion^b * 2^(a + a u + a b + b(b+1)/2)`.
    pub target: f64,
    pub twists_used: u64,
    pub proxy: &'static str,
}

/// Estimates the average tuple-count moment over a sweep that carried
/// Selmer bases. The curve must be in the single-balanced case with full
/// 2-torsion, matching the moment identity being estimated.
pub fn estimate_moments(
    e: &CurveModel,
    result: &SweepResult,
    a: u32,
    b: u32,
) -> Result<MomentEstimate> {
    if a > 2 || b > 2 {
        return Err(Error::Precondition("a, b capped at 2".into()));
    }
    let CaseLabel::IV { balanced } = classify_case(e)? else {
        return Err(Error::WrongCase("single balanced isogeny required".into()));
    };
    if !e.has_full_two_torsion() {
        return Err(Error::NotFullTwoTorsion);
    }
    let mut total = 0f64;
    let mut used = 0u64;
    let mut u_class: Option<i64> = None;
    for rec in result.records.iter().filter(|r| !r.is_flagged()) {
        let (Some(sel_dual), Some(sel2)) = (&rec.sel_phi1_dual_basis, &rec.sel2_basis) else {
            return Err(Error::Precondition(
                "sweep did not carry Selmer bases (set with_bases)".into(),
            ));
        };
        u_class = u_class.or(rec.u1);
        total += tuple_count(e, &balanced, rec.d, sel_dual, sel2, a, b)? as f64;
        used += 1;
    }
    if used == 0 {
        return Err(Error::EmptyDistribution);
    }
    let u = u_class.unwrap_or(0);
    let torsion = 4f64; // full rational 2-torsion
    let target = torsion.powi(b as i32)
        * ((a as f64) + (a as i64 * u) as f64 + (a * b) as f64 + (b * (b + 1)) as f64 / 2.0).exp2();
    Ok(MomentEstimate {
        a,
        b,
        estimate: total / used as f64,
        target,
        twists_used: used,
        proxy: "independence taken in Sel^2 modulo the torsion image",
    })
}

/// Counts the proxy tuples for one twist.
///
/// The first block ranges over the dual-edge Selmer group with images
/// independent in Sel^2 modulo the torsion image; the second over Sel^2
/// with edge-projections independent modulo the torsion classes of the
/// edge group. Both counts are closed-form once the relevant quotient
/// ranks are known.
fn tuple_count(
    e: &CurveModel,
    edge: &crate::curves::TwoIsogeny,
    d: i64,
    sel_dual_basis: &[SquareClass],
    sel2_basis: &[Vec<SquareClass>],
    a: u32,
    b: u32,
) -> Result<u128> {
    let places = crate::descent::support_places(e, d)?;
    let gens = generators(&places);
    let w = gens.len();

    // Torsion image inside Sel^2.
    let (r, s) = e.split_roots().ok_or(Error::NotFullTwoTorsion)?;
    let roots = (
        0i64,
        r.checked_mul(d).ok_or(Error::Overflow("moment"))?,
        s.checked_mul(d).ok_or(Error::Overflow("moment"))?,
    );
    let torsion_pairs = crate::descent::torsion_images(roots)?;
    let torsion_vecs: Vec<Vec<bool>> = torsion_pairs
        .iter()
        .map(|p| pair_coords(&gens, p))
        .collect::<Result<_>>()?;
    let t2 = Subspace::from_vectors(2 * w, &torsion_vecs);

    // Block one: dual-edge classes c embed into Sel^2 as the pair (1, c).
    let g_dim = sel_dual_basis.len();
    let embedded: Vec<Vec<bool>> = sel_dual_basis
        .iter()
        .map(|c| pair_coords(&gens, &[SquareClass::one(), c.clone()]))
        .collect::<Result<_>>()?;
    let g_bar = {
        let mut all = embedded.clone();
        all.extend(t2.basis_vectors());
        Subspace::from_vectors(2 * w, &all).dim() - t2.dim()
    };
    let count_a = indep_tuples(a, g_bar as u32, (g_dim - g_bar) as u32);

    // Block two: Sel^2 pairs project to the edge group on the first
    // coordinate; quotient by the edge's own torsion x-classes.
    let src = edge.source.twist(d)?;
    let (rr, ss) = src
        .split_roots()
        .ok_or_else(|| Error::Precondition("edge source lost full torsion".into()))?;
    let edge_torsion: Vec<Vec<bool>> = [rr, ss]
        .into_iter()
        .filter(|&x| x != 0)
        .map(|x| class_coords(&gens, &squarefree_kernel(x)?))
        .collect::<Result<_>>()?;
    let t_phi = Subspace::from_vectors(w, &edge_torsion);
    let s_dim = sel2_basis.len();
    let projections: Vec<Vec<bool>> = sel2_basis
        .iter()
        .map(|pair| class_coords(&gens, &pair[0]))
        .collect::<Result<_>>()?;
    let h_bar = {
        let mut all = projections.clone();
        all.extend(t_phi.basis_vectors());
        Subspace::from_vectors(w, &all).dim() - t_phi.dim()
    };
    let count_b = indep_tuples(b, h_bar as u32, (s_dim - h_bar) as u32);
    Ok(count_a * count_b)
}

/// Number of k-tuples from a group of dimension `quot + ker` whose images
/// in the dimension-`quot` quotient are linearly independent.
fn indep_tuples(k: u32, quot: u32, ker: u32) -> u128 {
    let mut acc = 1u128;
    for i in 0..k {
        if i >= quot {
            return 0;
        }
        acc *= (1u128 << quot) - (1u128 << i);
    }
    acc << (ker as u64 * k as u64)
}

fn generators(places: &[crate::arith::Place]) -> Vec<SquareClass> {
    let mut gens = vec![
        SquareClass::minus_one(),
        SquareClass::from_parts(false, [2]),
    ];
    for p in places {
        if let crate::arith::Place::Odd(q) = p {
            gens.push(SquareClass::from_parts(false, [*q]));
        }
    }
    gens
}

fn class_coords(gens: &[SquareClass], c: &SquareClass) -> Result<Vec<bool>> {
    let mut coords = vec![false; gens.len()];
    coords[0] = c.is_negative();
    for p in c.primes() {
        let idx = gens
            .iter()
            .position(|g| !g.is_negative() && g.primes().eq([p]))
            .ok_or_else(|| Error::Precondition(format!("class leaves the support: prime {p}")))?;
        coords[idx] = true;
    }
    Ok(coords)
}

fn pair_coords(gens: &[SquareClass], pair: &[SquareClass]) -> Result<Vec<bool>> {
    let mut v = class_coords(gens, &pair[0])?;
    v.extend(class_coords(gens, &pair[1])?);
    Ok(v)
}
