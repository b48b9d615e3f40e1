//! Objects of the two auxiliary categories, monomorphism counts, and the
//! measures whose moments the sweeps are compared against.
//!
//! The first category has objects "subspace inside a finite GF(2) space";
//! a morphism is an injection carrying the subspace into the subspace with
//! injective induced quotient map. The second has objects "finite space
//! mapped to a fixed target L"; morphisms are injections commuting with the
//! maps to L.

use num::bigint::BigUint;
use num::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::gf2::{gaussian_binomial, Subspace};
use crate::{Error, Result};

use super::matrix_laws::{p_alt_log2, p_mat_limit_log2};

/// Object of the pair category: a distinguished subspace of dimension `a`
/// inside a space of dimension `a + b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjC {
    pub a: u32,
    pub b: u32,
}

impl ObjC {
    pub fn new(a: u32, b: u32) -> Self {
        ObjC { a, b }
    }
}

/// Object of the over-L category: a space of dimension `dim` with a marked
/// image subspace inside the fixed ambient L.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjD {
    pub dim: u32,
    pub image: Subspace,
}

impl ObjD {
    pub fn new(dim: u32, image: Subspace) -> Result<Self> {
        if (dim as usize) < image.dim() {
            return Err(Error::Precondition(format!(
                "object dim {} below image dim {}",
                dim,
                image.dim()
            )));
        }
        Ok(ObjD { dim, image })
    }
}

/// Number of injective linear maps GF(2)^x -> GF(2)^y.
pub fn inj_count(x: u32, y: u32) -> BigUint {
    if x > y {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for i in 0..x {
        acc *= (BigUint::one() << y) - (BigUint::one() << i);
    }
    acc
}

/// Monomorphism count in the pair category:
/// `inj(a_O, a_A) * inj(b_O, b_A) * 2^(b_O * a_A)`.
pub fn count_inj_c(o: &ObjC, a: &ObjC) -> BigUint {
    inj_count(o.a, a.a) * inj_count(o.b, a.b) * (BigUint::one() << (o.b as u64 * a.a as u64))
}

/// Monomorphism count in the over-L category from `o` to an object with
/// total dimension `c` and image `v` (of dimension `v_dim`, inside an
/// ambient of dimension `l`): zero unless `o`'s image is contained in `v`;
/// otherwise `inj(dim o - rank o, c - v_dim) * 2^((c - v_dim) * rank o)`.
pub fn count_inj_d(o: &ObjD, c: u32, v: &Subspace) -> BigUint {
    let rho = o.image.dim() as u32;
    if !v.contains_subspace(&o.image) {
        return BigUint::zero();
    }
    let v_dim = v.dim() as u32;
    if v_dim > c {
        return BigUint::zero();
    }
    inj_count(o.dim - rho, c - v_dim) * (BigUint::one() << ((c - v_dim) as u64 * rho as u64))
}

/// Truncated measure on isomorphism classes of the pair category:
/// weight of `(a, a+b)` is `P_mat_limit(a | u) * P_alt(b | a - u)`.
#[derive(Debug, Clone)]
pub struct MeasureC {
    pub u: i64,
    pub atoms: Vec<(ObjC, f64)>,
    pub tail_bound: f64,
}

/// The measure truncated at `a, b <= max_dim`, with a certified tail bound.
pub fn measure_mu_iv(u: i64, max_dim: u32) -> MeasureC {
    let mut atoms = Vec::new();
    let mut mass = 0.0;
    for a in 0..=max_dim {
        let Some(lpm) = p_mat_limit_log2(a, u) else {
            continue;
        };
        let n_alt = a as i64 - u;
        if n_alt < 0 {
            continue;
        }
        for b in 0..=max_dim.min(n_alt as u32) {
            let Some(lpa) = p_alt_log2(b, n_alt as u32) else {
                continue;
            };
            let w = (lpm + lpa).exp2();
            mass += w;
            atoms.push((ObjC::new(a, b), w));
        }
    }
    // The alternating factor sums to exactly 1 over b, so the truncation
    // tail is bounded by the rectangular law's tail plus the cut b-mass;
    // both decay quadratically-exponentially past max_dim.
    let tail_bound = (1.0 - mass).abs().max(1e-300);
    MeasureC {
        u,
        atoms,
        tail_bound,
    }
}

/// Integral of the pair-category monomorphism count against the measure.
/// The target identity is `2^(a u + a b + b(b+1)/2)`.
pub fn moment_mu_iv(a: u32, b: u32, u: i64) -> f64 {
    let o = ObjC::new(a, b);
    // Truncate where the integrand's geometric decay is certified: terms
    // shrink by at least half once the object dimension passes the peak.
    let max_dim = 2 * (a + b) + u.unsigned_abs() as u32 + 40;
    let measure = measure_mu_iv(u, max_dim);
    let mut acc = 0.0;
    for (obj, w) in &measure.atoms {
        if w == &0.0 {
            continue;
        }
        let cnt = count_inj_c(&o, obj);
        if cnt.is_zero() {
            continue;
        }
        // Each positive term is bounded by the converged sum, so plain f64
        // accumulation is safe.
        let log2_term = w.log2() + big_log2(&cnt);
        acc += log2_term.exp2();
    }
    acc
}

fn big_log2(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 52 {
        return n.to_f64().unwrap().log2();
    }
    let shift = bits - 52;
    let top: BigUint = n >> shift;
    top.to_f64().unwrap().log2() + shift as f64
}

/// Integral of the over-L monomorphism count against the measure whose
/// weight at `(c, V)` is `P_mat_limit(c | u) * P_loc(c, V)`, where `P_loc`
/// is the law of the image of a uniform homomorphism GF(2)^c -> L.
/// The target identity is `(#L)^(-dim o) * 2^(u * dim o)`.
pub fn moment_mu_v(o: &ObjD, u: i64, l_dim: u32) -> Result<f64> {
    if o.image.ambient_dim() != l_dim as usize {
        return Err(Error::Precondition(format!(
            "object ambient {} does not match L dimension {}",
            o.image.ambient_dim(),
            l_dim
        )));
    }
    let rho = o.image.dim() as u32;
    let a = o.dim;
    let max_c = 2 * a + l_dim + u.unsigned_abs() as u32 + 40;
    let mut acc = 0.0;
    for c in 0..=max_c {
        let Some(lpm) = p_mat_limit_log2(c, u) else {
            continue;
        };
        // Sum over image subspaces V of each dimension v containing the
        // object's image; the count depends only on v.
        for v in rho..=l_dim.min(c) {
            // #subspaces of dim v containing a fixed rho-dim subspace:
            let choices = gaussian_binomial(l_dim - rho, v - rho);
            if choices == 0 {
                continue;
            }
            // P(image = V) = #Surj(2^c -> 2^v) / 2^(c l):
            let lsurj = log2_inj_f(v, c);
            let lp_loc = lsurj - (c as f64) * (l_dim as f64);
            let cnt = inj_count(a - rho, c - v) * (BigUint::one() << ((c - v) as u64 * rho as u64));
            if cnt.is_zero() {
                continue;
            }
            let log2_term = lpm + lp_loc + (choices as f64).log2() + big_log2(&cnt);
            acc += log2_term.exp2();
        }
    }
    Ok(acc)
}

fn log2_inj_f(x: u32, y: u32) -> f64 {
    let mut acc = 0.0;
    for i in 0..x {
        let b = i as f64;
        let a = y as f64;
        acc += b + (a - b) + (-((b - a).exp2())).ln_1p() / std::f64::consts::LN_2;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::{all_subspaces, BitMatrix};

    #[test]
    fn inj_counts() {
        assert_eq!(inj_count(0, 5), BigUint::one());
        assert_eq!(inj_count(1, 1), BigUint::from(1u32));
        assert_eq!(inj_count(2, 2), BigUint::from(6u32));
        assert_eq!(inj_count(3, 2), BigUint::zero());
    }

    #[test]
    fn count_inj_c_examples() {
        assert_eq!(
            count_inj_c(&ObjC::new(0, 0), &ObjC::new(3, 2)),
            BigUint::one()
        );
        assert_eq!(
            count_inj_c(&ObjC::new(1, 0), &ObjC::new(1, 0)),
            BigUint::one()
        );
        assert_eq!(
            count_inj_c(&ObjC::new(0, 1), &ObjC::new(1, 1)),
            BigUint::from(2u32)
        );
    }

    /// Brute-force enumeration of pair-category monomorphisms: injective
    /// maps f with f(V0) inside W0 and injective induced quotient map.
    fn brute_inj_c(o: &ObjC, t: &ObjC) -> u64 {
        let (da, db) = (o.a as usize, o.b as usize);
        let (ta, tb) = (t.a as usize, t.b as usize);
        let dn = da + db;
        let tn = ta + tb;
        if dn == 0 {
            return 1;
        }
        let mut count = 0u64;
        // Matrices tn x dn over GF(2), columns = images of basis vectors.
        let bits = tn * dn;
        assert!(bits <= 24);
        for code in 0u64..(1 << bits) {
            let mut m = BitMatrix::zero(tn, dn);
            for bit in 0..bits {
                if (code >> bit) & 1 == 1 {
                    m.set(bit % tn, bit / tn, true);
                }
            }
            if m.rank() != dn {
                continue;
            }
            // f(V0) in W0: first da columns supported on first ta coords.
            let mut ok = true;
            for col in 0..da {
                for row in ta..tn {
                    if m.get(row, col) {
                        ok = false;
                    }
                }
            }
            if !ok {
                continue;
            }
            // Induced quotient map injective: bottom-right block has rank db.
            let mut q = BitMatrix::zero(tb, db);
            for col in 0..db {
                for row in 0..tb {
                    q.set(row, col, m.get(ta + row, da + col));
                }
            }
            if q.rank() == db {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn count_inj_c_matches_brute_force() {
        for oa in 0..=2u32 {
            for ob in 0..=2u32 {
                for ta in 0..=2u32 {
                    for tb in 0..=2u32 {
                        if ((oa + ob) * (ta + tb)) > 12 {
                            continue;
                        }
                        let o = ObjC::new(oa, ob);
                        let t = ObjC::new(ta, tb);
                        assert_eq!(
                            count_inj_c(&o, &t),
                            BigUint::from(brute_inj_c(&o, &t)),
                            "o=({oa},{ob}) t=({ta},{tb})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn measure_mass_is_one() {
        for u in -2i64..=2 {
            let m = measure_mu_iv(u, 40);
            let mass: f64 = m.atoms.iter().map(|(_, w)| w).sum();
            assert!((mass - 1.0).abs() < 1e-6, "u={u}: mass {mass}");
            let at = |a: u32, b: u32| -> f64 {
                m.atoms
                    .iter()
                    .find(|(o, _)| o.a == a && o.b == b)
                    .map_or(0.0, |(_, w)| *w)
            };
            // No mass below the support.
            if u > 0 {
                assert_eq!(at(u as u32 - 1, 0), 0.0);
                // Mass at (u, 0) is the bare rectangular limit.
                let expected = super::super::matrix_laws::p_mat_limit(u as u32, u, 1e-9);
                assert!((at(u as u32, 0) - expected).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn moment_identity_pair_category() {
        for u in -2i64..=2 {
            for a in 0..=3u32 {
                for b in 0..=3u32 {
                    let target = ((a as i64 * u) as f64
                        + (a * b) as f64
                        + (b * (b + 1)) as f64 / 2.0)
                        .exp2();
                    let got = moment_mu_iv(a, b, u);
                    assert!(
                        (got - target).abs() <= 1e-6 * target,
                        "a={a} b={b} u={u}: {got} vs {target}"
                    );
                }
            }
        }
    }

    #[test]
    fn moment_examples() {
        assert!((moment_mu_iv(1, 0, 0) - 1.0).abs() < 1e-9);
        assert!((moment_mu_iv(1, 1, 1) - 8.0).abs() < 1e-6 * 8.0);
        for u in [-2i64, 0, 2] {
            assert!((moment_mu_iv(0, 0, u) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn moment_identity_over_l() {
        for l_dim in 0..=4u32 {
            let subs = all_subspaces(l_dim as usize);
            for u in -2i64..=2 {
                for d in 0..=3u32 {
                    for im in subs.iter().filter(|s| s.dim() <= d as usize) {
                        let o = ObjD::new(d, im.clone()).unwrap();
                        let target =
                            ((u * d as i64) as f64 - (l_dim as f64) * (d as f64)).exp2();
                        let got = moment_mu_v(&o, u, l_dim).unwrap();
                        assert!(
                            (got - target).abs() <= 1e-6 * target,
                            "L={l_dim} u={u} d={d} im_dim={}: {got} vs {target}",
                            im.dim()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn moment_over_l_examples() {
        use crate::gf2::Subspace;
        let o = ObjD::new(1, Subspace::zero(2)).unwrap();
        assert!((moment_mu_v(&o, 0, 2).unwrap() - 0.25).abs() < 1e-7);
        let o2 = ObjD::new(2, Subspace::zero(2)).unwrap();
        assert!((moment_mu_v(&o2, 2, 2).unwrap() - 1.0).abs() < 1e-6);
        let o0 = ObjD::new(0, Subspace::zero(3)).unwrap();
        assert!((moment_mu_v(&o0, 1, 3).unwrap() - 1.0).abs() < 1e-9);
    }

    /// Brute-force check of the over-L monomorphism count formula.
    #[test]
    fn count_inj_d_matches_brute_force() {
        // Ambient L of dimension 2; target object: map T from GF(2)^c to L.
        let l = 2usize;
        for c in 0..=3u32 {
            for t_code in 0u64..(1 << (l as u32 * c)) {
                let mut t = BitMatrix::zero(l, c as usize);
                for bit in 0..(l as u32 * c) {
                    if (t_code >> bit) & 1 == 1 {
                        t.set((bit as usize) % l, (bit as usize) / l, true);
                    }
                }
                // Image subspace of T.
                let cols: Vec<Vec<bool>> = (0..c as usize)
                    .map(|i| (0..l).map(|r| t.get(r, i)).collect())
                    .collect();
                let v = Subspace::from_vectors(l, &cols);
                for a in 0..=2u32 {
                    // Object: lambda_o from GF(2)^a to L.
                    for o_code in 0u64..(1 << (l as u32 * a)) {
                        let mut lo = BitMatrix::zero(l, a as usize);
                        for bit in 0..(l as u32 * a) {
                            if (o_code >> bit) & 1 == 1 {
                                lo.set((bit as usize) % l, (bit as usize) / l, true);
                            }
                        }
                        let ocols: Vec<Vec<bool>> = (0..a as usize)
                            .map(|i| (0..l).map(|r| lo.get(r, i)).collect())
                            .collect();
                        let oimg = Subspace::from_vectors(l, &ocols);
                        let obj = ObjD::new(a, oimg).unwrap();
                        // Brute force: injective f with T f = lambda_o.
                        let mut brute = 0u64;
                        let fbits = (c * a) as u32;
                        for f_code in 0u64..(1 << fbits) {
                            let mut f = BitMatrix::zero(c as usize, a as usize);
                            for bit in 0..fbits {
                                if (f_code >> bit) & 1 == 1 {
                                    f.set((bit as usize) % c as usize, (bit as usize) / c as usize, true);
                                }
                            }
                            if (a as usize) > 0 && f.rank() != a as usize {
                                continue;
                            }
                            // compose T*f and compare with lo.
                            let mut same = true;
                            for col in 0..a as usize {
                                let fv: Vec<bool> =
                                    (0..c as usize).map(|r| f.get(r, col)).collect();
                                let tv = t.mul_vec(&fv);
                                for row in 0..l {
                                    if tv[row] != lo.get(row, col) {
                                        same = false;
                                    }
                                }
                            }
                            if same {
                                brute += 1;
                            }
                        }
                        // The formula counts morphisms into (c, image(T)),
                        // but only when lambda_o factors through image(T).
                        let formula = count_inj_d(&obj, c, &v);
                        assert_eq!(
                            formula,
                            BigUint::from(brute),
                            "c={c} a={a} t={t_code} o={o_code}"
                        );
                    }
                }
            }
        }
    }
}
