//! Exact kernel-rank laws for uniform, alternating, and pulled-back
//! matrices over GF(2), with log2-space variants for deep tails.

use std::sync::Mutex;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::Pow;
use num::{One, Zero};
use rand::Rng;

use crate::gf2::{all_subspaces, BitMatrix};
use crate::{Error, Result};

fn big2pow(e: u64) -> BigInt {
    BigInt::from(2u32).pow(e)
}

/// `[n choose k]_2` as a big integer.
fn gaussian_big(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= big2pow(n - i) - 1;
        den *= big2pow(i + 1) - 1;
    }
    num / den
}

/// Number of injective linear maps from GF(2)^x into GF(2)^y.
fn inj_big(x: u64, y: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..x {
        acc *= big2pow(y) - big2pow(i);
    }
    acc
}

/// log2 of `(2^a - 2^b)` for a > b.
fn log2_pow_diff(a: u64, b: u64) -> f64 {
    b as f64 + (a - b) as f64 + (-((b as f64 - a as f64).exp2())).ln_1p() / std::f64::consts::LN_2
}

fn log2_gaussian(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    let mut acc = 0.0;
    for i in 0..k {
        acc += log2_pow_diff(n - i, 0) - log2_pow_diff(i + 1, 0);
    }
    acc
}

fn log2_inj(x: u64, y: u64) -> f64 {
    let mut acc = 0.0;
    for i in 0..x {
        acc += log2_pow_diff(y, i);
    }
    acc
}

// ---------------------------------------------------------------------------
// Rectangular matrices
// ---------------------------------------------------------------------------

/// Probability that a uniform m x n matrix over GF(2) has kernel of
/// dimension exactly j. Exact rational.
pub fn p_mat_exact(j: u32, m: u32, n: u32) -> Result<BigRational> {
    if j > n {
        return Err(Error::Precondition(format!("kernel dim {j} > cols {n}")));
    }
    let (j, m, n) = (j as u64, m as u64, n as u64);
    if n - j > m {
        // rank n - j exceeds the row count
        return Ok(BigRational::zero());
    }
    let count = gaussian_big(n, j) * inj_big(n - j, m);
    Ok(BigRational::new(count, big2pow(m * n)))
}

/// log2 of `p_mat_exact`, or None when the probability is zero.
pub fn p_mat_exact_log2(j: u32, m: u32, n: u32) -> Option<f64> {
    if j > n || n - j > m {
        return None;
    }
    let (j, m, n) = (j as u64, m as u64, n as u64);
    let mut acc = log2_gaussian(n, j);
    for i in 0..(n - j) {
        acc += log2_pow_diff(m, i);
    }
    Some(acc - (m * n) as f64)
}

/// Limit of `p_mat_exact(j, n - u, n)` as n grows, evaluated to within
/// `tol` by increasing n until successive values settle.
pub fn p_mat_limit(j: u32, u: i64, tol: f64) -> f64 {
    match p_mat_limit_log2(j, u) {
        None => 0.0,
        Some(l) => {
            let _ = tol; // convergence driven below machine epsilon internally
            l.exp2()
        }
    }
}

/// log2 of the limiting kernel-dimension law for (n - u) x n matrices;
/// None below the support `j >= max(u, 0)`.
pub fn p_mat_limit_log2(j: u32, u: i64) -> Option<f64> {
    if (j as i64) < u.max(0) {
        return None;
    }
    let mut n = j as i64 + u.abs() + 12;
    let mut prev = f64::NAN;
    loop {
        let m = (n - u) as u32;
        let cur = p_mat_exact_log2(j, m, n as u32)?;
        if (cur - prev).abs() < 1e-11 || n > j as i64 + u.abs() + 400 {
            return Some(cur);
        }
        prev = cur;
        n += 16;
    }
}

// ---------------------------------------------------------------------------
// Alternating matrices
// ---------------------------------------------------------------------------

/// Number of nondegenerate alternating 2k x 2k matrices over GF(2).
fn nondeg_alternating_count(two_k: u64) -> BigInt {
    debug_assert!(two_k % 2 == 0);
    let k = two_k / 2;
    let mut acc = big2pow(k * (k.max(1) - 1));
    for i in 1..=k {
        acc *= big2pow(2 * i - 1) - 1;
    }
    acc
}

/// Probability that a uniform alternating n x n matrix has kernel of rank
/// exactly j. Exact; zero when j and n have different parities.
pub fn p_alt_exact(j: u32, n: u32) -> BigRational {
    if j > n || (n - j) % 2 == 1 {
        return BigRational::zero();
    }
    let (j, n) = (j as u64, n as u64);
    let count = gaussian_big(n, j) * nondeg_alternating_count(n - j);
    BigRational::new(count, big2pow(n * (n.max(1) - 1) / 2))
}

/// log2 of `p_alt_exact`; None when the probability is zero.
pub fn p_alt_log2(j: u32, n: u32) -> Option<f64> {
    if j > n || (n - j) % 2 == 1 {
        return None;
    }
    let (j, n) = (j as u64, n as u64);
    let k = (n - j) / 2;
    let mut acc = log2_gaussian(n, j) + (k * (k.max(1) - 1)) as f64;
    for i in 1..=k {
        acc += log2_pow_diff(2 * i - 1, 0);
    }
    Some(acc - (n * (n.max(1) - 1) / 2) as f64)
}

// ---------------------------------------------------------------------------
// Pulled-back pairings
// ---------------------------------------------------------------------------

/// Standard symplectic Gram matrix on GF(2)^m, m even: hyperbolic blocks.
fn symplectic_gram(m: usize) -> BitMatrix {
    debug_assert!(m % 2 == 0);
    let mut j = BitMatrix::zero(m, m);
    for b in 0..(m / 2) {
        j.set(2 * b, 2 * b + 1, true);
        j.set(2 * b + 1, 2 * b, true);
    }
    j
}

/// counts[rho][r0] = number of rho-dimensional subspaces of the symplectic
/// space GF(2)^m whose radical has dimension r0.
fn radical_counts(m: usize) -> Vec<Vec<u64>> {
    static CACHE: Mutex<Vec<Option<Vec<Vec<u64>>>>> = Mutex::new(Vec::new());
    {
        let cache = CACHE.lock().unwrap();
        if let Some(Some(c)) = cache.get(m) {
            return c.clone();
        }
    }
    assert!(m % 2 == 0 && m <= 8);
    let j = symplectic_gram(m);
    let mut counts = vec![vec![0u64; m + 1]; m + 1];
    for u in all_subspaces(m) {
        let d = u.dim();
        if d == 0 {
            counts[0][0] += 1;
            continue;
        }
        // Gram matrix of the restricted pairing.
        let basis = u.basis_vectors();
        let mut gram = BitMatrix::zero(d, d);
        for (a, va) in basis.iter().enumerate() {
            let jv = j.mul_vec(va);
            for (b, vb) in basis.iter().enumerate() {
                let dot = jv.iter().zip(vb).fold(false, |acc, (&x, &y)| acc ^ (x & y));
                gram.set(a, b, dot);
            }
        }
        let r0 = d - gram.rank();
        counts[d][r0] += 1;
    }
    let mut cache = CACHE.lock().unwrap();
    if cache.len() <= m {
        cache.resize(m + 1, None);
    }
    cache[m] = Some(counts.clone());
    counts
}

/// Probability that the alternating pairing on GF(2)^n pulled back through
/// a uniform homomorphism into the standard symplectic GF(2)^m has kernel
/// of rank exactly j. Exact rational; m must be even.
///
/// Decomposes over the rank of the map: the kernel is the preimage of the
/// radical of the image subspace, so its dimension is
/// `(n - rank) + dim radical(image)`.
pub fn p_v_exact(j: u32, n: u32, m: u32) -> Result<BigRational> {
    if m % 2 == 1 {
        return Err(Error::Precondition(format!("m = {m} must be even")));
    }
    if j > n {
        return Err(Error::Precondition(format!("kernel dim {j} > dim {n}")));
    }
    let counts = radical_counts(m as usize);
    let mut acc = BigRational::zero();
    for rho in 0..=m.min(n) {
        let r0_needed = j as i64 - (n as i64 - rho as i64);
        if r0_needed < 0 || r0_needed > rho as i64 {
            continue;
        }
        let r0 = r0_needed as usize;
        if counts[rho as usize][r0] == 0 {
            continue;
        }
        // P(rank = rho) = [m choose rho]_2 * inj(rho -> n ... ) / 2^{nm}:
        // maps with image a fixed rho-subspace count as surjections.
        let surj = inj_big(rho as u64, n as u64);
        let p_rank_num = gaussian_big(m as u64, rho as u64) * surj;
        let gauss_total = gaussian_big(m as u64, rho as u64);
        let p_rad = BigRational::new(
            BigInt::from(counts[rho as usize][r0]),
            gauss_total.clone(),
        );
        // P(rank=rho, image=V) is uniform over rho-subspaces V, so the
        // radical law conditions cleanly on the rank.
        let p_rank = BigRational::new(p_rank_num, big2pow(n as u64 * m as u64));
        acc += p_rank * p_rad;
    }
    Ok(acc)
}

/// log2 of `p_v_exact`; None when zero. Valid for any n with m <= 8.
pub fn p_v_log2(j: u32, n: u32, m: u32) -> Option<f64> {
    assert!(m % 2 == 0);
    if j > n {
        return None;
    }
    let counts = radical_counts(m as usize);
    let mut terms: Vec<f64> = Vec::new();
    for rho in 0..=m.min(n) {
        let r0_needed = j as i64 - (n as i64 - rho as i64);
        if r0_needed < 0 || r0_needed > rho as i64 {
            continue;
        }
        let r0 = r0_needed as usize;
        let cnt = counts[rho as usize][r0];
        if cnt == 0 {
            continue;
        }
        let l = log2_inj(rho as u64, n as u64) + (cnt as f64).log2()
            - (n as u64 * m as u64) as f64;
        terms.push(l);
    }
    if terms.is_empty() {
        return None;
    }
    let peak = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - peak).exp2()).sum();
    Some(peak + sum.log2())
}

/// `p_mat_exact` as a float.
pub fn p_mat_exact_f64(j: u32, m: u32, n: u32) -> Result<f64> {
    Ok(p_mat_exact_log2(j, m, n).map_or(0.0, |l| l.exp2()))
}

/// `p_alt_exact` as a float.
pub fn p_alt_exact_f64(j: u32, n: u32) -> f64 {
    p_alt_log2(j, n).map_or(0.0, |l| l.exp2())
}

/// `p_v_exact` as a float.
pub fn p_v_exact_f64(j: u32, n: u32, m: u32) -> Result<f64> {
    if m % 2 == 1 {
        return Err(Error::Precondition(format!("m = {m} must be even")));
    }
    if j > n {
        return Err(Error::Precondition(format!("kernel dim {j} > dim {n}")));
    }
    Ok(p_v_log2(j, n, m).map_or(0.0, |l| l.exp2()))
}

/// Seeded Monte-Carlo frequency of kernel rank `j` for the pulled-back
/// pairing law, using the documented ChaCha8 generator.
pub fn sample_p_v_seeded(j: u32, n: u32, m: u32, samples: u64, seed: u64) -> f64 {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    sample_p_v(j, n, m, samples, &mut rng)
}

/// Monte-Carlo estimate of the pulled-back kernel law: returns the
/// frequency of kernel rank `j` over `samples` uniform homomorphisms.
pub fn sample_p_v<R: Rng>(j: u32, n: u32, m: u32, samples: u64, rng: &mut R) -> f64 {
    assert!(m % 2 == 0);
    let jm = symplectic_gram(m as usize);
    let mut hits = 0u64;
    for _ in 0..samples {
        let t = crate::gf2::sample_matrix(m as usize, n as usize, rng);
        // Pairing matrix: columns of t paired through the symplectic form.
        let cols: Vec<Vec<bool>> = (0..n as usize)
            .map(|i| (0..m as usize).map(|r| t.get(r, i)).collect())
            .collect();
        let mut pairing = BitMatrix::zero(n as usize, n as usize);
        for a in 0..n as usize {
            let ja = jm.mul_vec(&cols[a]);
            for b in 0..n as usize {
                let dot = ja
                    .iter()
                    .zip(&cols[b])
                    .fold(false, |acc, (&x, &y)| acc ^ (x & y));
                pairing.set(a, b, dot);
            }
        }
        if (n as usize - pairing.rank()) == j as usize {
            hits += 1;
        }
    }
    hits as f64 / samples as f64
}

// ---------------------------------------------------------------------------
// Oracles: independent exhaustive enumerations of the same laws. They share
// nothing with the closed-form paths above beyond the rank routine.
// ---------------------------------------------------------------------------

/// Exhaustive kernel-dimension frequency over all m x n matrices.
/// Feasible only for m*n <= ~24.
pub fn enumerate_p_mat(j: u32, m: u32, n: u32) -> BigRational {
    let total = 1u64 << (m * n);
    let mut hits = 0u64;
    for code in 0..total {
        let mut mat = BitMatrix::zero(m as usize, n as usize);
        for bit in 0..(m * n) {
            if (code >> bit) & 1 == 1 {
                mat.set((bit / n) as usize, (bit % n) as usize, true);
            }
        }
        if (n as usize - mat.rank()) == j as usize {
            hits += 1;
        }
    }
    BigRational::new(BigInt::from(hits), BigInt::from(total))
}

/// Exhaustive kernel-rank frequency over all alternating n x n matrices.
/// Feasible only for n <= ~7.
pub fn enumerate_p_alt(j: u32, n: u32) -> BigRational {
    let pairs: Vec<(usize, usize)> = (0..n as usize)
        .flat_map(|i| ((i + 1)..n as usize).map(move |k| (i, k)))
        .collect();
    let total = 1u64 << pairs.len();
    let mut hits = 0u64;
    for code in 0..total {
        let mut mat = BitMatrix::zero(n as usize, n as usize);
        for (bit, &(i, k)) in pairs.iter().enumerate() {
            if (code >> bit) & 1 == 1 {
                mat.set(i, k, true);
                mat.set(k, i, true);
            }
        }
        if (n as usize - mat.rank()) == j as usize {
            hits += 1;
        }
    }
    BigRational::new(BigInt::from(hits), BigInt::from(total))
}

/// Exhaustive pulled-back-pairing kernel frequency over all homomorphisms.
/// Feasible only for n*m <= ~22.
pub fn enumerate_p_v(j: u32, n: u32, m: u32) -> BigRational {
    let jm = symplectic_gram(m as usize);
    let total = 1u64 << (n * m);
    let mut hits = 0u64;
    for code in 0..total {
        let mut t = BitMatrix::zero(m as usize, n as usize);
        for bit in 0..(n * m) {
            if (code >> bit) & 1 == 1 {
                t.set((bit % m) as usize, (bit / m) as usize, true);
            }
        }
        let cols: Vec<Vec<bool>> = (0..n as usize)
            .map(|i| (0..m as usize).map(|r| t.get(r, i)).collect())
            .collect();
        let mut pairing = BitMatrix::zero(n as usize, n as usize);
        for a in 0..n as usize {
            let ja = jm.mul_vec(&cols[a]);
            for b in 0..n as usize {
                let dot = ja
                    .iter()
                    .zip(&cols[b])
                    .fold(false, |acc, (&x, &y)| acc ^ (x & y));
                pairing.set(a, b, dot);
            }
        }
        if (n as usize - pairing.rank()) == j as usize {
            hits += 1;
        }
    }
    BigRational::new(BigInt::from(hits), BigInt::from(total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::ToPrimitive;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn p_mat_small_values() {
        for n in [0u32, 1, 3] {
            assert_eq!(p_mat_exact(n, 0, n).unwrap(), rat(1, 1));
        }
        assert_eq!(p_mat_exact(0, 1, 1).unwrap(), rat(1, 2));
        assert_eq!(p_mat_exact(0, 2, 2).unwrap(), rat(3, 8));
        assert!(p_mat_exact(3, 2, 2).is_err());
    }

    #[test]
    fn p_mat_matches_enumeration() {
        for m in 0..=3u32 {
            for n in 0..=3u32 {
                for j in 0..=n {
                    assert_eq!(
                        p_mat_exact(j, m, n).unwrap(),
                        enumerate_p_mat(j, m, n),
                        "j={j} m={m} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn p_mat_sums_to_one() {
        for m in 0..=5u32 {
            for n in 0..=5u32 {
                let total: BigRational =
                    (0..=n).map(|j| p_mat_exact(j, m, n).unwrap()).sum();
                assert_eq!(total, rat(1, 1));
            }
        }
    }

    #[test]
    fn p_mat_limit_value() {
        // prod_{i>=1} (1 - 2^-i)
        let expected: f64 = (1..200).map(|i| 1.0 - 0.5f64.powi(i)).product();
        assert!((p_mat_limit(0, 0, 1e-9) - expected).abs() < 1e-9);
        assert_eq!(p_mat_limit(0, 1, 1e-9), 0.0);
        assert_eq!(p_mat_limit(2, 3, 1e-9), 0.0);
    }

    #[test]
    fn p_mat_limit_reflection() {
        // P(a | (oo-u) x oo) = P(a-u | (oo+u) x oo)
        for u in -2i64..=2 {
            for a in 0..8u32 {
                if (a as i64) < u.max(0) {
                    continue;
                }
                let lhs = p_mat_limit_log2(a, u).unwrap();
                let rhs = p_mat_limit_log2((a as i64 - u) as u32, -u).unwrap();
                assert!((lhs - rhs).abs() < 1e-8, "a={a} u={u}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn p_mat_limit_closed_form() {
        // Independent closed form:
        // log2 P = -j(j-u) - sum_{i<=j} log2(1-2^-i) + sum_{s>=j+1-u} log2(1-2^-s)
        let closed = |j: i64, u: i64| -> f64 {
            let ln2 = std::f64::consts::LN_2;
            let mut acc = -(j * (j - u)) as f64;
            for i in 1..=j {
                acc -= (-(0.5f64.powi(i as i32))).ln_1p() / ln2;
            }
            let mut s = j + 1 - u;
            while s < j + 1 - u + 220 {
                acc += (-(0.5f64.powi(s as i32))).ln_1p() / ln2;
                s += 1;
            }
            acc
        };
        for u in -3i64..=3 {
            for j in 0..12i64 {
                if j < u.max(0) {
                    continue;
                }
                let l = p_mat_limit_log2(j as u32, u).unwrap();
                assert!(
                    (l - closed(j, u)).abs() < 1e-7,
                    "j={j} u={u}: {l} vs {}",
                    closed(j, u)
                );
            }
        }
    }

    #[test]
    fn p_alt_small_values() {
        assert_eq!(p_alt_exact(1, 1), rat(1, 1));
        assert_eq!(p_alt_exact(0, 2), rat(1, 2));
        assert_eq!(p_alt_exact(2, 2), rat(1, 2));
        assert_eq!(p_alt_exact(1, 2), rat(0, 1));
        assert_eq!(p_alt_exact(0, 3), rat(0, 1));
    }

    #[test]
    fn p_alt_matches_enumeration() {
        for n in 0..=6u32 {
            for j in 0..=n {
                assert_eq!(p_alt_exact(j, n), enumerate_p_alt(j, n), "j={j} n={n}");
            }
            let total: BigRational = (0..=n).map(|j| p_alt_exact(j, n)).sum();
            assert_eq!(total, rat(1, 1));
        }
    }

    #[test]
    fn p_v_small_values() {
        for n in 0..=4u32 {
            assert_eq!(p_v_exact(n, n, 0).unwrap(), rat(1, 1));
        }
        assert_eq!(p_v_exact(0, 2, 2).unwrap(), rat(3, 8));
        // j < n - m is impossible.
        assert_eq!(p_v_exact(0, 4, 2).unwrap(), rat(0, 1));
        assert!(p_v_exact(0, 2, 1).is_err());
    }

    #[test]
    fn p_v_matches_enumeration() {
        let cases: &[(u32, u32)] = &[(1, 2), (2, 2), (3, 2), (4, 2), (1, 4), (2, 4), (3, 4), (5, 2), (4, 4)];
        for &(n, m) in cases {
            assert!(n * m <= 20);
            for j in 0..=n {
                assert_eq!(
                    p_v_exact(j, n, m).unwrap(),
                    enumerate_p_v(j, n, m),
                    "j={j} n={n} m={m}"
                );
            }
            let total: BigRational = (0..=n).map(|j| p_v_exact(j, n, m).unwrap()).sum();
            assert_eq!(total, rat(1, 1));
        }
    }

    #[test]
    fn p_v_monte_carlo_agrees_beyond_enumeration() {
        // n*m = 28 > 20: exact law vs 10^6 samples within 3 standard errors.
        let (n, m) = (7u32, 4u32);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let samples = 1_000_000u64;
        for j in 3..=5u32 {
            let p = p_v_exact(j, n, m).unwrap().to_f64().unwrap();
            let freq = sample_p_v(j, n, m, samples, &mut rng);
            let se = (p * (1.0 - p) / samples as f64).sqrt();
            assert!(
                (freq - p).abs() <= 3.0 * se.max(1e-9),
                "j={j}: freq {freq} vs p {p} (se {se})"
            );
        }
    }

    #[test]
    fn p_v_log2_matches_exact() {
        for &(n, m) in &[(3u32, 2u32), (5, 4), (9, 2), (12, 4)] {
            for j in 0..=n {
                let exact = p_v_exact(j, n, m).unwrap();
                match p_v_log2(j, n, m) {
                    None => assert!(exact.is_zero()),
                    Some(l) => {
                        let e = exact.to_f64().unwrap();
                        assert!(e > 0.0);
                        assert!((l.exp2() - e).abs() < 1e-12 * e.max(1.0), "j={j} n={n} m={m}");
                    }
                }
            }
        }
    }
}
