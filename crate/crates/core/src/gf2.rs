//! Dense linear algebra over the two-element field.
//!
//! Rows are packed into 64-bit words; rank and kernel computations run in
//! place on copies. Matrices are plain values, and the samplers take an
//! explicit generator so parallel callers own independent streams.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const WORD: usize = 64;

/// Dense matrix over GF(2), row-major, bit-packed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(WORD).max(1);
        BitMatrix {
            rows,
            cols,
            words_per_row,
            bits: vec![0; rows * words_per_row],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BitMatrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        let mut m = BitMatrix::zero(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &b) in row.iter().enumerate() {
                m.set(i, j, b);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.rows && j < self.cols);
        let w = self.bits[i * self.words_per_row + j / WORD];
        (w >> (j % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        debug_assert!(i < self.rows && j < self.cols);
        let w = &mut self.bits[i * self.words_per_row + j / WORD];
        if v {
            *w |= 1 << (j % WORD);
        } else {
            *w &= !(1 << (j % WORD));
        }
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        let (a, b) = (src * self.words_per_row, dst * self.words_per_row);
        for k in 0..self.words_per_row {
            let v = self.bits[a + k];
            self.bits[b + k] ^= v;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.words_per_row {
            self.bits
                .swap(a * self.words_per_row + k, b * self.words_per_row + k);
        }
    }

    pub fn row(&self, i: usize) -> Vec<bool> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    t.set(j, i, true);
                }
            }
        }
        t
    }

    /// Matrix-vector product; the vector has length `cols`.
    pub fn mul_vec(&self, v: &[bool]) -> Vec<bool> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = false;
                for (j, &vj) in v.iter().enumerate() {
                    acc ^= self.get(i, j) & vj;
                }
                acc
            })
            .collect()
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn reduce(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pivot) = (r..self.rows).find(|&i| self.get(i, c)) else {
                continue;
            };
            self.swap_rows(r, pivot);
            for i in 0..self.rows {
                if i != r && self.get(i, c) {
                    self.xor_row_into(r, i);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Rank over GF(2).
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.reduce().len()
    }

    /// Basis of the right kernel; dimension is `cols - rank`.
    pub fn kernel_basis(&self) -> Subspace {
        let mut m = self.clone();
        let pivots = m.reduce();
        let rank = pivots.len();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = BitMatrix::zero(free.len(), self.cols);
        for (bi, &fc) in free.iter().enumerate() {
            basis.set(bi, fc, true);
            for (pi, &pc) in pivots.iter().enumerate() {
                if m.get(pi, fc) {
                    basis.set(bi, pc, true);
                }
            }
        }
        debug_assert_eq!(rank + free.len(), self.cols);
        Subspace::from_matrix(self.cols, basis)
    }
}

/// A subspace of GF(2)^n held as a row-reduced basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subspace {
    ambient_dim: usize,
    basis: BitMatrix,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: BitMatrix::zero(0, ambient_dim),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: BitMatrix::identity(ambient_dim),
        }
    }

    /// Builds a subspace from spanning rows (reduces and drops zero rows).
    pub fn from_matrix(ambient_dim: usize, mut m: BitMatrix) -> Self {
        assert_eq!(m.cols(), ambient_dim);
        let pivots = m.reduce();
        let mut basis = BitMatrix::zero(pivots.len(), ambient_dim);
        for i in 0..pivots.len() {
            for j in 0..ambient_dim {
                if m.get(i, j) {
                    basis.set(i, j, true);
                }
            }
        }
        Subspace { ambient_dim, basis }
    }

    pub fn from_vectors(ambient_dim: usize, vecs: &[Vec<bool>]) -> Self {
        if vecs.is_empty() {
            return Subspace::zero(ambient_dim);
        }
        Subspace::from_matrix(ambient_dim, BitMatrix::from_rows(vecs))
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &BitMatrix {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Vec<bool>> {
        (0..self.dim()).map(|i| self.basis.row(i)).collect()
    }

    /// Reduces `v` against the basis; a zero result means membership.
    pub fn reduce_vector(&self, v: &[bool]) -> Vec<bool> {
        assert_eq!(v.len(), self.ambient_dim);
        let mut v = v.to_vec();
        for i in 0..self.dim() {
            let pivot = (0..self.ambient_dim)
                .find(|&j| self.basis.get(i, j))
                .expect("basis rows are nonzero");
            if v[pivot] {
                for j in 0..self.ambient_dim {
                    v[j] ^= self.basis.get(i, j);
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[bool]) -> bool {
        self.reduce_vector(v).iter().all(|&b| !b)
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        (0..other.dim()).all(|i| self.contains(&other.basis.row(i)))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient_dim, other.ambient_dim);
        let mut rows = self.basis_vectors();
        rows.extend(other.basis_vectors());
        Subspace::from_vectors(self.ambient_dim, &rows)
    }

    /// All vectors of the subspace, including zero. Exponential; callers
    /// keep dimensions small.
    pub fn elements(&self) -> Vec<Vec<bool>> {
        let d = self.dim();
        let mut out = Vec::with_capacity(1 << d);
        for mask in 0u64..(1 << d) {
            let mut v = vec![false; self.ambient_dim];
            for i in 0..d {
                if (mask >> i) & 1 == 1 {
                    for j in 0..self.ambient_dim {
                        v[j] ^= self.basis.get(i, j);
                    }
                }
            }
            out.push(v);
        }
        out
    }
}

/// Uniform random matrix: every bit independent and uniform; deterministic
/// under a fixed generator state.
pub fn sample_matrix<R: Rng>(m: usize, n: usize, rng: &mut R) -> BitMatrix {
    let mut out = BitMatrix::zero(m, n);
    if n == 0 {
        return out;
    }
    for i in 0..m {
        for w in 0..out.words_per_row {
            out.bits[i * out.words_per_row + w] = rng.gen::<u64>();
        }
        let excess = out.words_per_row * WORD - n;
        if excess > 0 {
            let last = (i + 1) * out.words_per_row - 1;
            out.bits[last] &= u64::MAX >> excess;
        }
    }
    out
}

/// Uniform random alternating matrix: zero diagonal, symmetric, strict
/// upper triangle uniform.
pub fn sample_alternating<R: Rng>(n: usize, rng: &mut R) -> BitMatrix {
    let mut out = BitMatrix::zero(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<bool>() {
                out.set(i, j, true);
                out.set(j, i, true);
            }
        }
    }
    out
}

/// Every subspace of GF(2)^n, each exactly once, as reduced echelon bases.
/// Crate-internal: unlike [`enumerate_subspaces`] this runs up to n = 8 for
/// the module-lemma and radical-law brute forces.
pub(crate) fn all_subspaces(n: usize) -> Vec<Subspace> {
    assert!(n <= 8, "subspace enumeration capped at ambient dimension 8");
    let mut out = Vec::new();
    for k in 0..=n {
        enumerate_rref(n, k, &mut out);
    }
    out
}

/// Enumerates reduced row echelon forms with k pivot rows in n columns:
/// choose pivot columns, then fill the free entries.
fn enumerate_rref(n: usize, k: usize, out: &mut Vec<Subspace>) {
    if k == 0 {
        out.push(Subspace::zero(n));
        return;
    }
    if k > n {
        return;
    }
    let mut pivots: Vec<usize> = (0..k).collect();
    loop {
        let mut free = Vec::new();
        for (i, &pc) in pivots.iter().enumerate() {
            for j in (pc + 1)..n {
                if !pivots.contains(&j) {
                    free.push((i, j));
                }
            }
        }
        for mask in 0u64..(1 << free.len()) {
            let mut m = BitMatrix::zero(k, n);
            for (i, &pc) in pivots.iter().enumerate() {
                m.set(i, pc, true);
            }
            for (bit, &(i, j)) in free.iter().enumerate() {
                if (mask >> bit) & 1 == 1 {
                    m.set(i, j, true);
                }
            }
            out.push(Subspace {
                ambient_dim: n,
                basis: m,
            });
        }
        // Advance the pivot-column combination.
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if pivots[i] != i + n - k {
                pivots[i] += 1;
                for j in (i + 1)..k {
                    pivots[j] = pivots[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// All subspaces of GF(2)^n, n <= 5.
pub fn enumerate_subspaces(ambient_dim: usize) -> Result<Vec<Subspace>> {
    if ambient_dim > 5 {
        return Err(Error::DimensionCap {
            got: ambient_dim,
            cap: 5,
        });
    }
    Ok(all_subspaces(ambient_dim))
}

/// Gaussian binomial coefficient `[n choose k]_2`.
pub fn gaussian_binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let mut num = 1u128;
    let mut den = 1u128;
    for i in 0..k {
        num *= (1u128 << (n - i)) - 1;
        den *= (1u128 << (i + 1)) - 1;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rank_basics() {
        assert_eq!(BitMatrix::zero(3, 3).rank(), 0);
        assert_eq!(BitMatrix::identity(4).rank(), 4);
        let m = BitMatrix::from_rows(&[vec![true, true], vec![true, true]]);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn kernel_basics() {
        assert_eq!(BitMatrix::identity(5).kernel_basis().dim(), 0);
        assert_eq!(BitMatrix::zero(3, 4).kernel_basis().dim(), 4);
        let m = BitMatrix::from_rows(&[vec![true, true, false], vec![false, true, true]]);
        let k = m.kernel_basis();
        assert_eq!(k.dim(), 1);
        assert!(k.contains(&[true, true, true]));
    }

    #[test]
    fn kernel_vectors_annihilate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let m = sample_matrix(5, 9, &mut rng);
            let k = m.kernel_basis();
            assert_eq!(k.dim() + m.rank(), m.cols());
            for v in k.basis_vectors() {
                assert!(m.mul_vec(&v).iter().all(|&b| !b));
            }
        }
    }

    #[test]
    fn rank_equals_transpose_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let m = sample_matrix(6, 11, &mut rng);
            assert_eq!(m.rank(), m.transpose().rank());
        }
    }

    #[test]
    fn sampler_is_deterministic_under_seed() {
        let a = sample_matrix(8, 8, &mut ChaCha8Rng::seed_from_u64(42));
        let b = sample_matrix(8, 8, &mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
        assert_eq!(
            sample_matrix(0, 5, &mut ChaCha8Rng::seed_from_u64(0)).rows(),
            0
        );
    }

    #[test]
    fn sampler_bit_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let ones = (0..n)
            .filter(|_| sample_matrix(1, 1, &mut rng).get(0, 0))
            .count();
        let mean = ones as f64 / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn alternating_shape_and_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let one_by_one = sample_alternating(1, &mut rng);
        assert!(!one_by_one.get(0, 0));
        for _ in 0..200 {
            let m = sample_alternating(6, &mut rng);
            for i in 0..6 {
                assert!(!m.get(i, i));
                for j in 0..6 {
                    assert_eq!(m.get(i, j), m.get(j, i));
                }
            }
            assert_eq!(m.rank() % 2, 0);
        }
    }

    #[test]
    fn alternating_two_by_two_kernel_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let full = (0..n)
            .filter(|_| sample_alternating(2, &mut rng).rank() == 2)
            .count();
        let freq = full as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn subspace_counts_match_gaussian_binomials() {
        for n in 0..=4usize {
            let total: u128 = (0..=n as u32).map(|k| gaussian_binomial(n as u32, k)).sum();
            let subs = enumerate_subspaces(n).unwrap();
            assert_eq!(subs.len() as u128, total, "n={n}");
            let mut seen = std::collections::HashSet::new();
            for s in &subs {
                assert!(seen.insert(s.basis_vectors()), "duplicate subspace, n={n}");
            }
        }
        assert_eq!(enumerate_subspaces(0).unwrap().len(), 1);
        assert_eq!(enumerate_subspaces(1).unwrap().len(), 2);
        assert_eq!(enumerate_subspaces(2).unwrap().len(), 5);
        assert!(enumerate_subspaces(6).is_err());
    }

    #[test]
    fn subspace_membership_and_sum() {
        let a = Subspace::from_vectors(3, &[vec![true, false, true]]);
        let b = Subspace::from_vectors(3, &[vec![false, true, false]]);
        let s = a.sum(&b);
        assert_eq!(s.dim(), 2);
        assert!(s.contains(&[true, true, true]));
        assert!(!s.contains(&[false, false, true]));
        assert!(s.contains_subspace(&a));
    }
}
