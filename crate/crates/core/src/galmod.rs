//! Brute-force verification of the matrix-ring module lemmas.
//!
//! The lemmas live over two subrings of the 2x2 matrices over GF(2):
//! the upper-triangular ring generated by `alpha = [[0,1],[0,0]]` and
//! `beta = [[1,0],[0,0]]` together with the identity, and the diagonal ring
//! generated by `beta` and the identity. Modules are direct sums of
//! one-dimensional kernel-line factors and full two-dimensional factors;
//! every submodule closed under the ring action and satisfying the stated
//! surjectivity hypotheses must be the whole module, and the equivariant
//! homomorphisms between the basic factors are classified by exhaustion.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::gf2::{all_subspaces, BitMatrix, Subspace};
use crate::{Error, Result};

/// A 2x2 matrix over GF(2), packed into 4 bits (row-major).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Mat2(pub u8);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2(0b0000);
    pub const ID: Mat2 = Mat2(0b1001);
    /// [[0,1],[0,0]]
    pub const ALPHA: Mat2 = Mat2(0b0100);
    /// [[1,0],[0,0]]
    pub const BETA: Mat2 = Mat2(0b1000);

    pub fn entry(&self, i: usize, j: usize) -> bool {
        (self.0 >> (3 - (2 * i + j))) & 1 == 1
    }

    pub fn from_entries(e: [[bool; 2]; 2]) -> Mat2 {
        let mut v = 0u8;
        for i in 0..2 {
            for j in 0..2 {
                v = (v << 1) | u8::from(e[i][j]);
            }
        }
        Mat2(v)
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        Mat2(self.0 ^ o.0)
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let mut e = [[false; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                e[i][j] = (self.entry(i, 0) & o.entry(0, j)) ^ (self.entry(i, 1) & o.entry(1, j));
            }
        }
        Mat2::from_entries(e)
    }

    /// Action on a column vector of GF(2)^2.
    pub fn apply(&self, v: (bool, bool)) -> (bool, bool) {
        (
            (self.entry(0, 0) & v.0) ^ (self.entry(0, 1) & v.1),
            (self.entry(1, 0) & v.0) ^ (self.entry(1, 1) & v.1),
        )
    }
}

/// A subring with identity of the 2x2 matrices over GF(2), closed under
/// addition and multiplication.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatRingF2 {
    elements: BTreeSet<Mat2>,
}

impl MatRingF2 {
    pub fn elements(&self) -> impl Iterator<Item = Mat2> + '_ {
        self.elements.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false // always contains 0 and the identity
    }

    pub fn contains(&self, m: &Mat2) -> bool {
        self.elements.contains(m)
    }
}

/// Closure of a generating set under addition and multiplication, together
/// with the identity.
pub fn ring_generated(gens: &[Mat2]) -> MatRingF2 {
    let mut elements: BTreeSet<Mat2> = [Mat2::ZERO, Mat2::ID].into_iter().collect();
    elements.extend(gens.iter().copied());
    loop {
        let snapshot: Vec<Mat2> = elements.iter().copied().collect();
        let before = elements.len();
        for a in &snapshot {
            for b in &snapshot {
                elements.insert(a.add(b));
                elements.insert(a.mul(b));
            }
        }
        if elements.len() == before {
            return MatRingF2 { elements };
        }
    }
}

/// The upper-triangular ring generated by alpha, beta, and the identity.
pub fn ring_upper_triangular() -> MatRingF2 {
    ring_generated(&[Mat2::ALPHA, Mat2::BETA])
}

/// The diagonal ring generated by beta and the identity.
pub fn ring_diagonal() -> MatRingF2 {
    ring_generated(&[Mat2::BETA])
}

/// Ambient module description: a list of factors, each either a kernel line
/// (one coordinate, the ring acting through its restriction to the line
/// spanned by (1,0) or (0,1)) or a full plane (two coordinates).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Factor {
    /// Line spanned by (1, 0): alpha acts as 0, beta as 1.
    LineX,
    /// Line spanned by (0, 1): alpha is not defined on it (used only with
    /// the diagonal ring), beta acts as 0.
    LineY,
    /// Full plane GF(2)^2.
    Plane,
}

impl Factor {
    fn dim(&self) -> usize {
        match self {
            Factor::Plane => 2,
            _ => 1,
        }
    }
}

/// Matrix of the action of `m` on the direct sum of factors.
fn action_matrix(m: &Mat2, factors: &[Factor]) -> BitMatrix {
    let n: usize = factors.iter().map(Factor::dim).sum();
    let mut out = BitMatrix::zero(n, n);
    let mut off = 0;
    for f in factors {
        match f {
            Factor::LineX => {
                // coordinate is the (1,0)-component
                let (x, _) = m.apply((true, false));
                out.set(off, off, x);
                off += 1;
            }
            Factor::LineY => {
                let (_, y) = m.apply((false, true));
                out.set(off, off, y);
                off += 1;
            }
            Factor::Plane => {
                for (j, basis) in [(0, (true, false)), (1, (false, true))] {
                    let (x, y) = m.apply(basis);
                    out.set(off, off + j, x);
                    out.set(off + 1, off + j, y);
                }
                off += 2;
            }
        }
    }
    out
}

fn is_closed_under(sub: &Subspace, actions: &[BitMatrix]) -> bool {
    sub.basis_vectors()
        .iter()
        .all(|v| actions.iter().all(|a| sub.contains(&a.mul_vec(v))))
}

/// Rank of a linear map restricted to a subspace, the map given by the rows
/// it keeps of the coordinate projection `coords`.
fn restricted_map_rank(sub: &Subspace, rows: &[Vec<bool>]) -> usize {
    let images: Vec<Vec<bool>> = sub
        .basis_vectors()
        .iter()
        .map(|v| {
            rows.iter()
                .map(|row| row.iter().zip(v).fold(false, |acc, (&r, &x)| acc ^ (r & x)))
                .collect()
        })
        .collect();
    if images.is_empty() {
        0
    } else {
        BitMatrix::from_rows(&images).rank()
    }
}

fn coordinate_row(n: usize, idx: usize) -> Vec<bool> {
    let mut row = vec![false; n];
    row[idx] = true;
    row
}

/// Checks that every ring-closed submodule of
/// `LineX^a (+) Plane^b` surjecting onto the kernel-line coordinates and
/// onto the quotient coordinates of the planes equals the whole module.
///
/// Returns true when no proper counterexample exists. Ambient dimension
/// `a + 2b` is capped at 6.
pub fn verify_prop_iv_cofavored(a: u32, b: u32) -> Result<bool> {
    let dim = (a + 2 * b) as usize;
    if dim > 6 {
        return Err(Error::DimensionCap { got: dim, cap: 6 });
    }
    let ring = ring_upper_triangular();
    let factors: Vec<Factor> = std::iter::repeat(Factor::LineX)
        .take(a as usize)
        .chain(std::iter::repeat(Factor::Plane).take(b as usize))
        .collect();
    let actions: Vec<BitMatrix> = ring.elements().map(|m| action_matrix(&m, &factors)).collect();
    // Surjectivity targets: the a line coordinates, and the second
    // coordinate of each plane (the quotient by its kernel line).
    let line_rows: Vec<Vec<bool>> = (0..a as usize).map(|i| coordinate_row(dim, i)).collect();
    let quot_rows: Vec<Vec<bool>> = (0..b as usize)
        .map(|k| coordinate_row(dim, a as usize + 2 * k + 1))
        .collect();
    for sub in all_subspaces(dim) {
        if !is_closed_under(&sub, &actions) {
            continue;
        }
        if restricted_map_rank(&sub, &line_rows) != a as usize {
            continue;
        }
        if restricted_map_rank(&sub, &quot_rows) != b as usize {
            continue;
        }
        if sub.dim() != dim {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Same pattern for `LineX^a (+) LineY^b (+) Plane^c` over the diagonal
/// ring, with surjectivity onto the two mixed coordinate blocks: the x-side
/// (LineX coordinates and first plane coordinates) and the y-side (LineY
/// coordinates and second plane coordinates). Ambient `a + b + 2c <= 6`.
pub fn verify_prop_v_cofavored(a: u32, b: u32, c: u32) -> Result<bool> {
    let dim = (a + b + 2 * c) as usize;
    if dim > 6 {
        return Err(Error::DimensionCap { got: dim, cap: 6 });
    }
    let ring = ring_diagonal();
    let factors: Vec<Factor> = std::iter::repeat(Factor::LineX)
        .take(a as usize)
        .chain(std::iter::repeat(Factor::LineY).take(b as usize))
        .chain(std::iter::repeat(Factor::Plane).take(c as usize))
        .collect();
    let actions: Vec<BitMatrix> = ring.elements().map(|m| action_matrix(&m, &factors)).collect();
    let mut x_rows: Vec<Vec<bool>> = (0..a as usize).map(|i| coordinate_row(dim, i)).collect();
    let mut y_rows: Vec<Vec<bool>> = (0..b as usize)
        .map(|i| coordinate_row(dim, a as usize + i))
        .collect();
    for k in 0..c as usize {
        let base = (a + b) as usize + 2 * k;
        x_rows.push(coordinate_row(dim, base));
        y_rows.push(coordinate_row(dim, base + 1));
    }
    for sub in all_subspaces(dim) {
        if !is_closed_under(&sub, &actions) {
            continue;
        }
        if restricted_map_rank(&sub, &x_rows) != (a + c) as usize {
            continue;
        }
        if restricted_map_rank(&sub, &y_rows) != (b + c) as usize {
            continue;
        }
        if sub.dim() != dim {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Counts of nonzero equivariant homomorphisms over the upper-triangular
/// ring for the four basic hom-spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivariantHomReport {
    /// plane -> plane (expected 1: the identity)
    pub plane_to_plane: u32,
    /// plane -> plane/line (expected 1: the projection)
    pub plane_to_quotient: u32,
    /// line -> plane (expected 1: the inclusion)
    pub line_to_plane: u32,
    /// line -> plane/line (expected 0)
    pub line_to_quotient: u32,
}

impl EquivariantHomReport {
    pub fn as_tuple(&self) -> (u32, u32, u32, u32) {
        (
            self.plane_to_plane,
            self.plane_to_quotient,
            self.line_to_plane,
            self.line_to_quotient,
        )
    }
}

/// Exhausts all linear maps for the four hom-spaces and counts the nonzero
/// ring-equivariant ones.
pub fn classify_equivariant_homs() -> EquivariantHomReport {
    let ring = ring_upper_triangular();
    let elements: Vec<Mat2> = ring.elements().collect();
    // Module actions: plane = GF(2)^2 with the matrix action; line = the
    // (1,0)-span with the restricted action; quotient = plane mod line,
    // coordinates the second component with the induced action.
    let act_plane = |m: &Mat2, v: (bool, bool)| m.apply(v);
    let act_line = |m: &Mat2, x: bool| m.apply((x, false)).0;
    let act_quot = |m: &Mat2, y: bool| m.apply((false, y)).1;

    let mut plane_to_plane = 0;
    // Gamma: 2x2 matrix.
    for code in 1u8..16 {
        let g = Mat2(code);
        if elements
            .iter()
            .all(|m| g.mul(m) == m.mul(&g))
        {
            plane_to_plane += 1;
        }
    }
    let mut plane_to_quotient = 0;
    // Gamma: row vector (g0, g1): y = g0 x0 + g1 x1.
    for code in 1u8..4 {
        let g = (code & 1 == 1, code & 2 == 2);
        let apply = |v: (bool, bool)| (g.0 & v.0) ^ (g.1 & v.1);
        if elements.iter().all(|m| {
            [(false, true), (true, false), (true, true)]
                .into_iter()
                .all(|v| apply(act_plane(m, v)) == act_quot(m, apply(v)))
        }) {
            plane_to_quotient += 1;
        }
    }
    let mut line_to_plane = 0;
    for code in 1u8..4 {
        let g = (code & 1 == 1, code & 2 == 2);
        if elements.iter().all(|m| {
            let lhs = act_plane(m, g);
            let rhs = if act_line(m, true) { g } else { (false, false) };
            lhs == rhs
        }) {
            line_to_plane += 1;
        }
    }
    let mut line_to_quotient = 0;
    // The only nonzero map sends the line generator to the quotient
    // generator; it is equivariant iff every ring element acts the same way
    // on both.
    if elements
        .iter()
        .all(|m| act_line(m, true) == act_quot(m, true))
    {
        line_to_quotient += 1;
    }
    EquivariantHomReport {
        plane_to_plane,
        plane_to_quotient,
        line_to_plane,
        line_to_quotient,
    }
}

/// JSON verification report for one proposition instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaReport {
    pub proposition: String,
    pub parameters: Vec<u32>,
    pub verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

/// Runs every module-lemma check within the dimension caps and returns one
/// report per instance.
pub fn verify_all_lemmas() -> Result<Vec<LemmaReport>> {
    let mut out = Vec::new();
    for a in 0..=6u32 {
        for b in 0..=3u32 {
            if a + 2 * b > 6 {
                continue;
            }
            let ok = verify_prop_iv_cofavored(a, b)?;
            out.push(LemmaReport {
                proposition: "cofavored-submodule (single balanced kernel)".into(),
                parameters: vec![a, b],
                verified: ok,
                counterexample: (!ok).then(|| format!("proper submodule at (a,b)=({a},{b})")),
            });
        }
    }
    for a in 0..=6u32 {
        for b in 0..=6u32 {
            for c in 0..=3u32 {
                if a + b + 2 * c > 6 {
                    continue;
                }
                let ok = verify_prop_v_cofavored(a, b, c)?;
                out.push(LemmaReport {
                    proposition: "cofavored-submodule (two balanced kernels)".into(),
                    parameters: vec![a, b, c],
                    verified: ok,
                    counterexample: (!ok)
                        .then(|| format!("proper submodule at (a,b,c)=({a},{b},{c})")),
                });
            }
        }
    }
    let homs = classify_equivariant_homs();
    out.push(LemmaReport {
        proposition: "equivariant-hom classification".into(),
        parameters: vec![
            homs.plane_to_plane,
            homs.plane_to_quotient,
            homs.line_to_plane,
            homs.line_to_quotient,
        ],
        verified: homs.as_tuple() == (1, 1, 1, 0),
        counterexample: None,
    });
    Ok(out)
}
