//! Curve models, quadratic twists, 2-isogeny enumeration, balanced-isogeny
//! detection, isogeny graphs, and the five-way case classification.
//!
//! Every curve is normalized to `y^2 = x^3 + A x^2 + B x`, which marks a
//! rational 2-torsion point at the origin. The degree-2 quotient by that
//! point has model `y^2 = x^3 - 2A x^2 + (A^2 - 4B) x`, and an isogeny is
//! balanced when the squarefree kernels of `B` and `A^2 - 4B` agree, i.e.
//! when source and target generate the same 2-torsion field.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{squarefree_kernel, SquareClass};
use crate::{Error, Result};

/// Integral model `y^2 = x^3 + A x^2 + B x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CurveModel {
    pub a: i64,
    pub b: i64,
}

impl CurveModel {
    /// Validates nondegeneracy `B^2 (A^2 - 4B) != 0`.
    pub fn new(a: i64, b: i64) -> Result<Self> {
        let disc = (a as i128) * (a as i128) - 4 * (b as i128);
        if b == 0 || disc == 0 {
            return Err(Error::DegenerateCurve(format!(
                "B^2(A^2-4B) = 0 for (A, B) = ({a}, {b})"
            )));
        }
        Ok(CurveModel { a, b })
    }

    /// Model from the roots `(0, r, s)` of the right-hand side.
    pub fn from_roots(r: i64, s: i64) -> Result<Self> {
        let a = r
            .checked_add(s)
            .and_then(|t| t.checked_neg())
            .ok_or(Error::Overflow("from_roots"))?;
        let b = r.checked_mul(s).ok_or(Error::Overflow("from_roots"))?;
        CurveModel::new(a, b)
    }

    pub fn disc_quadratic(&self) -> i128 {
        (self.a as i128) * (self.a as i128) - 4 * (self.b as i128)
    }

    /// Roots `(r, s)` of `x^2 + Ax + B` when it splits over the integers;
    /// present exactly when the curve has full rational 2-torsion.
    pub fn split_roots(&self) -> Option<(i64, i64)> {
        let d = self.disc_quadratic();
        if d < 0 {
            return None;
        }
        let t = integer_sqrt(d)?;
        // A and t share parity since A^2 = t^2 mod 4.
        let r = (-(self.a as i128) + t) / 2;
        let s = (-(self.a as i128) - t) / 2;
        let (r, s) = (i64::try_from(r).ok()?, i64::try_from(s).ok()?);
        debug_assert_eq!(r + s, -self.a);
        debug_assert_eq!(r.checked_mul(s), Some(self.b));
        Some((r, s))
    }

    pub fn has_full_two_torsion(&self) -> bool {
        self.split_roots().is_some()
    }

    /// Rational 2-torsion x-coordinates: always 0, plus the split roots.
    pub fn two_torsion_x(&self) -> Vec<i64> {
        let mut xs = vec![0];
        if let Some((r, s)) = self.split_roots() {
            xs.push(r);
            xs.push(s);
        }
        xs
    }

    /// Quadratic twist by a squarefree integer: `(A, B) -> (dA, d^2 B)`.
    pub fn twist(&self, d: i64) -> Result<CurveModel> {
        let a = self.a.checked_mul(d).ok_or(Error::Overflow("twist"))?;
        let b = d
            .checked_mul(d)
            .and_then(|dd| self.b.checked_mul(dd))
            .ok_or(Error::Overflow("twist"))?;
        CurveModel::new(a, b)
    }

    /// The 2-torsion field as a square class: `squarefree(A^2 - 4B)`, with
    /// the trivial class meaning full rational 2-torsion.
    pub fn two_torsion_field(&self) -> Result<SquareClass> {
        let d = self.disc_quadratic();
        squarefree_kernel(i64::try_from(d).map_err(|_| Error::Overflow("two_torsion_field"))?)
    }

    /// Model translated so the 2-torsion point with x-coordinate `x0` sits
    /// at the origin. `x0` must be a root of the right-hand side.
    pub fn translate_torsion(&self, x0: i64) -> Result<CurveModel> {
        let a = 3i128 * x0 as i128 + self.a as i128;
        let b = 3i128 * (x0 as i128) * (x0 as i128)
            + 2 * (self.a as i128) * (x0 as i128)
            + self.b as i128;
        CurveModel::new(
            i64::try_from(a).map_err(|_| Error::Overflow("translate"))?,
            i64::try_from(b).map_err(|_| Error::Overflow("translate"))?,
        )
    }

    /// Reduces `(A, B)` by the isomorphism `(A, B) -> (A/u^2, B/u^4)`.
    pub fn reduce_by_squares(&self) -> CurveModel {
        let mut a = self.a;
        let mut b = self.b;
        let mut u = 2i64;
        while u * u <= a.abs().max(2) {
            let u2 = u * u;
            let u4 = u2 * u2;
            while (a % u2 == 0 || a == 0) && b % u4 == 0 {
                a /= u2;
                b /= u4;
            }
            u += 1;
        }
        // A = 0 leaves B free to drop any fourth power.
        if a == 0 {
            let mut u = 2i64;
            while (u as i128).pow(4) <= b.abs() as i128 {
                let u4 = u.pow(4);
                while b % u4 == 0 {
                    b /= u4;
                }
                u += 1;
            }
        }
        CurveModel { a, b }
    }

    /// Canonical key identifying the curve up to isomorphism: the least
    /// square-reduced translated model over all rational 2-torsion points.
    pub fn canonical_key(&self) -> Result<CurveModel> {
        let mut best: Option<CurveModel> = None;
        for x0 in self.two_torsion_x() {
            let m = self.translate_torsion(x0)?.reduce_by_squares();
            best = Some(match best {
                None => m,
                Some(cur) => {
                    if (m.a.abs(), m.b.abs(), m.a, m.b) < (cur.a.abs(), cur.b.abs(), cur.a, cur.b)
                    {
                        m
                    } else {
                        cur
                    }
                }
            });
        }
        Ok(best.expect("origin is always a torsion point"))
    }
}

impl fmt::Display for CurveModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y^2 = x^3 + ({})x^2 + ({})x", self.a, self.b)
    }
}

fn integer_sqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let mut x = (n as f64).sqrt() as i128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    (x * x == n).then_some(x)
}

/// A rational 2-isogeny, normalized so the kernel sits at the origin of the
/// source model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoIsogeny {
    /// Source model translated so the kernel point is `(0, 0)`.
    pub source: CurveModel,
    /// Target model `(-2A, A^2 - 4B)` of the source.
    pub target: CurveModel,
    /// Kernel x-coordinate in the coordinates the isogeny was built from.
    pub kernel_x: i64,
    /// Same 2-torsion field on both ends.
    pub balanced: bool,
}

impl TwoIsogeny {
    /// Builds the isogeny killing the torsion point at `x0` on `e`.
    pub fn from_kernel(e: &CurveModel, x0: i64) -> Result<TwoIsogeny> {
        let source = e.translate_torsion(x0)?;
        let ta = source
            .a
            .checked_mul(-2)
            .ok_or(Error::Overflow("isogeny target"))?;
        let tb = i64::try_from(source.disc_quadratic()).map_err(|_| Error::Overflow("isogeny"))?;
        let target = CurveModel::new(ta, tb)?;
        let balanced = squarefree_kernel(source.b)? == squarefree_kernel(tb)?;
        Ok(TwoIsogeny {
            source,
            target,
            kernel_x: x0,
            balanced,
        })
    }

    /// The dual isogeny, normalized the same way. Its target is isomorphic
    /// to the source (the composition is multiplication by 2).
    pub fn dual(&self) -> Result<TwoIsogeny> {
        TwoIsogeny::from_kernel(&self.target.reduce_by_squares(), 0)
    }

    /// Twists both ends by a squarefree integer.
    pub fn twist(&self, d: i64) -> Result<TwoIsogeny> {
        let source = self.source.twist(d)?;
        Ok(TwoIsogeny {
            source,
            target: self.target.twist(d)?,
            kernel_x: self.kernel_x.checked_mul(d).ok_or(Error::Overflow("twist"))?,
            balanced: self.balanced,
        })
    }
}

/// One isogeny per rational 2-torsion point of `e` (one or three).
pub fn enumerate_two_isogenies(e: &CurveModel) -> Result<Vec<TwoIsogeny>> {
    e.two_torsion_x()
        .into_iter()
        .map(|x0| TwoIsogeny::from_kernel(e, x0))
        .collect()
}

/// The five-way classification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseLabel {
    /// Full 2-torsion, no balanced isogeny (the trivial-torsion variant of
    /// this case has no rational 2-isogeny and is outside the input domain).
    I,
    /// One isogeny, not balanced, target without full 2-torsion.
    II,
    /// One isogeny, target with full 2-torsion.
    III,
    /// Exactly one balanced isogeny.
    IV { balanced: TwoIsogeny },
    /// Two balanced isogenies.
    V {
        balanced_1: TwoIsogeny,
        balanced_2: TwoIsogeny,
    },
}

impl CaseLabel {
    pub fn name(&self) -> &'static str {
        match self {
            CaseLabel::I => "I",
            CaseLabel::II => "II",
            CaseLabel::III => "III",
            CaseLabel::IV { .. } => "IV",
            CaseLabel::V { .. } => "V",
        }
    }

    pub fn balanced_isogenies(&self) -> Vec<&TwoIsogeny> {
        match self {
            CaseLabel::IV { balanced } => vec![balanced],
            CaseLabel::V {
                balanced_1,
                balanced_2,
            } => vec![balanced_1, balanced_2],
            _ => vec![],
        }
    }
}

/// Classifies by counting balanced isogenies; with none, rational 2-torsion
/// and the target's torsion separate the first three cases.
pub fn classify_case(e: &CurveModel) -> Result<CaseLabel> {
    let isogenies = enumerate_two_isogenies(e)?;
    let balanced: Vec<&TwoIsogeny> = isogenies.iter().filter(|i| i.balanced).collect();
    Ok(match balanced.len() {
        2.. => CaseLabel::V {
            balanced_1: *balanced[0],
            balanced_2: *balanced[1],
        },
        1 => CaseLabel::IV {
            balanced: *balanced[0],
        },
        0 => {
            if e.has_full_two_torsion() {
                CaseLabel::I
            } else if isogenies[0].target.has_full_two_torsion() {
                CaseLabel::III
            } else {
                CaseLabel::II
            }
        }
    })
}

/// The 2-isogeny graph: curves up to isomorphism, edges the rational
/// 2-isogenies (with their duals identified).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsogenyGraph {
    /// Canonical models, sorted; index 0 is not special.
    pub vertices: Vec<CurveModel>,
    /// Undirected edges between vertex indices, deduplicated, with the
    /// balanced flag.
    pub edges: Vec<(usize, usize, bool)>,
    /// Index of the starting curve.
    pub start: usize,
}

impl IsogenyGraph {
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|(a, b, _)| *a == v || *b == v)
            .count()
    }

    /// Shape index in 1..=5: isolated vertex, 2-path, 4-star, double star
    /// on 6 vertices, or the 8-vertex tree with three degree-3 nodes.
    pub fn shape(&self) -> Result<u8> {
        let mut degs: Vec<usize> = (0..self.vertices.len()).map(|v| self.degree(v)).collect();
        degs.sort_unstable();
        let shape = match (self.vertices.len(), degs.as_slice()) {
            (1, [0]) => 1,
            (2, [1, 1]) => 2,
            (4, [1, 1, 1, 3]) => 3,
            (6, [1, 1, 1, 1, 3, 3]) => 4,
            (8, [1, 1, 1, 1, 1, 3, 3, 3]) => 5,
            _ => {
                return Err(Error::DegenerateCurve(format!(
                    "isogeny graph shape not recognized: {} vertices, degrees {:?}",
                    self.vertices.len(),
                    degs
                )))
            }
        };
        Ok(shape)
    }

    /// Is `v` the central vertex of the 8-vertex shape (adjacent to two
    /// other degree-3 vertices)?
    pub fn is_central(&self, v: usize) -> bool {
        let deg3_neighbors = self
            .edges
            .iter()
            .filter(|(a, b, _)| *a == v || *b == v)
            .map(|(a, b, _)| if *a == v { *b } else { *a })
            .filter(|&w| self.degree(w) == 3)
            .count();
        self.degree(v) == 3 && deg3_neighbors >= 2
    }
}

/// Breadth-first closure under 2-isogenies with vertex identification by
/// canonical model. More than 8 vertices signals an identification bug.
pub fn build_isogeny_graph(e: &CurveModel) -> Result<IsogenyGraph> {
    let start_key = e.canonical_key()?;
    let mut index: BTreeMap<CurveModel, usize> = BTreeMap::new();
    let mut vertices = vec![start_key];
    index.insert(start_key, 0);
    let mut edges: Vec<(usize, usize, bool)> = Vec::new();
    let mut queue = vec![0usize];
    while let Some(v) = queue.pop() {
        let model = vertices[v];
        for iso in enumerate_two_isogenies(&model)? {
            let tkey = iso.target.canonical_key()?;
            let w = match index.get(&tkey) {
                Some(&w) => w,
                None => {
                    let w = vertices.len();
                    vertices.push(tkey);
                    index.insert(tkey, w);
                    if vertices.len() > 8 {
                        return Err(Error::DegenerateCurve(
                            "isogeny graph exceeded 8 vertices".into(),
                        ));
                    }
                    queue.push(w);
                    w
                }
            };
            let key = (v.min(w), v.max(w));
            if let Some(existing) = edges
                .iter()
                .find(|(a, b, _)| (*a, *b) == key)
            {
                debug_assert_eq!(existing.2, iso.balanced, "dual balance mismatch");
            } else {
                edges.push((key.0, key.1, iso.balanced));
            }
        }
    }
    Ok(IsogenyGraph {
        vertices,
        edges,
        start: 0,
    })
}

/// Classification record for reports: case, balanced kernels, graph shape,
/// and the flag for the 2-vertex balanced situation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Classification {
    pub model: CurveModel,
    pub case: String,
    pub balanced_isogenies: Vec<TwoIsogeny>,
    pub graph_shape: u8,
    pub graph_vertices: usize,
    /// Set when the curve is in the single-balanced case without full
    /// 2-torsion, so its graph is the 2-vertex path rather than a
    /// degree-3 configuration.
    pub two_vertex_balanced: bool,
}

pub fn classify(e: &CurveModel) -> Result<Classification> {
    let case = classify_case(e)?;
    let graph = build_isogeny_graph(e)?;
    let shape = graph.shape()?;
    let two_vertex_balanced = matches!(&case, CaseLabel::IV { .. }) && shape == 2;
    Ok(Classification {
        model: *e,
        case: case.name().to_string(),
        balanced_isogenies: case.balanced_isogenies().into_iter().copied().collect(),
        graph_shape: shape,
        graph_vertices: graph.vertices.len(),
        two_vertex_balanced,
    })
}
