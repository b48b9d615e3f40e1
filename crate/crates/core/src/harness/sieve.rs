//! Squarefree sieving and twist-class membership.

use serde::{Deserialize, Serialize};

use crate::arith::legendre;
use crate::curves::CurveModel;
use crate::descent::curve_bad_primes;
use crate::{Error, Result};

/// A twist class: the squarefree integers whose product with `d0` is a
/// local square at infinity, at 2, and at every odd bad prime of the curve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistClassSpec {
    pub d0: i64,
    /// Odd bad primes of the curve.
    pub bad_primes: Vec<u64>,
    negative: bool,
    two_divides: bool,
    odd_part_mod8: i64,
    /// Per odd bad prime: does p divide d0, and the Legendre character of
    /// the unit part of d0.
    odd_conditions: Vec<(u64, bool, i32)>,
}

impl TwistClassSpec {
    pub fn new(e: &CurveModel, d0: i64) -> Result<Self> {
        if d0 == 0 {
            return Err(Error::ZeroInput);
        }
        let c = crate::arith::squarefree_kernel(d0)?;
        let d0 = c.representative()?;
        let bad_primes: Vec<u64> = curve_bad_primes(e)?.into_iter().collect();
        let two_divides = d0 % 2 == 0;
        let odd_part = d0 / if two_divides { 2 } else { 1 };
        let odd_conditions = bad_primes
            .iter()
            .map(|&p| {
                let divides = d0 % p as i64 == 0;
                let unit = if divides { d0 / p as i64 } else { d0 };
                (p, divides, legendre(unit, p))
            })
            .collect();
        Ok(TwistClassSpec {
            d0,
            bad_primes,
            negative: d0 < 0,
            two_divides,
            odd_part_mod8: odd_part.rem_euclid(8),
            odd_conditions,
        })
    }

    /// Membership for a squarefree integer.
    pub fn contains(&self, d: i64) -> bool {
        if d == 0 || (d < 0) != self.negative {
            return false;
        }
        if (d % 2 == 0) != self.two_divides {
            return false;
        }
        let odd_part = d / if self.two_divides { 2 } else { 1 };
        if odd_part.rem_euclid(8) != self.odd_part_mod8 {
            return false;
        }
        for &(p, divides, chi) in &self.odd_conditions {
            if (d % p as i64 == 0) != divides {
                return false;
            }
            let unit = if divides { d / p as i64 } else { d };
            if legendre(unit, p) != chi {
                return false;
            }
        }
        true
    }

    /// A stable key identifying the class of `d` among all classes for the
    /// same curve.
    pub fn class_key(e: &CurveModel, d: i64) -> Result<String> {
        let spec = TwistClassSpec::new(e, d)?;
        let mut key = format!(
            "s{}v{}m{}",
            u8::from(spec.negative),
            u8::from(spec.two_divides),
            spec.odd_part_mod8
        );
        for (p, div, chi) in &spec.odd_conditions {
            key.push_str(&format!("|{p}:{}:{}", u8::from(*div), chi));
        }
        Ok(key)
    }
}

/// Squarefree integers in `[1, h]` by sieving out multiples of squares.
pub fn squarefree_integers(h: i64) -> Vec<i64> {
    let h = h.max(0) as usize;
    let mut keep = vec![true; h + 1];
    let mut p = 2usize;
    while p * p <= h {
        let sq = p * p;
        let mut m = sq;
        while m <= h {
            keep[m] = false;
            m += sq;
        }
        p += 1;
    }
    (1..=h).filter(|&n| keep[n]).map(|n| n as i64).collect()
}

/// The members of the class up to height `h`, both signs screened by the
/// class's own sign condition. Heights are capped at 10^8.
pub fn enumerate_twist_class(spec: &TwistClassSpec, h: i64) -> Result<Vec<i64>> {
    if h > 100_000_000 {
        return Err(Error::Precondition(format!("height {h} exceeds 10^8")));
    }
    let mut out = Vec::new();
    for n in squarefree_integers(h) {
        let d = if spec.negative { -n } else { n };
        if spec.contains(d) {
            out.push(d);
        }
    }
    Ok(out)
}
