//! Square classes of `Q^x / (Q^x)^2`, canonicalized as a sign together with
//! a finite set of distinct primes. The representative is `sign * prod p`,
//! which is always squarefree; the group law is symmetric difference.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::factor::factor;

/// An element of `Q^x / (Q^x)^2`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SquareClass {
    negative: bool,
    primes: BTreeSet<u64>,
}

impl SquareClass {
    /// The trivial class (representative `+1`).
    pub fn one() -> Self {
        SquareClass {
            negative: false,
            primes: BTreeSet::new(),
        }
    }

    /// The class of `-1`.
    pub fn minus_one() -> Self {
        SquareClass {
            negative: true,
            primes: BTreeSet::new(),
        }
    }

    /// Builds a class from explicit parts. Callers must pass distinct primes.
    pub fn from_parts(negative: bool, primes: impl IntoIterator<Item = u64>) -> Self {
        SquareClass {
            negative,
            primes: primes.into_iter().collect(),
        }
    }

    /// The class of a nonzero integer.
    pub fn from_integer(n: i64) -> Result<Self> {
        let f = factor(n)?;
        Ok(SquareClass {
            negative: n < 0,
            primes: f.odd_exponent_primes().collect(),
        })
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn is_trivial(&self) -> bool {
        !self.negative && self.primes.is_empty()
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes.iter().copied()
    }

    pub fn contains_prime(&self, p: u64) -> bool {
        self.primes.contains(&p)
    }

    /// Squarefree representative. Errors on 64-bit overflow.
    pub fn representative(&self) -> Result<i64> {
        let mut acc: i64 = if self.negative { -1 } else { 1 };
        for &p in &self.primes {
            acc = acc
                .checked_mul(i64::try_from(p).map_err(|_| Error::Overflow("representative"))?)
                .ok_or(Error::Overflow("representative"))?;
        }
        Ok(acc)
    }

    /// Squarefree representative with 128-bit headroom.
    pub fn representative_i128(&self) -> i128 {
        let mut acc: i128 = if self.negative { -1 } else { 1 };
        for &p in &self.primes {
            acc *= p as i128;
        }
        acc
    }

    /// Squarefree representative as a big integer (never overflows).
    pub fn representative_big(&self) -> num::BigInt {
        let mut acc = num::BigInt::from(if self.negative { -1i64 } else { 1 });
        for &p in &self.primes {
            acc *= p;
        }
        acc
    }

    /// Group law: product of classes modulo squares.
    pub fn mul(&self, other: &SquareClass) -> SquareClass {
        SquareClass {
            negative: self.negative ^ other.negative,
            primes: self
                .primes
                .symmetric_difference(&other.primes)
                .copied()
                .collect(),
        }
    }

    /// Representative reduced into `(Z/m)^x` for odd m coprime to the class.
    pub fn representative_mod(&self, m: u64) -> u64 {
        let mut acc: u64 = if self.negative { m - 1 } else { 1 };
        for &p in &self.primes {
            acc = (acc as u128 * (p % m) as u128 % m as u128) as u64;
        }
        acc
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.representative() {
            Ok(r) => write!(f, "{r}"),
            Err(_) => {
                write!(f, "{}", if self.negative { "-" } else { "+" })?;
                for (i, p) in self.primes.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
        }
    }
}

/// The unique squarefree integer equal to `n` modulo squares.
pub fn squarefree_kernel(n: i64) -> Result<SquareClass> {
    SquareClass::from_integer(n)
}
