//! Factorization of 64-bit integers: trial division through a sieved prime
//! table, Miller–Rabin for primality, Pollard rho (Brent) for what remains.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::{Error, Result};

const TRIAL_BOUND: u64 = 1_000_000;

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_BOUND as usize;
        let mut is_comp = vec![false; n + 1];
        let mut primes = Vec::with_capacity(80_000);
        for p in 2..=n {
            if !is_comp[p] {
                primes.push(p as u32);
                let mut q = p * p;
                while q <= n {
                    is_comp[q] = true;
                    q += p;
                }
            }
        }
        primes
    })
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a, m);
        }
        a = mulmod(a, a, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    // This witness set is exact for all n < 2^64.
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Pollard rho, Brent variant. `n` must be odd, composite, and free of
/// factors below the trial bound.
fn pollard_rho(n: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        let mut q = 1u64;
        let mut r = 1u64;
        let m = 128u64;
        let mut ys = y;
        while d == 1 {
            x = y;
            for _ in 0..r {
                y = (mulmod(y, y, n) + c) % n;
            }
            let mut k = 0u64;
            while k < r && d == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = (mulmod(y, y, n) + c) % n;
                    q = mulmod(q, x.abs_diff(y), n);
                }
                d = gcd(q, n);
                k += m;
            }
            r *= 2;
        }
        if d == n {
            // Backtrack one step at a time.
            loop {
                ys = (mulmod(ys, ys, n) + c) % n;
                d = gcd(x.abs_diff(ys), n);
                if d > 1 {
                    break;
                }
            }
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = b;
        b = a % b;
        a = t;
    }
    a
}

fn factor_u64_into(mut n: u64, out: &mut BTreeMap<u64, u32>) {
    for &p in small_primes() {
        let p = p as u64;
        if p * p > n {
            break;
        }
        while n % p == 0 {
            *out.entry(p).or_insert(0) += 1;
            n /= p;
        }
    }
    if n == 1 {
        return;
    }
    if is_prime(n) {
        *out.entry(n).or_insert(0) += 1;
        return;
    }
    let d = pollard_rho(n);
    factor_u64_into(d, out);
    factor_u64_into(n / d, out);
}

/// A nonzero integer together with its prime factorization.
///
/// Invariant: `sign * prod p^e == value`, and every key is prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factored {
    value: i64,
    factors: BTreeMap<u64, u32>,
}

impl Factored {
    pub fn value(&self) -> i64 {
        self.value
    }

    pub fn sign(&self) -> i64 {
        if self.value < 0 {
            -1
        } else {
            1
        }
    }

    pub fn factors(&self) -> &BTreeMap<u64, u32> {
        &self.factors
    }

    /// Exponent of `p` in the factorization.
    pub fn exponent(&self, p: u64) -> u32 {
        self.factors.get(&p).copied().unwrap_or(0)
    }

    /// Primes with odd exponent, i.e. the support of the square class.
    pub fn odd_exponent_primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors
            .iter()
            .filter(|(_, &e)| e % 2 == 1)
            .map(|(&p, _)| p)
    }
}

/// Factors a nonzero 64-bit integer.
pub fn factor(n: i64) -> Result<Factored> {
    if n == 0 {
        return Err(Error::ZeroInput);
    }
    let mut factors = BTreeMap::new();
    factor_u64_into(n.unsigned_abs(), &mut factors);
    Ok(Factored { value: n, factors })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_has_empty_factorization() {
        let f = factor(1).unwrap();
        assert!(f.factors().is_empty());
        assert_eq!(f.sign(), 1);
    }

    #[test]
    fn negative_composite() {
        let f = factor(-144).unwrap();
        assert_eq!(f.sign(), -1);
        assert_eq!(f.factors(), &BTreeMap::from([(2u64, 4u32), (3, 2)]));
    }

    #[test]
    fn large_prime_stays_prime() {
        // 10^9 + 7 is prime; the primality test is the oracle here.
        let p = 1_000_000_007i64;
        assert!(is_prime(p as u64));
        let f = factor(p).unwrap();
        assert_eq!(f.factors(), &BTreeMap::from([(p as u64, 1u32)]));
    }

    #[test]
    fn zero_rejected() {
        assert!(matches!(factor(0), Err(Error::ZeroInput)));
    }

    #[test]
    fn semiprime_beyond_trial_bound() {
        let p = 1_000_003u64;
        let q = 1_000_033u64;
        assert!(is_prime(p) && is_prime(q));
        let f = factor((p * q) as i64).unwrap();
        assert_eq!(f.factors(), &BTreeMap::from([(p, 1u32), (q, 1)]));
    }

    #[test]
    fn rho_handles_prime_powers() {
        let p = 1_100_009u64;
        assert!(is_prime(p));
        let f = factor((p * p) as i64).unwrap();
        assert_eq!(f.factors(), &BTreeMap::from([(p, 2u32)]));
    }
}
