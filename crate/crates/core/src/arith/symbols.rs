//! Legendre and Hilbert symbols, and local squareness tests.

use super::local::Place;
use super::square_class::SquareClass;

fn powmod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * a as u128 % m as u128) as u64;
        }
        a = (a as u128 * a as u128 % m as u128) as u64;
        e >>= 1;
    }
    acc
}

/// Legendre symbol `(a/p)` for an odd prime `p`. Returns 0 when `p | a`.
pub fn legendre(a: i64, p: u64) -> i32 {
    debug_assert!(p % 2 == 1 && p > 2);
    let a = a.rem_euclid(p as i64) as u64;
    if a == 0 {
        return 0;
    }
    let s = powmod(a, (p - 1) / 2, p);
    if s == 1 {
        1
    } else {
        -1
    }
}

fn split_val(mut n: i64, p: u64) -> (u32, i64) {
    debug_assert!(n != 0);
    let mut v = 0;
    while n % p as i64 == 0 {
        n /= p as i64;
        v += 1;
    }
    (v, n)
}

/// Hilbert symbol `(a, b)_v` for nonzero integers.
///
/// Only the square classes of `a` and `b` matter, so rationals reduce to
/// this case by clearing denominators with squares.
pub fn hilbert_symbol(a: i64, b: i64, v: Place) -> i32 {
    assert!(a != 0 && b != 0, "hilbert symbol needs nonzero arguments");
    match v {
        Place::Infinity => {
            if a < 0 && b < 0 {
                -1
            } else {
                1
            }
        }
        Place::Odd(p) => {
            let (alpha, u) = split_val(a, p);
            let (beta, w) = split_val(b, p);
            let mut s = 1i32;
            if alpha % 2 == 1 && beta % 2 == 1 && (p % 4) == 3 {
                s = -s;
            }
            if beta % 2 == 1 {
                s *= legendre(u, p);
            }
            if alpha % 2 == 1 {
                s *= legendre(w, p);
            }
            s
        }
        Place::Two => {
            let (alpha, u) = split_val(a, 2);
            let (beta, w) = split_val(b, 2);
            let eps = |t: i64| (t.rem_euclid(4) == 3) as u32;
            let omega = |t: i64| {
                let r = t.rem_euclid(8);
                (r == 3 || r == 5) as u32
            };
            let e = eps(u) * eps(w) + alpha % 2 * omega(w) + beta % 2 * omega(u);
            if e % 2 == 0 {
                1
            } else {
                -1
            }
        }
    }
}

/// Is the representative of `c` a square in `Q_v`?
pub fn is_local_square(c: &SquareClass, v: Place) -> bool {
    match v {
        Place::Infinity => !c.is_negative(),
        Place::Odd(p) => {
            if c.contains_prime(p) {
                return false;
            }
            legendre(c.representative_mod(p) as i64, p) == 1
        }
        Place::Two => {
            if c.contains_prime(2) {
                return false;
            }
            c.representative_mod(8) == 1
        }
    }
}
