//! Small-integer number theory shared by the carriers and the residue models.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let g = (a as i128).extended_gcd(&(m as i128));
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(m as i128) as u64)
}

/// `p^n` if it fits in a `u64`.
pub fn checked_pow(p: u64, n: u32) -> Option<u64> {
    p.checked_pow(n)
}

/// Exponent of `p` in `n` (`n > 0`).
pub fn valuation_u64(mut n: u64, p: u64) -> u32 {
    debug_assert!(n > 0);
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

/// Exponent of `p` in a nonzero big integer, together with the cofactor.
pub fn split_valuation(n: &BigInt, p: u64) -> (i64, BigInt) {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut m = n.clone();
    let mut v = 0i64;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            break;
        }
        m = q;
        v += 1;
    }
    (v, m)
}

pub fn big_pow(p: u64, n: u32) -> BigUint {
    num_traits::pow(BigUint::from(p), n as usize)
}

/// Inverse of `a` modulo `m` for big integers (`a` may be negative).
pub fn big_inv_mod(a: &BigInt, m: &BigUint) -> Option<BigUint> {
    let mi = BigInt::from(m.clone());
    let g = a.mod_floor(&mi).extended_gcd(&mi);
    if !g.gcd.is_one() {
        return None;
    }
    let x = g.x.mod_floor(&mi);
    debug_assert!(!x.is_negative());
    x.to_biguint()
}

/// Reduces a big integer into `[0, m)`.
pub fn big_mod(a: &BigInt, m: &BigUint) -> BigUint {
    let mi = BigInt::from(m.clone());
    a.mod_floor(&mi)
        .to_biguint()
        .expect("mod_floor is nonnegative")
}

/// Smallest primitive root modulo an odd prime `p` (1 for `p = 2`).
pub fn smallest_primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let order = p - 1;
    let factors = prime_factors(order);
    (2..p)
        .find(|&g| factors.iter().all(|&q| pow_mod(g, order / q, p) != 1))
        .expect("every prime has a primitive root")
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Legendre-style quadratic residue test for a unit residue modulo an odd prime.
pub fn is_qr_mod_prime(a: u64, p: u64) -> bool {
    pow_mod(a % p, (p - 1) / 2, p) == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality() {
        let primes: Vec<u64> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
    }

    #[test]
    fn inverses() {
        assert_eq!(inv_mod(3, 49), Some(33));
        assert_eq!(inv_mod(3, 9), None);
        assert_eq!(
            big_inv_mod(&BigInt::from(-1), &BigUint::from(7u32)),
            Some(BigUint::from(6u32))
        );
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(smallest_primitive_root(3), 2);
        assert_eq!(smallest_primitive_root(5), 2);
        assert_eq!(smallest_primitive_root(7), 3);
        assert_eq!(smallest_primitive_root(23), 5);
    }
}
