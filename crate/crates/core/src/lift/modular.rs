//! Word-size prime field arithmetic and rational reconstruction.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::poly::Rational;

pub(crate) fn mul(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn neg(a: u64, p: u64) -> u64 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

fn pow(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, a, p);
        }
        a = mul(a, a, p);
        e >>= 1;
    }
    acc
}

/// Inverse of a nonzero residue modulo a prime.
pub(crate) fn inv(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow(a, p - 2, p)
}

/// Montgomery arithmetic modulo an odd `p < 2^62`, with `R = 2^64`. Values
/// in Montgomery form are `x R mod p`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Field {
    pub p: u64,
    /// `-p^-1 mod 2^64`
    neg_inv: u64,
    /// `R^2 mod p`
    r2: u64,
}

impl Field {
    pub(crate) fn new(p: u64) -> Self {
        debug_assert!(p % 2 == 1 && p < 1 << 62);
        // Newton iteration for p^-1 mod 2^64
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % p as u128) as u64;
        Self {
            p,
            neg_inv: inv.wrapping_neg(),
            r2: mul(r, r, p),
        }
    }

    #[inline]
    fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.neg_inv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline]
    pub(crate) fn mul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }

    #[inline]
    pub(crate) fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub(crate) fn neg(&self, a: u64) -> u64 {
        neg(a, self.p)
    }

    pub(crate) fn to_mont(self, a: u64) -> u64 {
        self.mul(a, self.r2)
    }

    pub(crate) fn value(self, a: u64) -> u64 {
        self.redc(a as u128)
    }

    /// Inverse of a nonzero value, both in Montgomery form.
    pub(crate) fn inv(&self, a: u64) -> u64 {
        let mut acc = self.to_mont(1);
        let mut base = a;
        let mut e = self.p - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
}

/// Deterministic Miller-Rabin; these bases suffice below 3.3e24.
pub(crate) fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &b in &BASES {
        let mut x = pow(b, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes just below 2^62, largest first.
#[derive(Clone, Debug)]
pub(crate) struct Primes {
    next: u64,
}

impl Primes {
    pub(crate) fn new() -> Self {
        Self { next: (1 << 62) - 1 }
    }
}

impl Iterator for Primes {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        while self.next > 3 {
            let c = self.next;
            self.next -= 2;
            if is_prime(c) {
                return Some(c);
            }
        }
        None
    }
}

pub(crate) fn reduce_int(n: &BigInt, p: u64) -> u64 {
    let r = (n.magnitude() % p).to_u64().expect("residue fits a word");
    if n.sign() == Sign::Minus {
        neg(r, p)
    } else {
        r
    }
}

/// The fraction `n/d` with `|n|, d <= sqrt(m/2)` congruent to `u` modulo `m`,
/// if there is one.
pub(crate) fn reconstruct(u: &BigInt, m: &BigInt) -> Option<Rational> {
    let bound = (m / BigInt::from(2u8)).sqrt();
    let (mut r0, mut r1) = (m.clone(), u.mod_floor(m));
    let (mut s0, mut s1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let s2 = &s0 - &q * &s1;
        r0 = core::mem::replace(&mut r1, r2);
        s0 = core::mem::replace(&mut s1, s2);
    }
    if s1.is_zero() || s1.abs() > bound || !r1.gcd(&s1).is_one() {
        return None;
    }
    if s1.sign() == Sign::Minus {
        r1 = -r1;
        s1 = -s1;
    }
    Some(Rational::new(r1, s1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ratio;
    use alloc::vec::Vec;

    fn reduce_rational(q: &Rational, p: u64) -> Option<u64> {
        let d = reduce_int(q.denom(), p);
        (d != 0).then(|| mul(reduce_int(q.numer(), p), inv(d, p), p))
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
        assert!(is_prime((1 << 61) - 1));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2, 3, 5, 7
        let mut primes = Primes::new();
        let p = primes.next().unwrap();
        assert!(p < 1 << 62 && p > (1 << 62) - 1000);
    }

    #[test]
    fn montgomery_matches_plain_arithmetic() {
        let p = Primes::new().next().unwrap();
        let f = Field::new(p);
        for (a, b) in [(0, 5), (1, 1), (p - 1, p - 1), (123_456_789_123, 987_654_321_987 % p)] {
            let (ma, mb) = (f.to_mont(a), f.to_mont(b));
            assert_eq!(f.value(f.mul(ma, mb)), mul(a, b, p));
            assert_eq!(f.value(f.add(ma, mb)), ((a as u128 + b as u128) % p as u128) as u64);
            if a != 0 {
                assert_eq!(f.value(f.inv(ma)), inv(a, p));
            }
        }
    }

    #[test]
    fn reconstruction_recovers_fractions() {
        let ps: Vec<u64> = Primes::new().take(3).collect();
        let m: BigInt = ps.iter().map(|&p| BigInt::from(p)).product();
        for q in [ratio(1485, 2), ratio(-7, 9), ratio(0, 1), ratio(123_456_789_012, 5)] {
            // q mod m, through the inverse of the denominator
            let d = q.denom().modinv(&m).unwrap();
            let u = (q.numer() * d).mod_floor(&m);
            assert_eq!(reconstruct(&u, &m), Some(q));
        }
    }

    #[test]
    fn reconstruction_fails_when_modulus_is_too_small() {
        let p = Primes::new().next().unwrap();
        let q = Rational::new(BigInt::from(1u8) << 80usize, BigInt::from(3u8));
        let u = reduce_rational(&q, p).unwrap();
        assert_ne!(reconstruct(&BigInt::from(u), &BigInt::from(p)), Some(q));
    }
}
