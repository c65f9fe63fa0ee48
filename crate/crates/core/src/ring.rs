//! Arithmetic in the finite quotients `Z/p^r` of the p-adic integers.
//!
//! Residues are stored as canonical `u64` values in `[0, p^r)`. Products go
//! through `u128`, so every level with `p^r <= 2^62` is exact.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest admissible modulus `p^r`.
pub const MAX_MODULUS: u64 = 1 << 62;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("characteristic 2 is not supported")]
    EvenPrime,
    #[error("level must be at least 1")]
    ZeroLevel,
    #[error("modulus {p}^{r} exceeds 2^62")]
    TooLarge { p: u64, r: u32 },
    #[error("cannot reduce from level {from} to level {to}")]
    BadReduction { from: u32, to: u32 },
    #[error("extra precision {extra} is below v_p({k}!) = {needed}")]
    PrecisionTooLow { k: u64, extra: u32, needed: u32 },
    #[error("{numerator} is not divisible by {k}!")]
    NotDivisible { numerator: i128, k: u64 },
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// `v_p(k!)` by Legendre's formula.
pub fn factorial_valuation(p: u64, k: u64) -> u32 {
    let mut v = 0u32;
    let mut pk = p;
    while pk <= k {
        v += (k / pk) as u32;
        match pk.checked_mul(p) {
            Some(next) => pk = next,
            None => break,
        }
    }
    v
}

/// The ring `Z/p^r` with odd prime `p` and level `r >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RingHeader", into = "RingHeader")]
pub struct LocalRing {
    p: u64,
    r: u32,
    modulus: u64,
}

/// Wire form `{p, r}` of a ring.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RingHeader {
    pub p: u64,
    pub r: u32,
}

impl TryFrom<RingHeader> for LocalRing {
    type Error = RingError;
    fn try_from(h: RingHeader) -> Result<Self, RingError> {
        LocalRing::new(h.p, h.r)
    }
}

impl From<LocalRing> for RingHeader {
    fn from(ring: LocalRing) -> Self {
        RingHeader { p: ring.p, r: ring.r }
    }
}

impl LocalRing {
    pub fn new(p: u64, r: u32) -> Result<Self, RingError> {
        if p == 2 {
            return Err(RingError::EvenPrime);
        }
        if !is_prime(p) {
            return Err(RingError::NotPrime(p));
        }
        if r == 0 {
            return Err(RingError::ZeroLevel);
        }
        let mut modulus = 1u64;
        for _ in 0..r {
            modulus = modulus
                .checked_mul(p)
                .filter(|&m| m <= MAX_MODULUS)
                .ok_or(RingError::TooLarge { p, r })?;
        }
        Ok(LocalRing { p, r, modulus })
    }

    /// The residue field `F_p`.
    pub fn residue_field(&self) -> LocalRing {
        LocalRing { p: self.p, r: 1, modulus: self.p }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.r
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn at_level(&self, r: u32) -> Result<LocalRing, RingError> {
        LocalRing::new(self.p, r)
    }

    /// Same prime, `extra` more levels of precision.
    pub fn lifted(&self, extra: u32) -> Result<LocalRing, RingError> {
        LocalRing::new(self.p, self.r + extra)
    }

    pub fn elem(&self, value: i128) -> RingElem {
        RingElem { value: self.from_int(value), ring: *self }
    }

    #[inline]
    pub fn from_int(&self, value: i128) -> u64 {
        value.rem_euclid(self.modulus as i128) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.modulus;
        base %= self.modulus;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// `p^k` reduced into the ring (zero once `k >= r`).
    pub fn p_power(&self, k: u32) -> u64 {
        if k >= self.r {
            0
        } else {
            self.p.pow(k)
        }
    }

    /// Largest `k` with `p^k | a`; the zero residue has valuation `r`.
    #[inline]
    pub fn valuation(&self, mut a: u64) -> u32 {
        if a == 0 {
            return self.r;
        }
        let mut v = 0;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            v += 1;
        }
        v
    }

    #[inline]
    pub fn is_unit(&self, a: u64) -> bool {
        !a.is_multiple_of(self.p)
    }

    /// Inverse of a unit, `None` for non-units.
    pub fn inverse(&self, a: u64) -> Option<u64> {
        if !self.is_unit(a) {
            return None;
        }
        let (mut old_r, mut r) = (a as i128, self.modulus as i128);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let quot = old_r / r;
            (old_r, r) = (r, old_r - quot * r);
            (old_s, s) = (s, old_s - quot * s);
        }
        debug_assert_eq!(old_r, 1);
        Some(self.from_int(old_s))
    }

    /// Canonical residue modulo `p^to` of a residue at this level.
    pub fn reduce_value(&self, a: u64, to: u32) -> Result<u64, RingError> {
        if to > self.r || to == 0 {
            return Err(RingError::BadReduction { from: self.r, to });
        }
        Ok(a % self.p.pow(to))
    }

    /// Divides `a` by `p^k`, which must divide it; the quotient is only
    /// determined modulo `p^(r-k)` and is returned as that canonical residue.
    pub fn div_p_power(&self, a: u64, k: u32) -> Option<u64> {
        let pk = self.p.checked_pow(k)?;
        if !a.is_multiple_of(pk) {
            return None;
        }
        Some(a / pk)
    }

    /// Splits `k!` as `p^v * u` with `u` a unit; returns `(v, u mod p^r)`.
    pub fn factorial_split(&self, k: u64) -> (u32, u64) {
        let mut v = 0u32;
        let mut unit = 1 % self.modulus;
        for mut j in 2..=k {
            while j % self.p == 0 {
                j /= self.p;
                v += 1;
            }
            unit = self.mul(unit, j % self.modulus);
        }
        (v, unit)
    }
}

/// An element of `Z/p^r` together with its ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RingElem {
    value: u64,
    ring: LocalRing,
}

impl RingElem {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn ring(&self) -> LocalRing {
        self.ring
    }

    /// Reduction to level `to <= r`.
    pub fn reduce(&self, to: u32) -> Result<RingElem, RingError> {
        let value = self.ring.reduce_value(self.value, to)?;
        Ok(RingElem { value, ring: self.ring.at_level(to)? })
    }

    pub fn valuation(&self) -> u32 {
        self.ring.valuation(self.value)
    }

    pub fn inverse(&self) -> Option<RingElem> {
        self.ring
            .inverse(self.value)
            .map(|value| RingElem { value, ring: self.ring })
    }

    /// Valuation and, for units, the inverse.
    pub fn valuation_and_inverse(&self) -> (u32, Option<RingElem>) {
        (self.valuation(), self.inverse())
    }

    pub fn add(&self, other: &RingElem) -> RingElem {
        RingElem { value: self.ring.add(self.value, other.value), ring: self.ring }
    }

    pub fn mul(&self, other: &RingElem) -> RingElem {
        RingElem { value: self.ring.mul(self.value, other.value), ring: self.ring }
    }
}

/// Divides an integer `numerator` (a lift carried at precision `r + extra`)
/// by `k!` and reduces the quotient into `ring`.
///
/// The quotient modulo `p^r` does not depend on the lift as long as
/// `extra >= v_p(k!)`; both that bound and integrality of the division are
/// checked.
pub fn exact_divide_lifted(
    numerator: i128,
    k: u64,
    ring: &LocalRing,
    extra: u32,
) -> Result<RingElem, RingError> {
    let needed = factorial_valuation(ring.p(), k);
    if extra < needed {
        return Err(RingError::PrecisionTooLow { k, extra, needed });
    }
    let mut fact: i128 = 1;
    for j in 2..=k as i128 {
        fact = fact
            .checked_mul(j)
            .ok_or(RingError::NotDivisible { numerator, k })?;
    }
    if numerator % fact != 0 {
        return Err(RingError::NotDivisible { numerator, k });
    }
    Ok(ring.elem(numerator / fact))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64, r: u32) -> LocalRing {
        LocalRing::new(p, r).unwrap()
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(ring(5, 2).elem(17).reduce(1).unwrap().value(), 2);
        assert_eq!(ring(5, 3).elem(0).reduce(2).unwrap().value(), 0);
        assert_eq!(ring(5, 3).elem(117).reduce(2).unwrap().value(), 17);
        assert!(ring(5, 2).elem(3).reduce(3).is_err());
    }

    #[test]
    fn valuation_and_inverse_examples() {
        let r = ring(5, 2);
        assert_eq!(r.elem(10).valuation_and_inverse(), (1, None));
        let (v, inv) = r.elem(7).valuation_and_inverse();
        assert_eq!(v, 0);
        assert_eq!(inv.unwrap().value(), 18);
        assert_eq!(r.elem(0).valuation_and_inverse(), (2, None));
    }

    #[test]
    fn rejects_bad_rings() {
        assert_eq!(LocalRing::new(2, 3), Err(RingError::EvenPrime));
        assert_eq!(LocalRing::new(9, 1), Err(RingError::NotPrime(9)));
        assert_eq!(LocalRing::new(5, 0), Err(RingError::ZeroLevel));
        assert!(matches!(LocalRing::new(5, 40), Err(RingError::TooLarge { .. })));
        assert!(LocalRing::new(3, 39).is_ok());
    }

    #[test]
    fn exact_division_examples() {
        let r = ring(5, 2);
        assert_eq!(exact_divide_lifted(50, 2, &r, 1).unwrap().value(), 0);
        assert!(matches!(
            exact_divide_lifted(250, 5, &r, 1),
            Err(RingError::NotDivisible { .. })
        ));
        assert_eq!(exact_divide_lifted(3000, 5, &r, 1).unwrap().value(), 0);
        assert!(matches!(
            exact_divide_lifted(3000, 5, &r, 0),
            Err(RingError::PrecisionTooLow { needed: 1, .. })
        ));
    }

    #[test]
    fn exhaustive_laws_p5() {
        for r in 1..=3u32 {
            let big = ring(5, r);
            for x in 0..big.modulus() {
                let e = RingElem { value: x, ring: big };
                for r2 in 1..=r {
                    for r1 in 1..=r2 {
                        let two_step = e.reduce(r2).unwrap().reduce(r1).unwrap();
                        assert_eq!(two_step, e.reduce(r1).unwrap());
                    }
                }
                if let Some(inv) = e.inverse() {
                    assert_eq!(e.mul(&inv).value(), 1);
                } else {
                    assert!(e.valuation() >= 1);
                }
                for y in 0..big.modulus() {
                    let f = RingElem { value: y, ring: big };
                    let expect = (e.valuation() + f.valuation()).min(r);
                    assert_eq!(e.mul(&f).valuation(), expect);
                }
            }
        }
    }

    #[test]
    fn factorial_valuations() {
        assert_eq!(factorial_valuation(5, 4), 0);
        assert_eq!(factorial_valuation(5, 5), 1);
        assert_eq!(factorial_valuation(5, 25), 6);
        assert_eq!(factorial_valuation(3, 9), 4);
        let r = ring(5, 3);
        let (v, u) = r.factorial_split(10);
        assert_eq!(v, 2);
        assert_eq!(r.mul(u, 25), 3628800 % 125);
    }

    proptest::proptest! {
        #[test]
        fn division_is_independent_of_lift(q in 0i128..1000, k in 0u64..8, shift in -5i128..5) {
            let r = ring(5, 2);
            let extra = factorial_valuation(5, k);
            let fact: i128 = (1..=k as i128).product();
            let lift_mod = 5i128.pow(2 + extra) * fact;
            let n1 = q * fact;
            let n2 = n1 + shift * lift_mod;
            let a = exact_divide_lifted(n1, k, &r, extra).unwrap();
            let b = exact_divide_lifted(n2, k, &r, extra).unwrap();
            proptest::prop_assert_eq!(a, b);
        }
    }
}
