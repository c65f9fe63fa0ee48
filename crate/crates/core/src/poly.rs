//! Exact polynomials and rational functions in one variable over `Q`, and
//! integer polynomials in `q`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// Polynomial with rational coefficients, lowest degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    coeffs: Vec<BigRational>,
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl Poly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Poly::new(vec![c])
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| rat(c)).collect())
    }

    /// `c t^k`.
    pub fn monomial(c: BigRational, k: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); k + 1];
        coeffs[k] = c;
        Poly::new(coeffs)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// `p(c t)`.
    pub fn substitute_scale(&self, c: &BigRational) -> Poly {
        let mut power = BigRational::one();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            out.push(a * &power);
            power *= c;
        }
        Poly::new(out)
    }

    pub fn eval(&self, t: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * t + c)
    }

    /// Quotient and remainder by a nonzero divisor.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let dd = divisor.degree().expect("nonzero divisor");
        let lead = divisor.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigRational::zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd {
            let k = rem.len() - 1 - dd;
            let c = rem.last().expect("nonempty") / &lead;
            for (j, b) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= &c * b;
            }
            quot[k] = c;
            rem.pop();
            while rem.last().is_some_and(|c| c.is_zero()) && rem.len() > dd {
                rem.pop();
            }
        }
        (Poly::new(quot), Poly::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        match a.coeffs.last() {
            Some(lead) => a.scale(&lead.recip()),
            None => a,
        }
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            let a = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let show_coeff = k == 0 || !a.is_one();
            if show_coeff {
                write!(f, "{a}")?;
            }
            match k {
                0 => {}
                1 => write!(f, "{}t", if show_coeff { "*" } else { "" })?,
                _ => write!(f, "{}t^{k}", if show_coeff { "*" } else { "" })?,
            }
        }
        Ok(())
    }
}

/// Quotient of polynomials, kept reduced with denominator constant term 1
/// whenever that term is nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunc {
    num: Poly,
    den: Poly,
}

impl RationalFunc {
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let g = num.gcd(&den);
        let (mut num, mut den) = if g.degree().unwrap_or(0) > 0 {
            (num.div_rem(&g).0, den.div_rem(&g).0)
        } else {
            (num, den)
        };
        let c0 = den.coeff(0);
        let norm = if c0.is_zero() { den.coeffs.last().expect("nonzero").clone() } else { c0 };
        let inv = norm.recip();
        num = num.scale(&inv);
        den = den.scale(&inv);
        RationalFunc { num, den }
    }

    pub fn from_poly(p: Poly) -> Self {
        RationalFunc { num: p, den: Poly::one() }
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    /// `x / (1 - x)` for the monomial `x = c t^k`.
    pub fn geometric(c: BigRational, k: usize) -> Self {
        let x = Poly::monomial(c, k);
        RationalFunc::new(x.clone(), Poly::one().sub(&x))
    }

    pub fn add(&self, other: &RationalFunc) -> RationalFunc {
        if self.den == other.den {
            return RationalFunc::new(self.num.add(&other.num), self.den.clone());
        }
        RationalFunc::new(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn mul(&self, other: &RationalFunc) -> RationalFunc {
        RationalFunc::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn scale(&self, c: &BigRational) -> RationalFunc {
        RationalFunc::new(self.num.scale(c), self.den.clone())
    }

    /// `f(c t)`.
    pub fn substitute_scale(&self, c: &BigRational) -> RationalFunc {
        RationalFunc::new(self.num.substitute_scale(c), self.den.substitute_scale(c))
    }

    /// `num * other.den - other.num * den`; zero iff the functions agree.
    pub fn cross_difference(&self, other: &RationalFunc) -> Poly {
        self.num.mul(&other.den).sub(&other.num.mul(&self.den))
    }

    pub fn equals(&self, other: &RationalFunc) -> bool {
        self.cross_difference(other).is_zero()
    }

    /// Coefficients of `t^0 .. t^k` of the power series expansion.
    pub fn series(&self, k: usize) -> Vec<BigRational> {
        let d0 = self.den.coeff(0);
        assert!(!d0.is_zero(), "denominator vanishes at t = 0");
        let mut out: Vec<BigRational> = Vec::with_capacity(k + 1);
        for n in 0..=k {
            let mut acc = self.num.coeff(n);
            for j in 1..=n.min(self.den.coeffs.len().saturating_sub(1)) {
                acc -= self.den.coeff(j) * &out[n - j];
            }
            out.push(acc / &d0);
        }
        out
    }
}

impl fmt::Display for RationalFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

/// Polynomial in `q` with integer coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QPoly {
    pub coeffs: Vec<i64>,
}

impl QPoly {
    pub fn new(coeffs: &[i64]) -> Self {
        let mut coeffs = coeffs.to_vec();
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn eval(&self, q: u64) -> BigInt {
        let q = BigInt::from(q);
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, &c| acc * &q + c)
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        let mut out = vec![0i64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::new(&out)
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c < 0 { "-" } else { "+" })?;
            }
            first = false;
            let a = c.abs();
            if a != 1 || k == 0 {
                write!(f, "{a}")?;
            }
            match k {
                0 => {}
                1 => write!(f, "q")?,
                _ => write!(f, "q^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `q^k` as a rational, `k` possibly negative.
pub fn q_power(q: u64, k: i64) -> BigRational {
    let base = BigRational::from_integer(BigInt::from(q));
    if k >= 0 {
        num_traits::pow(base, k as usize)
    } else {
        num_traits::pow(base.recip(), (-k) as usize)
    }
}

/// Numerator and denominator of a rational in lowest terms.
pub fn rational_parts(r: &BigRational) -> (BigInt, BigInt) {
    let g = r.numer().gcd(r.denom());
    (r.numer() / &g, r.denom() / &g)
}
