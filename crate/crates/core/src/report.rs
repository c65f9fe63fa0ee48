//! Provenance tags and JSON encodings of exact numbers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::poly::{rational_parts, Poly, RationalFunc};

/// Where a reported number comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Provenance {
    /// Closed-form polynomial in `q`.
    #[serde(rename = "POLY")]
    Poly,
    /// Exhaustive enumeration.
    #[serde(rename = "ORACLE")]
    Oracle,
    /// Zero certified by a vacant rank class at level 1.
    #[serde(rename = "CERT-ZERO")]
    CertZero,
    /// Seeded Monte Carlo estimate.
    #[serde(rename = "ESTIMATE")]
    Estimate,
    /// Taken from the formula without an independent check.
    #[serde(rename = "FORMULA-ONLY")]
    FormulaOnly,
}

impl Provenance {
    pub fn tag(&self) -> &'static str {
        match self {
            Provenance::Poly => "POLY",
            Provenance::Oracle => "ORACLE",
            Provenance::CertZero => "CERT-ZERO",
            Provenance::Estimate => "ESTIMATE",
            Provenance::FormulaOnly => "FORMULA-ONLY",
        }
    }
}

const SAFE: i128 = 1 << 53;

/// Decimal integer, as a JSON string once it leaves the exactly representable range.
pub fn json_int(v: &BigInt) -> Value {
    match v.to_i128() {
        Some(x) if (-SAFE..=SAFE).contains(&x) => json!(x as i64),
        _ => Value::String(v.to_string()),
    }
}

pub fn json_u128(v: u128) -> Value {
    json_int(&BigInt::from(v))
}

/// `[numerator, denominator]` in lowest terms.
pub fn json_rational(r: &BigRational) -> Value {
    let (n, d) = rational_parts(r);
    json!([json_int(&n), json_int(&d)])
}

pub fn json_poly(p: &Poly) -> Value {
    Value::Array(p.coeffs().iter().map(json_rational).collect())
}

pub fn json_rational_func(f: &RationalFunc) -> Value {
    json!({
        "numerator": json_poly(f.numerator()),
        "denominator": json_poly(f.denominator()),
        "display": f.to_string(),
    })
}

/// A number with its provenance.
pub fn json_cell(v: &BigInt, tag: Provenance) -> Value {
    json!({ "value": json_int(v), "provenance": tag.tag() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn large_integers_become_strings() {
        assert_eq!(json_int(&BigInt::from(390_625)), json!(390_625));
        assert_eq!(json_int(&BigInt::from(1i64 << 53)), json!(1i64 << 53));
        assert_eq!(json_int(&(BigInt::from(1i64 << 53) + 1)), json!("9007199254740993"));
        assert_eq!(json_int(&BigInt::from(5).pow(32)), json!("23283064365386962890625"));
    }

    #[test]
    fn tags_serialize() {
        assert_eq!(serde_json::to_value(Provenance::CertZero).unwrap(), json!("CERT-ZERO"));
        assert_eq!(serde_json::to_value(Provenance::FormulaOnly).unwrap(), json!("FORMULA-ONLY"));
        let r = BigRational::new(BigInt::from(6), BigInt::from(-4));
        assert_eq!(json_rational(&r), json!([-3, 2]));
    }
}
