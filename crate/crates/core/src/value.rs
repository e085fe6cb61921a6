//! Exact rational critical values.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Value = BigRational;

pub fn ratio(numer: i64, denom: i64) -> Value {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(v: i64) -> Value {
    BigRational::from_integer(BigInt::from(v))
}

/// Strictly inside the open unit interval.
pub fn in_open_unit(v: &Value) -> bool {
    v.is_positive() && *v < Value::one()
}

pub fn midpoint(a: &Value, b: &Value) -> Value {
    (a + b) / int(2)
}

/// Canonical text form `p/q`, lowest terms, positive denominator. Integers
/// are written with an explicit `/1`.
pub fn format(v: &Value) -> String {
    format!("{}/{}", v.numer(), v.denom())
}

/// Parses the canonical `p/q` form. Non-canonical spellings (`2/4`, `3`,
/// `1/-2`, leading `+`) are rejected so that parse and format are inverse.
pub fn parse(s: &str) -> Option<Value> {
    let (p, q) = s.split_once('/')?;
    if !is_decimal(p, true) || !is_decimal(q, false) {
        return None;
    }
    let p: BigInt = p.parse().ok()?;
    let q: BigInt = q.parse().ok()?;
    if q.is_zero() {
        return None;
    }
    let v = BigRational::new(p.clone(), q.clone());
    (v.numer() == &p && v.denom() == &q).then_some(v)
}

fn is_decimal(s: &str, allow_minus: bool) -> bool {
    let digits = match s.strip_prefix('-') {
        Some(rest) if allow_minus => rest,
        _ => s,
    };
    !digits.is_empty()
        && digits.bytes().all(|b| b.is_ascii_digit())
        && (digits == "0" || !digits.starts_with('0'))
}
