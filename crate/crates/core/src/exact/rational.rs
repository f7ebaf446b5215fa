use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive denominator.
pub type Rational = num_rational::BigRational;

pub fn rational_from_i64(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p`, `-p` or `p/q`. Anything else (decimals, symbols) is rejected.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::InvalidSpec(format!("`{text}` is not an exact rational of the form p or p/q"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let valid = |s: &str, signed: bool| {
        let digits = if signed { s.strip_prefix('-').or_else(|| s.strip_prefix('+')).unwrap_or(s) } else { s };
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid(num, true) || !valid(den, false) {
        return Err(bad());
    }
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::InvalidSpec(format!("`{text}` has a zero denominator")));
    }
    Ok(Rational::new(num, den))
}

/// Numerator and (positive) denominator as decimal integer strings.
pub fn rational_parts(q: &Rational) -> (String, String) {
    (q.numer().to_string(), q.denom().to_string())
}

/// Serializes as `"p"` or `"p/q"`.
pub fn serialize_rational<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

pub fn serialize_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|q| q.to_string()))
}

/// Generalized binomial coefficient `binom(top, k)` for any integer `top`.
pub fn binomial(top: i64, k: u32) -> Rational {
    let mut acc = BigInt::one();
    let mut fact = BigInt::one();
    for i in 0..k as i64 {
        acc *= BigInt::from(top - i);
        fact *= BigInt::from(i + 1);
    }
    Rational::new(acc, fact)
}

/// `Some(n)` when `q` is a nonnegative integer.
pub(crate) fn is_integer_nonneg(q: &Rational) -> Option<usize> {
    if q.is_integer() && !q.is_negative() {
        q.to_integer().try_into().ok()
    } else {
        None
    }
}
