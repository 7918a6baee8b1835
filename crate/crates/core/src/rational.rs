//! Exact rational helpers.
//!
//! Every probability in the engine is a [`Rational`], an arbitrary-precision
//! fraction kept in lowest terms with a positive denominator.

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

pub type Rational = BigRational;

/// Builds `num/den` from machine integers. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Why a probability literal failed to parse.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RationalParseError {
    #[error("empty probability literal")]
    Empty,
    #[error("`{0}` is not an integer, fraction or decimal")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

fn digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

/// Parses `INT`, `INT/INT` or `DECIMAL` into an exact rational.
///
/// Decimals are converted exactly: `0.25` becomes `1/4`. Signs are rejected
/// since every literal in a tree document is a probability.
pub fn parse_rational(text: &str) -> Result<Rational, RationalParseError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(RationalParseError::Empty);
    }
    let malformed = || RationalParseError::Malformed(s.to_string());
    if let Some((num, den)) = s.split_once('/') {
        let (num, den) = (num.trim(), den.trim());
        if !digits(num) || !digits(den) {
            return Err(malformed());
        }
        let den = BigInt::from_str(den).map_err(|_| malformed())?;
        if den.is_zero() {
            return Err(RationalParseError::ZeroDenominator(s.to_string()));
        }
        let num = BigInt::from_str(num).map_err(|_| malformed())?;
        return Ok(Rational::new(num, den));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if !digits(whole) || !digits(frac) {
            return Err(malformed());
        }
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let num = BigInt::from_str(&format!("{whole}{frac}")).map_err(|_| malformed())?;
        return Ok(Rational::new(num, scale));
    }
    if !digits(s) {
        return Err(malformed());
    }
    Ok(Rational::from_integer(
        BigInt::from_str(s).map_err(|_| malformed())?,
    ))
}

/// Canonical text: `0`, `1`, `3/16`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Display-only decimal rendering, always with a fractional part (`1.0`, `0.375`).
pub fn format_decimal(r: &Rational) -> String {
    format!("{:?}", to_f64(r))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// True when `0 <= r <= 1`.
pub fn is_probability(r: &Rational) -> bool {
    !r.is_negative() && *r <= Rational::one()
}
