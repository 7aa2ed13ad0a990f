//! Arbitrary-precision rationals and the string format used in state files.
//!
//! `Rat` is a reduced big-rational: gcd(|num|, den) = 1 with den > 0, zero
//! stored as 0/1. External files carry rationals as strings `"p"` or `"p/q"`
//! so no precision is lost on the way in or out.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

/// Shorthand for small rational constants.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Shorthand for small integer constants.
pub fn rat_int(value: i64) -> Rat {
    Rat::from_integer(BigInt::from(value))
}

/// Parses the state-file grammar: optional sign, digits, optional `/digits`
/// with a nonzero denominator. The sign may only appear on the numerator.
pub fn parse_rat(text: &str) -> Result<Rat, String> {
    let (num_str, den_str) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let (sign, digits) = match num_str.strip_prefix('-') {
        Some(rest) => (Sign::Minus, rest),
        None => (Sign::Plus, num_str.strip_prefix('+').unwrap_or(num_str)),
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("invalid rational {text:?}: bad numerator"));
    }
    let mut num: BigInt = digits.parse().expect("digits already checked");
    if sign == Sign::Minus {
        num = -num;
    }
    let den: BigInt = match den_str {
        None => BigInt::one(),
        Some(d) => {
            if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
                return Err(format!("invalid rational {text:?}: bad denominator"));
            }
            d.parse().expect("digits already checked")
        }
    };
    if den.is_zero() {
        return Err(format!("invalid rational {text:?}: zero denominator"));
    }
    Ok(Rat::new(num, den))
}

/// Canonical string form: `p` or `p/q`, inverse of [`parse_rat`].
pub fn format_rat(value: &Rat) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Rational to f64, robust to components far outside the f64 range.
///
/// `Ratio::to_f64` divides the converted parts and returns NaN once both
/// overflow; after a few dozen exact evolution steps that is the common case.
pub fn rat_to_f64(value: &Rat) -> f64 {
    if value.is_zero() {
        return 0.0;
    }
    let negative = value.is_negative();
    let num = value.numer().abs();
    let den = value.denom().clone();
    // Scale so the integer quotient keeps ~64 significant bits.
    let shift = den.bits() as i64 + 64 - num.bits() as i64;
    let quotient = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        num / (den << (-shift) as u64)
    };
    let magnitude = quotient.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(-shift as i32);
    if negative {
        -magnitude
    } else {
        magnitude
    }
}
