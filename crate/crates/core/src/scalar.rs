//! Scalar abstraction shared by the solvers.
//!
//! Everything that only needs field operations (fans, trees, absorbing linear
//! solves, strategy formulas, stopping-time analysis) is written against
//! [`Scalar`], so the same code runs in `f32`, `f64` or exact [`Rational`]
//! arithmetic. Routines that are inherently approximate (power iteration,
//! sampling) check [`Scalar::EXACT`] and refuse exact types.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational used by the exact mode.
pub type Rational = BigRational;

pub trait Scalar: Clone + Debug + Display + PartialOrd + Num + Signed + Send + Sync + 'static {
    /// `true` when arithmetic is exact, so tolerances collapse to zero.
    const EXACT: bool;

    fn from_rational(value: &Rational) -> Self;

    fn from_f64(value: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn from_usize(n: usize) -> Self;

    /// A comparison tolerance: `tol` for floating types, zero for exact ones.
    fn tolerance(tol: f64) -> Self {
        if Self::EXACT {
            Self::zero()
        } else {
            Self::from_f64(tol)
        }
    }

    fn half() -> Self {
        Self::one() / Self::from_usize(2)
    }

    fn recip(&self) -> Self {
        Self::one() / self.clone()
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_rational(value: &Rational) -> Self {
                ToPrimitive::to_f64(value).unwrap_or(f64::NAN) as $t
            }

            fn from_f64(value: f64) -> Self {
                value as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn from_usize(n: usize) -> Self {
                n as $t
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(value: &Rational) -> Self {
        value.clone()
    }

    fn from_f64(value: f64) -> Self {
        <Rational as FromPrimitive>::from_f64(value).unwrap_or_else(Rational::zero)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_usize(n: usize) -> Self {
        Rational::from_integer(BigInt::from(n))
    }
}

/// Parses a decimal literal such as `2.5`, `-1e-3` or `7` into the exact
/// rational it denotes. Returns `None` for anything else.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(pos) => (&digits[..pos], &digits[pos + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::parse_bytes(all_digits.as_bytes(), 10)?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Formats a rational as `p/q`, or `p` when the denominator is one.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Parses `p/q` or a decimal literal.
pub fn parse_rational(text: &str) -> Option<Rational> {
    match text.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::parse_bytes(p.trim().as_bytes(), 10)?;
            let q = BigInt::parse_bytes(q.trim().as_bytes(), 10)?;
            if q.is_zero() {
                None
            } else {
                Some(Rational::new(p, q))
            }
        }
        None => parse_decimal(text),
    }
}

/// Rounds to `digits` significant digits and prints the shortest form.
pub fn format_significant(value: f64, digits: usize) -> String {
    if !value.is_finite() || value == 0.0 {
        return format!("{value}");
    }
    let rounded: f64 = format!("{:.*e}", digits.saturating_sub(1), value)
        .parse()
        .unwrap_or(value);
    format!("{rounded}")
}

/// JSON form of a scalar: a number for floating types, a `p/q` string for
/// exact ones so no precision is lost.
pub fn scalar_to_json<S: Scalar>(value: &S) -> serde_json::Value {
    if S::EXACT {
        serde_json::Value::String(value.to_string())
    } else {
        serde_json::Number::from_f64(value.to_f64()).map_or(serde_json::Value::Null, serde_json::Value::Number)
    }
}

/// Inverse of [`scalar_to_json`]; accepts numbers and `p/q` or decimal strings.
pub fn scalar_from_json<S: Scalar>(value: &serde_json::Value) -> Option<S> {
    match value {
        serde_json::Value::Number(n) => {
            if S::EXACT {
                parse_decimal(&n.to_string()).map(|q| S::from_rational(&q))
            } else {
                n.as_f64().map(S::from_f64)
            }
        }
        serde_json::Value::String(s) => parse_rational(s).map(|q| S::from_rational(&q)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(p), BigInt::from(d))
    }

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(parse_decimal("2.5"), Some(q(5, 2)));
        assert_eq!(parse_decimal("-0.125"), Some(q(-1, 8)));
        assert_eq!(parse_decimal("7"), Some(q(7, 1)));
        assert_eq!(parse_decimal("1e-3"), Some(q(1, 1000)));
        assert_eq!(parse_decimal("1.5E2"), Some(q(150, 1)));
        assert_eq!(parse_decimal("abc"), None);
        assert_eq!(parse_decimal("."), None);
    }

    #[test]
    fn rational_text_round_trip() {
        let v = q(8, 3);
        assert_eq!(format_rational(&v), "8/3");
        assert_eq!(parse_rational("8/3"), Some(v));
        assert_eq!(parse_rational("4/0"), None);
        assert_eq!(format_rational(&q(6, 3)), "2");
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(0.5, 12), "0.5");
        assert_eq!(format_significant(2.0 / 3.0, 12), "0.666666666667");
        assert_eq!(format_significant(8.0 / 3.0, 12), "2.66666666667");
    }

    #[test]
    fn json_scalars_round_trip() {
        let v = q(8, 3);
        assert_eq!(scalar_to_json(&v), serde_json::json!("8/3"));
        assert_eq!(scalar_from_json::<Rational>(&scalar_to_json(&v)), Some(v));
        let x = 2.0f64 / 3.0;
        assert_eq!(scalar_from_json::<f64>(&scalar_to_json(&x)), Some(x));
        assert_eq!(scalar_from_json::<Rational>(&serde_json::json!(0.25)), Some(q(1, 4)));
    }

    #[test]
    fn tolerances_vanish_for_exact_types() {
        assert!(Rational::tolerance(1e-9).is_zero());
        assert_eq!(f64::tolerance(1e-9), 1e-9);
    }
}
