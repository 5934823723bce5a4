//! Exact rational arithmetic helpers.
//!
//! Every quantity in the library (entropies, sum-rates, truncated values,
//! Shapley rates) is an exact rational. Parsing accepts `"p/q"`, plain
//! integers and finite decimal strings such as `"3.5"`; anything that would
//! need a binary float is rejected.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse {input:?} as an exact rational: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

fn parse_error(input: &str, reason: &'static str) -> ParseRationalError {
    ParseRationalError {
        input: input.to_owned(),
        reason,
    }
}

fn parse_int(s: &str, whole: &str) -> Result<BigInt, ParseRationalError> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(parse_error(whole, "expected decimal digits"));
    }
    s.parse::<BigInt>()
        .map_err(|_| parse_error(whole, "expected decimal digits"))
}

/// Parses `"p/q"`, `"n"` or a finite decimal `"a.b"` into an exact rational.
pub fn parse_rational(input: &str) -> Result<Rational, ParseRationalError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(parse_error(input, "empty string"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_int(num.trim(), input)?;
        let den = parse_int(den.trim(), input)?;
        if den.is_zero() {
            return Err(parse_error(input, "zero denominator"));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.starts_with('-');
        let int_digits = int_part.strip_prefix(['+', '-']).unwrap_or(int_part);
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(parse_error(input, "malformed fractional part"));
        }
        if !int_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(parse_error(input, "malformed integer part"));
        }
        let int_value = if int_digits.is_empty() {
            BigInt::zero()
        } else {
            parse_int(int_digits, input)?
        };
        let frac_value = parse_int(frac_part, input)?;
        let scale = num_traits::pow(BigInt::from(10u8), frac_part.len());
        let magnitude = Rational::new(int_value * &scale + frac_value, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    Ok(Rational::from_integer(parse_int(s, input)?))
}

/// Lowest-terms string form: `"7/2"`, `"4"`, `"-1/3"`.
pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or_else(|| {
        if value.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// `n!` as a big integer.
pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn ceil(value: &Rational) -> Rational {
    value.ceil()
}

pub fn floor(value: &Rational) -> Rational {
    value.floor()
}

pub fn is_integral(value: &Rational) -> bool {
    value.denom().is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_decimal_and_integer() {
        assert_eq!(parse_rational("7/2").unwrap(), ratio(7, 2));
        assert_eq!(parse_rational("3.5").unwrap(), ratio(7, 2));
        assert_eq!(parse_rational("-0.125").unwrap(), ratio(-1, 8));
        assert_eq!(parse_rational("16/5").unwrap(), ratio(16, 5));
        assert_eq!(parse_rational(" 4 ").unwrap(), int(4));
        assert_eq!(parse_rational("6/4").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
    }

    #[test]
    fn rejects_floats_and_garbage() {
        for bad in ["", "1e3", "1/0", "a", "1.", "1.2.3", "--1", "NaN", "1/ 2x"] {
            assert!(parse_rational(bad).is_err(), "{bad:?} should be rejected");
        }
    }

    #[test]
    fn formats_in_lowest_terms() {
        assert_eq!(format_rational(&ratio(14, 4)), "7/2");
        assert_eq!(format_rational(&int(4)), "4");
        assert_eq!(format_rational(&ratio(-2, 6)), "-1/3");
        assert_eq!(format_rational(&int(0)), "0");
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), BigInt::from(1));
        assert_eq!(factorial(5), BigInt::from(120));
    }
}
