//! Exact rational timestamps.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseRationalError(pub String);

/// Parses a non-negative decimal (`3.5`) or fraction (`7/2`) literal.
pub fn parse(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let digits = |d: &str| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit());
    if let Some((num, den)) = s.split_once('/') {
        if !digits(num) || !digits(den) {
            return Err(err());
        }
        let den: BigInt = den.parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(num.parse().map_err(|_| err())?, den));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if !digits(int) || (s.contains('.') && !digits(frac)) {
        return Err(err());
    }
    let scale = BigInt::from(10u32).pow(frac.len() as u32);
    let whole: BigInt = format!("{int}{frac}").parse().map_err(|_| err())?;
    Ok(Rational::new(whole, scale))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Integer part (floor) of a non-negative rational.
pub fn integer_part(t: &Rational) -> BigInt {
    t.numer().div_floor(t.denom())
}

/// Fractional part in `[0, 1)`.
pub fn fractional_part(t: &Rational) -> Rational {
    t - Rational::from_integer(integer_part(t))
}

pub fn is_integer(t: &Rational) -> bool {
    t.is_integer()
}

/// Canonical text form: `7/2`, or `3` for integers.
pub fn display(t: &Rational) -> String {
    t.to_string()
}

pub fn is_negative(t: &Rational) -> bool {
    t.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals() {
        assert_eq!(parse("3.5").unwrap(), ratio(7, 2));
        assert_eq!(parse("7/2").unwrap(), ratio(7, 2));
        assert_eq!(parse("0").unwrap(), int(0));
        assert_eq!(parse("11.12").unwrap(), ratio(278, 25));
        for bad in ["", ".5", "1.", "-1", "1/0", "a", "1/-2", "1.2.3"] {
            assert!(parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn parts() {
        let t = ratio(23, 10);
        assert_eq!(integer_part(&t), 2.into());
        assert_eq!(fractional_part(&t), ratio(3, 10));
        assert_eq!(display(&parse("3.5").unwrap()), "7/2");
        assert_eq!(display(&int(4)), "4");
    }
}
