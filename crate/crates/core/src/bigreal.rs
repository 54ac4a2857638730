//! Arbitrary-precision reals backed by MPFR.
//!
//! Every `BigReal` carries its own precision in bits; arithmetic rounds to
//! nearest, so a single operation at precision `p` has relative error at most
//! `2^(1-p)`.

use rug::float::Round;
use rug::ops::Pow;
use rug::{Float, Rational};

use crate::error::{Error, Result};

pub type BigReal = Float;

pub fn from_rational(value: &Rational, prec: u32) -> BigReal {
    Float::with_val(prec, value)
}

pub fn from_f64(value: f64, prec: u32) -> BigReal {
    Float::with_val(prec, value)
}

/// Parses a decimal or rational literal (`"1e-40"`, `"0.25"`, `"3/7"`).
pub fn parse(text: &str, prec: u32) -> Result<BigReal> {
    let cleaned = text.trim().replace('\u{2212}', "-");
    if cleaned.contains('/') {
        let r = crate::linalg::parse_rational(&cleaned)?;
        return Ok(from_rational(&r, prec));
    }
    let parsed = Float::parse(&cleaned).map_err(|e| Error::InvalidInput(format!("cannot parse real '{text}': {e}")))?;
    Ok(Float::with_val(prec, parsed))
}

/// Rounds `value` outward to an upper bound with `prec` bits.
pub fn upper_bound(value: &Rational, prec: u32) -> Float {
    Float::with_val_round(prec, value, Round::Up).0
}

/// Rounds `value` to a lower bound with `prec` bits.
pub fn lower_bound(value: &Rational, prec: u32) -> Float {
    Float::with_val_round(prec, value, Round::Down).0
}

/// Fixed-point decimal rendering with `digits` digits after the point.
pub fn to_fixed(value: &BigReal, digits: usize) -> String {
    let r = value.to_rational().unwrap_or_default();
    fixed_from_rational(&r, digits)
}

fn fixed_from_rational(r: &Rational, digits: usize) -> String {
    use rug::Integer;
    let negative = *r < 0;
    let abs = Rational::from(r.abs_ref());
    let scale = Integer::from(10).pow(digits as u32);
    let scaled = Rational::from(&abs * &scale);
    // round half up
    let (rem, mut q) = scaled.fract_floor(Integer::new());
    if rem >= Rational::from((1, 2)) {
        q += 1;
    }
    let mut text = q.to_string();
    if text.len() <= digits {
        text = format!("{}{}", "0".repeat(digits + 1 - text.len()), text);
    }
    let split = text.len() - digits;
    let (int_part, frac_part) = text.split_at(split);
    let body = if digits == 0 {
        int_part.to_string()
    } else {
        format!("{int_part}.{frac_part}")
    };
    if negative && q_is_nonzero(&body) {
        format!("-{body}")
    } else {
        body
    }
}

fn q_is_nonzero(body: &str) -> bool {
    body.chars().any(|c| c.is_ascii_digit() && c != '0')
}

/// Scientific rendering with `digits` significant digits, e.g. `-1.2500e-3`.
pub fn to_scientific(value: &BigReal, digits: usize) -> String {
    format!("{:.*e}", digits.max(1), value)
}

/// Number of leading significant decimal digits shared by two fixed renderings.
pub fn shared_digits(a: &str, b: &str) -> usize {
    let da: Vec<char> = a.chars().filter(|c| c.is_ascii_digit()).collect();
    let db: Vec<char> = b.chars().filter(|c| c.is_ascii_digit()).collect();
    if a.starts_with('-') != b.starts_with('-') {
        return 0;
    }
    da.iter().zip(db.iter()).take_while(|(x, y)| x == y).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_rendering_rounds() {
        let x = from_rational(&Rational::from((2, 3)), 200);
        assert_eq!(to_fixed(&x, 5), "0.66667");
        let y = from_rational(&Rational::from((-1, 8)), 200);
        assert_eq!(to_fixed(&y, 2), "-0.13");
        assert_eq!(to_fixed(&from_f64(12.5, 64), 0), "13");
    }

    #[test]
    fn parse_accepts_rationals_and_decimals() {
        let a = parse("3/4", 64).unwrap();
        assert_eq!(a, 0.75);
        let b = parse("1e-3", 64).unwrap();
        assert!((b.to_f64() - 1e-3).abs() < 1e-18);
        assert!(parse("abc", 64).is_err());
    }

    #[test]
    fn scientific_rendering() {
        let x = from_rational(&Rational::from((-1, 800)), 128);
        assert_eq!(to_scientific(&x, 4), "-1.250e-3");
        assert_eq!(to_scientific(&from_f64(0.0, 64), 3), "0");
    }

    #[test]
    fn shared_digit_count() {
        assert_eq!(shared_digits("1.11560", "1.11538"), 4);
        assert_eq!(shared_digits("1.5", "1.5"), 2);
    }
}
