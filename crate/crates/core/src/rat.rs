//! Exact rational arithmetic helpers.
//!
//! All probabilities and responsibility degrees are arbitrary-precision
//! rationals; nothing in the crate ever rounds.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

/// Indicator value: 1 if the condition holds, else 0.
pub fn indicator(cond: bool) -> Rat {
    if cond {
        one()
    } else {
        zero()
    }
}

pub fn abs(r: &Rat) -> Rat {
    r.abs()
}

/// Render as `num/den`, or just the integer when the denominator is 1.
pub fn display(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering for human output; exact when the denominator divides a
/// power of ten, otherwise a 6-digit approximation marked with `≈`.
pub fn display_decimal(r: &Rat) -> String {
    if r.denom().is_one() {
        return r.numer().to_string();
    }
    let f = r.to_f64().unwrap_or(f64::NAN);
    let mut den = r.denom().clone();
    for p in [BigInt::from(2), BigInt::from(5)] {
        while (&den % &p).is_zero() {
            den /= &p;
        }
    }
    if den.is_one() {
        // terminating decimal
        let s = format!("{f}");
        s
    } else {
        format!("≈{f:.6}")
    }
}

/// Parse `a/b`, a decimal, or an integer into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rat> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let int_part: BigInt = if int.is_empty() { BigInt::zero() } else { int.parse().ok()? };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let digits: BigInt = frac.parse().ok()?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let negative = t.starts_with('-');
        let whole = Rat::from_integer(int_part.clone());
        let part = Rat::new(digits, scale);
        return Some(if negative { whole - part } else { whole + part });
    }
    let n: BigInt = t.parse().ok()?;
    Some(Rat::from_integer(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_forms() {
        assert_eq!(parse_rational("7/10"), Some(rat(7, 10)));
        assert_eq!(parse_rational("0.3"), Some(rat(3, 10)));
        assert_eq!(parse_rational("1"), Some(one()));
        assert_eq!(parse_rational("-0.25"), Some(rat(-1, 4)));
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn displays_exactly() {
        assert_eq!(display(&rat(3, 10)), "3/10");
        assert_eq!(display(&rat(4, 2)), "2");
        assert_eq!(display_decimal(&rat(3, 10)), "0.3");
        assert!(display_decimal(&rat(1, 3)).starts_with('≈'));
    }
}
