//! Exact rational numbers used for costs, coefficients and certificates.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

/// Parses `3`, `-1/2` or a finite decimal such as `0.25`.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let neg = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches('-'), frac);
        let n: BigInt = digits.parse().ok()?;
        let d = BigInt::from(10u32).pow(frac.len() as u32);
        let r = Rat::new(n, d);
        return Some(if neg { -r } else { r });
    }
    s.parse::<BigInt>().ok().map(Rat::from_integer)
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Very large numerators or denominators: fall back to a scaled division.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Renders `p` or `p/q` with no spaces.
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn is_nonneg(r: &Rat) -> bool {
    !r.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rat("1/2"), Some(rat(1, 2)));
        assert_eq!(parse_rat("-3"), Some(int(-3)));
        assert_eq!(parse_rat("0.25"), Some(rat(1, 4)));
        assert_eq!(parse_rat("-1.5"), Some(rat(-3, 2)));
        assert_eq!(parse_rat("1/0"), None);
        assert_eq!(parse_rat("x"), None);
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(fmt_rat(&rat(6, 4)), "3/2");
        assert_eq!(fmt_rat(&int(-2)), "-2");
        assert!((to_f64(&rat(105, 163)) - 0.644171779).abs() < 1e-8);
    }
}
