//! Exact rational scalars shared by every layer of the crate.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational; always stored reduced with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

/// `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n/d` as a rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

pub fn in_unit_interval(r: &Rational) -> bool {
    !r.is_negative() && *r <= Rational::one()
}

/// Lowest-terms text form: integers print bare, everything else as `p/q`.
pub fn format_rational(r: &Rational) -> String {
    if is_integer(r) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `-p` or `p/q` with `q > 0`.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let (num_text, den_text) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let numer: BigInt = num_text
        .parse()
        .map_err(|_| format!("invalid integer '{num_text}'"))?;
    let denom: BigInt = match den_text {
        Some(d) => d
            .parse()
            .map_err(|_| format!("invalid denominator '{d}'"))?,
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err("rational has zero denominator".to_string());
    }
    if denom.is_negative() {
        return Err(format!("denominator must be positive in '{s}'"));
    }
    Ok(Rational::new(numer, denom))
}

/// Smallest integer >= `r`, for `r >= 0`.
pub fn ceil_to_biguint(r: &Rational) -> BigUint {
    debug_assert!(!r.is_negative());
    let c = r.ceil();
    c.numer().magnitude().clone()
}

/// Ceiling division on naturals; `b` must be nonzero.
pub fn ceil_div(a: &BigUint, b: &BigUint) -> BigUint {
    (a + b - BigUint::one()) / b
}

pub fn biguint_to_rational(n: &BigUint) -> Rational {
    Rational::from_integer(BigInt::from(n.clone()))
}
