//! Helpers for exact rational values: parsing, canonical formatting, and
//! integral scaling.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::Error;

/// Formats a rational as `numer/denom` in lowest terms, always with an
/// explicit denominator (`3` renders as `3/1`).
pub fn to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `numer/denom` or a bare integer into a rational.
pub fn parse(s: &str) -> Result<BigRational, Error> {
    let bad = || Error::InvalidWeights(format!("cannot parse rational `{s}`"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let numer: BigInt = num.parse().map_err(|_| bad())?;
    let denom: BigInt = den.parse().map_err(|_| bad())?;
    if denom.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(numer, denom))
}

/// Least common multiple of the denominators of `values`; scaling every
/// value by the result yields integers.
pub fn lcm_of_denominators<'a>(values: impl Iterator<Item = &'a BigRational>) -> BigInt {
    values.fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Shorthand constructor: `n / d`.
pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Shorthand constructor for an integral rational.
pub fn integer(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}
