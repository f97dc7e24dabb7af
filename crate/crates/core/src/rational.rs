//! Arbitrary-precision rational scalars.
//!
//! Every exact computation in this crate runs over [`Rat`]. The type is a
//! thin alias for [`num_rational::BigRational`], which already maintains the
//! invariants we need (always reduced, positive denominator); the helpers
//! here cover construction, parsing of the `p/q` command-line syntax and
//! float rendering.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

/// Rational from an integer pair. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rat {
    assert!(den != 0, "zero denominator");
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(num: i64) -> Rat {
    Rat::from_integer(BigInt::from(num))
}

/// Exact factorial as a rational.
pub fn factorial(n: u64) -> Rat {
    let mut acc = BigInt::from(1);
    for k in 2..=n {
        acc *= k;
    }
    Rat::from_integer(acc)
}

/// Binomial coefficient as a rational.
pub fn binomial(n: u64, k: u64) -> Rat {
    if k > n {
        return Rat::zero();
    }
    let k = k.min(n - k);
    let mut num = BigInt::from(1);
    let mut den = BigInt::from(1);
    for j in 0..k {
        num *= n - j;
        den *= j + 1;
    }
    Rat::new(num, den)
}

/// Parses `p`, `p/q` or a decimal like `1.5` into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let num: BigInt = p
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator in {s:?}"))?;
        let den: BigInt = q
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator in {s:?}"))?;
        if den.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Rat::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let digits = frac.len() as u32;
        let joined = format!("{int}{frac}");
        let num: BigInt = joined.parse().map_err(|_| format!("bad decimal {s:?}"))?;
        let den = BigInt::from(10u32).pow(digits);
        return Ok(Rat::new(num, den));
    }
    let num: BigInt = s.parse().map_err(|_| format!("bad rational {s:?}"))?;
    Ok(Rat::from_integer(num))
}

/// Parses a comma-separated list of rationals.
pub fn parse_rat_list(s: &str) -> Result<Vec<Rat>, String> {
    s.split(',').map(parse_rat).collect()
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back to a quotient of float conversions for gigantic operands.
        let n = r
            .numer()
            .to_f64()
            .unwrap_or(f64::INFINITY * r.numer().signum().to_f64().unwrap());
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// `max{x, 0}`, the bracket that shapes every piecewise-linear kernel here.
pub fn plus_part(x: &Rat) -> Rat {
    if x.is_positive() {
        x.clone()
    } else {
        Rat::zero()
    }
}

pub fn rat_to_string(r: &Rat) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
