//! Terminating Gauss hypergeometric series.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

fn nonpositive_int(x: f64) -> Option<u64> {
    (x <= 0.0 && x.fract() == 0.0 && x > -1e15).then(|| (-x) as u64)
}

/// Number of terms after which the series for `2F1(a, b; c; z)` stops.
fn terminating_degree(a: f64, b: f64) -> Result<u64> {
    match (nonpositive_int(a), nonpositive_int(b)) {
        (Some(m), Some(n)) => Ok(m.min(n)),
        (Some(m), None) | (None, Some(m)) => Ok(m),
        (None, None) => Err(Error::Unsupported(format!(
            "2F1 needs a nonpositive integer parameter, got a={a}, b={b}"
        ))),
    }
}

/// `2F1(a, b; c; z)` when `a` or `b` is a nonpositive integer.
///
/// Summed by term recursion; the series has at most `m + 1` nonzero terms
/// where `-m` is the terminating parameter.
pub fn hyp2f1_terminating(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let m = terminating_degree(a, b)?;
    if !(c > 0.0) && nonpositive_int(c).is_some_and(|n| n < m) {
        return Err(Error::Unsupported(format!("2F1 lower parameter c={c} hits a pole")));
    }
    if !z.is_finite() {
        return Err(Error::Domain(format!("2F1 argument z={z}")));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for l in 0..m {
        let l = l as f64;
        term *= (a + l) * (b + l) / ((c + l) * (l + 1.0)) * z;
        sum += term;
    }
    Ok(sum)
}

/// The shortest decimal that rounds to `x`, as an exact rational: `0.3` maps
/// to `3/10` rather than to its 54-bit dyadic neighbour.
pub fn rational_from_f64(x: f64) -> BigRational {
    assert!(x.is_finite(), "finite value");
    let s = format!("{x:e}");
    let (mant, exp) = s.split_once('e').expect("exponent form");
    let exp: i64 = exp.parse().expect("integer exponent");
    let (int_part, frac) = mant.split_once('.').unwrap_or((mant, ""));
    let digits: BigInt = format!("{int_part}{frac}").parse().expect("decimal digits");
    let shift = exp - frac.len() as i64;
    let ten = BigInt::from(10);
    if shift >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, shift as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-shift) as usize))
    }
}

/// Exact `2F1(-m, b; c; z)` over rationals.
pub fn hyp2f1_terminating_exact(
    m: u64,
    b: &BigRational,
    c: &BigRational,
    z: &BigRational,
) -> BigRational {
    let a = -BigRational::from_integer(BigInt::from(m));
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    for l in 0..m {
        let lr = BigRational::from_integer(BigInt::from(l));
        let num = (&a + &lr) * (b + &lr) * z;
        let den = (c + &lr) * (&lr + BigRational::one());
        if den.is_zero() {
            break;
        }
        term = term * num / den;
        sum += &term;
    }
    sum
}
