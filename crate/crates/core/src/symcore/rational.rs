use std::fmt::Debug;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Gaussian rational `a + b i` with `a, b` exact rationals.
pub type CRational = Complex<BigRational>;

/// Coefficient ring used by the symbolic generators.
///
/// Implemented for [`CRational`] (numeric coefficients) and [`super::MPoly`]
/// (coefficients polynomial in symbolic parameters such as `N` or `t_k`).
pub trait Coeff: Clone + PartialEq + Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(v: i64) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl Coeff for CRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn from_i64(v: i64) -> Self {
        cr_int(v)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
}

pub fn cr_int(v: i64) -> CRational {
    Complex::new(BigRational::from_integer(BigInt::from(v)), BigRational::zero())
}

pub fn cr_ratio(num: i64, den: i64) -> CRational {
    Complex::new(
        BigRational::new(BigInt::from(num), BigInt::from(den)),
        BigRational::zero(),
    )
}

pub fn cr_to_c64(c: &CRational) -> Complex64 {
    Complex64::new(
        c.re.to_f64().unwrap_or(f64::NAN),
        c.im.to_f64().unwrap_or(f64::NAN),
    )
}

/// Exact conversion of a finite double into a Gaussian rational.
pub fn cr_from_c64(c: Complex64) -> CRational {
    let conv = |x: f64| BigRational::from_float(x).unwrap_or_else(BigRational::zero);
    Complex::new(conv(c.re), conv(c.im))
}

/// Parses `"p/q"` or `"p"` (no decimal point).
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("'{s}' is not a rational of the form p/q"));
    if s.contains('.') {
        return Err(bad());
    }
    let r: BigRational = s.parse().map_err(|_| bad())?;
    Ok(r)
}

pub fn parse_crational(re: &str, im: &str) -> Result<CRational> {
    Ok(Complex::new(parse_rational(re)?, parse_rational(im)?))
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else if r.is_negative() {
        format!("-{}/{}", r.numer().abs(), r.denom())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        let r = parse_rational("-6/4").unwrap();
        assert_eq!(format_rational(&r), "-3/2");
        assert_eq!(format_rational(&parse_rational("7").unwrap()), "7");
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn float_roundtrip_is_exact() {
        let z = Complex64::new(0.1, -2.5);
        assert_eq!(cr_to_c64(&cr_from_c64(z)), z);
    }
}
