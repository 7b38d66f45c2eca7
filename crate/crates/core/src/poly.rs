//! Univariate polynomials: exact over Gaussian rationals, and numeric
//! root finding over complex doubles.

use num_complex::Complex64;
use num_traits::Zero;

use crate::symcore::{cr_int, cr_to_c64, Coeff, CRational};

/// Exact univariate polynomial, coefficients in ascending order, no
/// trailing zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct UPoly(Vec<CRational>);

impl UPoly {
    pub fn new(mut coeffs: Vec<CRational>) -> Self {
        while coeffs.last().is_some_and(Coeff::is_zero) {
            coeffs.pop();
        }
        UPoly(coeffs)
    }

    pub fn coeffs(&self) -> &[CRational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial has degree `None`.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn leading(&self) -> CRational {
        self.0.last().cloned().unwrap_or_else(<CRational as Zero>::zero)
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * cr_int(k as i64))
                .collect(),
        )
    }

    pub fn sub(&self, other: &UPoly) -> UPoly {
        let n = self.0.len().max(other.0.len());
        let z = <CRational as Zero>::zero();
        UPoly::new(
            (0..n)
                .map(|i| self.0.get(i).unwrap_or(&z) - other.0.get(i).unwrap_or(&z))
                .collect(),
        )
    }

    pub fn scale(&self, s: &CRational) -> UPoly {
        UPoly::new(self.0.iter().map(|c| c * s).collect())
    }

    /// Euclidean division `self = q * other + r`.
    pub fn div_rem(&self, other: &UPoly) -> (UPoly, UPoly) {
        let dd = other.degree().expect("division by zero polynomial");
        let lead = other.leading();
        let mut rem = self.0.clone();
        let mut quot = vec![<CRational as Zero>::zero(); self.0.len().saturating_sub(dd).max(1)];
        while rem.len() > dd && !rem.is_empty() {
            let shift = rem.len() - 1 - dd;
            let c = rem.last().unwrap() / &lead;
            for (i, oc) in other.0.iter().enumerate() {
                rem[shift + i] = &rem[shift + i] - &c * oc;
            }
            quot[shift] = c;
            rem.pop();
            while rem.last().is_some_and(Coeff::is_zero) {
                rem.pop();
            }
        }
        (UPoly::new(quot), UPoly::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let inv = cr_int(1) / a.leading();
        a.scale(&inv)
    }

    pub fn to_c64(&self) -> Vec<Complex64> {
        self.0.iter().map(cr_to_c64).collect()
    }
}

/// Evaluates an ascending-coefficient polynomial (Horner).
pub fn horner(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::zero(), |acc, &c| acc * x + c)
}

/// All roots of an ascending-coefficient polynomial via Aberth–Ehrlich
/// iteration, followed by a Newton polish on the original coefficients.
pub fn roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.last().is_some_and(|z| z.norm() == 0.0) {
        c.pop();
    }
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|z| z / lead).collect();
    let dmonic: Vec<Complex64> = monic
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, z)| z * k as f64)
        .collect();
    // Cauchy bound for the initial circle
    let bound = 1.0 + monic[..n].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.5 * bound, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let p = horner(&monic, z[i]);
            let dp = horner(&dmonic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            z[i] -= w;
            moved = moved.max(w.norm() / z[i].norm().max(1.0));
        }
        if moved < 1e-15 {
            break;
        }
    }
    let dc: Vec<Complex64> = c.iter().enumerate().skip(1).map(|(k, q)| q * k as f64).collect();
    for r in z.iter_mut() {
        for _ in 0..3 {
            let d = horner(&dc, *r);
            if d.norm() == 0.0 {
                break;
            }
            let step = horner(&c, *r) / d;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_detects_common_factor() {
        // x^3 and x share x
        let a = UPoly::new(vec![cr_int(0), cr_int(0), cr_int(0), cr_int(1)]);
        let b = UPoly::new(vec![cr_int(0), cr_int(1)]);
        assert_eq!(a.gcd(&b), b);
        let c = UPoly::new(vec![cr_int(1), cr_int(1)]);
        assert_eq!(b.gcd(&c).degree(), Some(0));
    }

    #[test]
    fn div_rem_identity() {
        let a = UPoly::new(vec![cr_int(-1), cr_int(0), cr_int(0), cr_int(2)]);
        let b = UPoly::new(vec![cr_int(3), cr_int(1)]);
        let (q, r) = a.div_rem(&b);
        let back = UPoly::new(
            {
                let mut v = vec![<CRational as Zero>::zero(); 4];
                for (i, qc) in q.coeffs().iter().enumerate() {
                    for (j, bc) in b.coeffs().iter().enumerate() {
                        v[i + j] = &v[i + j] + qc * bc;
                    }
                }
                v
            },
        )
        .sub(&UPoly::new(r.coeffs().iter().map(|c| -c.clone()).collect()));
        assert_eq!(back, a);
    }

    #[test]
    fn cubic_roots() {
        // x^3 + x - 9
        let c = [Complex64::new(-9.0, 0.0), Complex64::new(1.0, 0.0), Complex64::zero(), Complex64::new(1.0, 0.0)];
        let r = roots(&c);
        assert_eq!(r.len(), 3);
        for z in r {
            assert!(horner(&c, z).norm() < 1e-10);
        }
    }
}
