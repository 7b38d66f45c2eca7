//! Numeric evaluation of `e^{-V}` and the singularity data of `V'`.

use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::loopgen::Potential;
use crate::poly::{horner, roots, UPoly};
use crate::symcore::{cr_int, cr_to_c64};

/// `e^{-V(x)} = e^{-P(x)} prod_p (x - p)^{-r_p}` with integer residues `r_p`.
#[derive(Clone, Debug)]
pub struct Weight {
    /// Ascending coefficients of the polynomial part `P` of `V`.
    pub poly: Vec<Complex64>,
    /// Simple poles of `V'` with their (integer) residues.
    pub poles: Vec<(Complex64, i64)>,
    /// Degree of `P`; sectors at infinity exist when it is positive.
    pub poly_degree: usize,
}

impl Weight {
    pub fn new(v: &Potential) -> Result<Self> {
        match v {
            Potential::Polynomial { t } => {
                let mut poly = vec![Complex64::new(0.0, 0.0)];
                for (k, tk) in t.iter().enumerate() {
                    poly.push(cr_to_c64(tk) / (k + 1) as f64);
                }
                Ok(Weight { poly_degree: t.len(), poly, poles: Vec::new() })
            }
            Potential::Rational { r, d } => rational_weight(r, d),
        }
    }

    /// `-V(x)`; exponentiating gives the single-valued weight.
    pub fn log_weight(&self, x: Complex64) -> Complex64 {
        let mut s = -horner(&self.poly, x);
        for &(p, r) in &self.poles {
            s -= (x - p).ln() * r as f64;
        }
        s
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        let mut w = (-horner(&self.poly, x)).exp();
        for &(p, r) in &self.poles {
            w *= (x - p).powi(-r as i32);
        }
        w
    }

    /// Leading coefficient of `V` at infinity and its degree, if `V`
    /// grows polynomially there.
    pub fn leading(&self) -> Option<(Complex64, usize)> {
        (self.poly_degree > 0).then(|| (self.poly[self.poly_degree], self.poly_degree))
    }

    /// Whether `Re V -> +inf` along direction `theta` (strictly inside a sector).
    pub fn decays_along(&self, theta: f64) -> bool {
        match self.leading() {
            Some((c, m)) => (c * Complex64::from_polar(1.0, m as f64 * theta)).re > 0.0,
            None => false,
        }
    }
}

fn rational_weight(r: &UPoly, d: &UPoly) -> Result<Weight> {
    let dd = d.degree().unwrap_or(0);
    let dprime = d.derivative();
    if dd > 0 && d.gcd(&dprime).degree() != Some(0) {
        return Err(Error::Unsupported("V' has a pole of order > 1".into()));
    }
    let (q, rem) = r.div_rem(d);
    // P' = q, so P = sum q_j x^{j+1}/(j+1)
    let mut poly = vec![Complex64::new(0.0, 0.0)];
    for (j, qj) in q.coeffs().iter().enumerate() {
        poly.push(cr_to_c64(qj) / (j + 1) as f64);
    }
    while poly.len() > 1 && poly.last().is_some_and(|c| c.norm() == 0.0) {
        poly.pop();
    }
    let poly_degree = poly.len() - 1;

    let mut poles = Vec::new();
    if dd > 0 {
        let dc = d.to_c64();
        let dpc = dprime.to_c64();
        let remc = rem.to_c64();
        let pts = roots(&dc);
        let mut candidates: Vec<i64> = Vec::new();
        for &p in &pts {
            let res = horner(&remc, p) / horner(&dpc, p);
            let k = res.re.round();
            if (res - Complex64::new(k, 0.0)).norm() > 1e-6 * (1.0 + res.norm()) {
                return Err(Error::Unsupported(format!(
                    "cut placement unsupported: residue {res} of V' at {p} is not an integer"
                )));
            }
            let k = k.to_i64().unwrap_or(i64::MAX);
            poles.push((p, k));
            if !candidates.contains(&k) {
                candidates.push(k);
            }
        }
        // exact confirmation: every root of D has an integer residue
        let covered: usize = candidates
            .iter()
            .map(|&k| {
                let g = d.gcd(&rem.sub(&dprime.scale(&cr_int(k))));
                g.degree().unwrap_or(0)
            })
            .sum();
        if covered != dd {
            return Err(Error::Unsupported(
                "cut placement unsupported: V' has a non-integer residue".into(),
            ));
        }
    }
    Ok(Weight { poly, poles, poly_degree })
}
