//! Length reduction `p_mu -> sum c_nu p_nu` with `l(nu) <= N`.
//!
//! Power sums are expanded in the monomial symmetric basis truncated to `N`
//! variables (`m_lambda = 0` once `l(lambda) > N`), then converted back.
//! The back conversion is triangular: `p_lambda` only contains `m_kappa`
//! for coarsenings `kappa` of `lambda`, and the coefficient of `m_lambda`
//! itself is `prod m_k(lambda)!`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::partition::Partition;
use super::powersum::PowerSumPoly;
use super::rational::{cr_int, Coeff, CRational};
use crate::error::{Error, Result};

/// Coefficients of `p_mu` on the monomial symmetric functions `m_lambda`
/// with `l(lambda) <= max_len`.
pub fn monomial_expansion(mu: &Partition, max_len: usize) -> BTreeMap<Partition, BigInt> {
    let parts = mu.parts();
    let mut out: BTreeMap<Partition, BigInt> = BTreeMap::new();
    let mut sums: Vec<u32> = Vec::new();
    // restricted-growth enumeration of set partitions of the parts
    fn rec(
        i: usize,
        parts: &[u32],
        max_len: usize,
        sums: &mut Vec<u32>,
        out: &mut BTreeMap<Partition, BigInt>,
    ) {
        if i == parts.len() {
            let lambda = Partition::new(sums.clone());
            let w = BigInt::from(lambda.multiplicity_factorial());
            *out.entry(lambda).or_insert_with(BigInt::zero) += w;
            return;
        }
        for b in 0..sums.len() {
            sums[b] += parts[i];
            rec(i + 1, parts, max_len, sums, out);
            sums[b] -= parts[i];
        }
        if sums.len() < max_len {
            sums.push(parts[i]);
            rec(i + 1, parts, max_len, sums, out);
            sums.pop();
        }
    }
    rec(0, parts, max_len, &mut sums, &mut out);
    out
}

fn big_to_cr(b: &BigInt) -> CRational {
    CRational::new(BigRational::from_integer(b.clone()), BigRational::zero())
}

/// Rewrites `p` on the basis `{p_nu : l(nu) <= n}` of symmetric polynomials
/// in `n` variables. Homogeneous components keep their weight.
pub fn reduce_length(p: &PowerSumPoly, n: usize) -> PowerSumPoly {
    let nv = cr_int(n as i64);
    let mut out = PowerSumPoly::zero(nv.clone());
    let mut mono: BTreeMap<Partition, CRational> = BTreeMap::new();
    for (mu, c) in p.terms() {
        if mu.len() <= n {
            out.add_term(mu.clone(), c.clone());
            continue;
        }
        for (lambda, k) in monomial_expansion(mu, n) {
            let e = mono.entry(lambda).or_insert_with(<CRational as Zero>::zero);
            *e = &*e + c * big_to_cr(&k);
        }
    }
    mono.retain(|_, c| !Coeff::is_zero(c));
    while let Some(lambda) = finest(&mono) {
        let c = mono[&lambda].clone();
        let diag = cr_int(lambda.multiplicity_factorial() as i64);
        let a = c / diag;
        for (kappa, k) in monomial_expansion(&lambda, n) {
            let e = mono.entry(kappa).or_insert_with(<CRational as Zero>::zero);
            *e = &*e - &a * big_to_cr(&k);
        }
        mono.retain(|_, c| !Coeff::is_zero(c));
        out.add_term(lambda, a);
    }
    out
}

// longest partition left; ties broken by the graded order
fn finest(mono: &BTreeMap<Partition, CRational>) -> Option<Partition> {
    mono.keys()
        .max_by(|a, b| a.len().cmp(&b.len()).then_with(|| b.cmp(a)))
        .cloned()
}

/// Exact evaluation of `p` at the eigenvalue tuple `points`.
pub fn eval_powersum(p: &PowerSumPoly, points: &[CRational]) -> Result<CRational> {
    if let Some(n) = p.nvars_usize() {
        if n != points.len() {
            return Err(Error::LengthMismatch {
                expected: n,
                got: points.len(),
            });
        }
    }
    let maxk = p.terms().flat_map(|(mu, _)| mu.parts().iter().copied()).max().unwrap_or(0);
    // power sums p_k for k = 0..=maxk
    let mut psums = vec![<CRational as Zero>::zero(); maxk as usize + 1];
    for x in points {
        let mut pw = <CRational as One>::one();
        for ps in psums.iter_mut() {
            *ps = &*ps + &pw;
            pw = &pw * x;
        }
    }
    let mut total = <CRational as Zero>::zero();
    for (mu, c) in p.terms() {
        let mut term = c.clone();
        for &k in mu.parts() {
            term = term * &psums[k as usize];
        }
        total = total + term;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::rational::cr_ratio;
    use num_complex::Complex;

    fn single(parts: &[u32], n: usize) -> PowerSumPoly {
        PowerSumPoly::monomial(parts, cr_int(1), cr_int(n as i64))
    }

    #[test]
    fn one_variable_square() {
        let r = reduce_length(&single(&[1, 1], 1), 1);
        assert_eq!(r, single(&[2], 1));
    }

    #[test]
    fn cube_in_two_variables() {
        let r = reduce_length(&single(&[1, 1, 1], 2), 2);
        let mut expect = PowerSumPoly::zero(cr_int(2));
        expect.add_term(Partition::new(vec![2, 1]), cr_int(3));
        expect.add_term(Partition::new(vec![3]), cr_int(-2));
        assert_eq!(r, expect);
    }

    #[test]
    fn short_partitions_untouched() {
        let p = single(&[1, 1], 3);
        assert_eq!(reduce_length(&p, 3), p);
    }

    #[test]
    fn monomial_expansion_small() {
        // p_1^2 = m_2 + 2 m_11
        let e = monomial_expansion(&Partition::new(vec![1, 1]), 5);
        assert_eq!(e[&Partition::new(vec![2])], BigInt::from(1));
        assert_eq!(e[&Partition::new(vec![1, 1])], BigInt::from(2));
    }

    #[test]
    fn evaluation_examples() {
        let one = cr_int(1);
        let two = cr_int(2);
        assert_eq!(eval_powersum(&single(&[2], 2), &[one.clone(), two.clone()]).unwrap(), cr_int(5));
        assert_eq!(eval_powersum(&single(&[1, 1], 2), &[one.clone(), two.clone()]).unwrap(), cr_int(9));
        let i = Complex::new(cr_int(0).re, cr_int(1).re);
        assert_eq!(eval_powersum(&single(&[2, 1], 2), &[i, one.clone()]).unwrap(), cr_int(0));
        assert!(matches!(
            eval_powersum(&single(&[2], 2), &[one]),
            Err(Error::LengthMismatch { expected: 2, got: 1 })
        ));
        let half = cr_ratio(1, 2);
        assert_eq!(eval_powersum(&single(&[], 2), &[half.clone(), half]).unwrap(), cr_int(1));
    }
}
