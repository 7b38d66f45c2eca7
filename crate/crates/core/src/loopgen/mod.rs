//! Loop-equation polynomials `Q_mu`.
//!
//! For every tuple `mu = (mu_1, mu_2, ..)` the polynomial `Q_mu` satisfies
//! `Q_mu * Delta^2 * e^{-sum V} = -sum_i d/dx_i (x_i^{mu_1} p_{mu_2}..
//! Delta^2 e^{-sum V})`, so every contour moment functional annihilates it.
//! `p_0` is folded into the coefficients as the number of variables `N`.

mod potential;
mod twomatrix;

pub use potential::{CoeffJson, Potential, PotentialJson, PotentialKind};
pub use twomatrix::{q_twomatrix, TwoPotential};

use crate::error::{Error, Result};
use crate::symcore::{cr_int, Coeff, CRational, PowerSumPoly};

/// `Q_mu` for `V'(x) = sum_j t[j] x^j` (so `t[j]` is `t_{j+1}`), over any
/// coefficient ring. `nvars` is the value of `p_0`.
pub fn q_from_coeffs<C: Coeff>(mu: &[u32], t: &[C], nvars: &C) -> PowerSumPoly<C> {
    let mut q = PowerSumPoly::zero(nvars.clone());
    let Some((&m1, rest)) = mu.split_first() else {
        return q;
    };
    let mut parts: Vec<u32> = Vec::with_capacity(mu.len() + 1);
    let mut with_head = |head: &[u32], q: &mut PowerSumPoly<C>, c: C, skip: Option<usize>| {
        parts.clear();
        parts.extend_from_slice(head);
        for (i, &p) in rest.iter().enumerate() {
            if Some(i) != skip {
                parts.push(p);
            }
        }
        q.add_tuple(&parts, c);
    };
    for (j, tj) in t.iter().enumerate() {
        with_head(&[m1 + j as u32], &mut q, tj.clone(), None);
    }
    for j in 0..m1 {
        with_head(&[j, m1 - 1 - j], &mut q, C::from_i64(-1), None);
    }
    for (i, &mi) in rest.iter().enumerate() {
        if mi == 0 {
            continue;
        }
        with_head(&[m1 + mi - 1], &mut q, C::from_i64(-(mi as i64)), Some(i));
    }
    q
}

/// Loop-equation polynomial of a polynomial potential.
pub fn q_polynomial(mu: &[u32], v: &Potential, nvars: usize) -> Result<PowerSumPoly> {
    match v {
        Potential::Polynomial { t } => Ok(q_from_coeffs(mu, t, &cr_int(nvars as i64))),
        Potential::Rational { .. } => Err(Error::Precondition(
            "q_polynomial needs a polynomial potential; use q_rational".into(),
        )),
    }
}

/// Loop-equation polynomial of a rational potential `V' = R/D`, from
/// `sum_i d/dx_i (D(x_i) x_i^{mu_1} p_{mu_2}.. Delta^2 e^{-sum V})`:
///
/// `Q_mu = p^{(R)}_mu - sum_k D_k sum_{a=0}^{k+mu_1-1} p_a p_{k+mu_1-1-a} p_{mu_2}..
///         - sum_i mu_i p^{(D)}_{mu_1+mu_i-1} prod_{l != i} p_{mu_l}`.
///
/// The `D'` contribution of the product rule cancels against the diagonal
/// of the Vandermonde term and leaves no separate `p^{(D')}` piece.
pub fn q_rational(mu: &[u32], v: &Potential, nvars: usize) -> Result<PowerSumPoly> {
    let Potential::Rational { r, d } = v else {
        return Err(Error::Precondition(
            "q_rational needs a rational potential; use q_polynomial".into(),
        ));
    };
    let n = cr_int(nvars as i64);
    let mut q = PowerSumPoly::zero(n);
    let Some((&m1, rest)) = mu.split_first() else {
        return Ok(q);
    };
    let push = |q: &mut PowerSumPoly, head: &[u32], c: CRational, skip: Option<usize>| {
        let mut parts = head.to_vec();
        parts.extend(rest.iter().enumerate().filter(|(i, _)| Some(*i) != skip).map(|(_, &p)| p));
        q.add_tuple(&parts, c);
    };
    for (j, rj) in r.coeffs().iter().enumerate() {
        push(&mut q, &[m1 + j as u32], rj.clone(), None);
    }
    for (k, dk) in d.coeffs().iter().enumerate() {
        if Coeff::is_zero(dk) {
            continue;
        }
        let top = k as u32 + m1;
        for a in 0..top {
            push(&mut q, &[a, top - 1 - a], -dk.clone(), None);
        }
    }
    for (i, &mi) in rest.iter().enumerate() {
        if mi == 0 {
            continue;
        }
        for (k, dk) in d.coeffs().iter().enumerate() {
            push(
                &mut q,
                &[m1 + mi - 1 + k as u32],
                -(dk * cr_int(mi as i64)),
                Some(i),
            );
        }
    }
    Ok(q)
}

/// Dispatches on the potential kind.
pub fn q_mu(mu: &[u32], v: &Potential, nvars: usize) -> Result<PowerSumPoly> {
    match v {
        Potential::Polynomial { .. } => q_polynomial(mu, v, nvars),
        Potential::Rational { .. } => q_rational(mu, v, nvars),
    }
}
