use std::collections::BTreeMap;
use std::fmt;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::partition::Partition;
use super::rational::{format_rational, parse_crational, Coeff, CRational};
use crate::error::{Error, Result};

/// Finite linear combination of products of power sums `p_mu`.
///
/// `nvars` is the number of eigenvalue variables as an element of the
/// coefficient ring; it is what `p_0` evaluates to and is folded in
/// whenever a zero part is produced. The empty partition is the constant 1.
#[derive(Clone, PartialEq)]
pub struct PowerSumPoly<C: Coeff = CRational> {
    terms: BTreeMap<Partition, C>,
    nvars: C,
}

impl<C: Coeff> PowerSumPoly<C> {
    pub fn zero(nvars: C) -> Self {
        PowerSumPoly {
            terms: BTreeMap::new(),
            nvars,
        }
    }

    pub fn constant(c: C, nvars: C) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Partition::empty(), c);
        p
    }

    /// `c * p_{parts}` where zero parts are replaced by the scalar `N`.
    pub fn monomial(parts: &[u32], c: C, nvars: C) -> Self {
        let mut p = Self::zero(nvars);
        p.add_tuple(parts, c);
        p
    }

    pub fn nvars(&self) -> &C {
        &self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Partition, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, mu: &Partition) -> C {
        self.terms.get(mu).cloned().unwrap_or_else(C::zero)
    }

    pub fn add_term(&mut self, mu: Partition, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mu) {
            Some(v) => {
                *v = v.add(&c);
                if v.is_zero() {
                    self.terms.remove(&mu);
                }
            }
            None => {
                self.terms.insert(mu, c);
            }
        }
    }

    /// Adds `c * prod p_{parts[i]}` with `p_0 = N` folded into the scalar.
    pub fn add_tuple(&mut self, parts: &[u32], c: C) {
        let zeros = parts.iter().filter(|&&p| p == 0).count();
        let mut c = c;
        for _ in 0..zeros {
            c = c.mul(&self.nvars);
        }
        self.add_term(Partition::new(parts.to_vec()), c);
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (mu, c) in &other.terms {
            self.add_term(mu.clone(), c.clone());
        }
    }

    pub fn add_scaled(&mut self, other: &Self, s: &C) {
        for (mu, c) in &other.terms {
            self.add_term(mu.clone(), c.mul(s));
        }
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut out = Self::zero(self.nvars.clone());
        out.add_scaled(self, s);
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars.clone());
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a.join(b), ca.mul(cb));
            }
        }
        out
    }

    /// Largest weight among the terms.
    pub fn max_weight(&self) -> Option<u32> {
        self.terms.keys().map(Partition::weight).max()
    }

    pub fn max_length(&self) -> usize {
        self.terms.keys().map(Partition::len).max().unwrap_or(0)
    }

    /// `true` when every term has the same weight.
    pub fn is_homogeneous(&self) -> bool {
        let mut w = self.terms.keys().map(Partition::weight);
        match w.next() {
            Some(first) => w.all(|x| x == first),
            None => true,
        }
    }

    pub fn map_coeffs<D: Coeff>(&self, nvars: D, f: impl Fn(&C) -> D) -> PowerSumPoly<D> {
        let mut out = PowerSumPoly::zero(nvars);
        for (mu, c) in &self.terms {
            out.add_term(mu.clone(), f(c));
        }
        out
    }
}

impl PowerSumPoly<CRational> {
    /// Number of variables when `nvars` is a positive integer.
    pub fn nvars_usize(&self) -> Option<usize> {
        let n = &self.nvars;
        if n.im != num_traits::Zero::zero() || !n.re.is_integer() {
            return None;
        }
        n.re.to_integer().to_usize()
    }

    pub fn to_json_terms(&self) -> Vec<PowerSumTerm> {
        self.terms
            .iter()
            .map(|(mu, c)| PowerSumTerm {
                mu: mu.parts().to_vec(),
                re: format_rational(&c.re),
                im: format_rational(&c.im),
            })
            .collect()
    }

    pub fn from_json_terms(terms: &[PowerSumTerm], nvars: usize) -> Result<Self> {
        let nv = super::rational::cr_int(nvars as i64);
        let mut p = Self::zero(nv);
        for t in terms {
            if t.mu.iter().any(|&x| x == 0) {
                return Err(Error::Parse("partition parts must be positive".into()));
            }
            p.add_term(Partition::new(t.mu.clone()), parse_crational(&t.re, &t.im)?);
        }
        Ok(p)
    }
}

/// JSON form of one term: `{"mu": [..], "re": "p/q", "im": "p/q"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSumTerm {
    pub mu: Vec<u32>,
    pub re: String,
    pub im: String,
}

impl<C: Coeff> fmt::Debug for PowerSumPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

impl fmt::Display for PowerSumPoly<CRational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (mu, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let re = format_rational(&c.re);
            let im = format_rational(&c.im);
            let coeff = if c.im == num_traits::Zero::zero() {
                re
            } else {
                format!("({re} + {im}i)")
            };
            if mu.is_empty() {
                write!(f, "{coeff}")?;
            } else {
                write!(f, "{coeff}*p{mu}")?;
            }
        }
        Ok(())
    }
}
