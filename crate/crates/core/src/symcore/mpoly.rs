use std::collections::BTreeMap;
use std::fmt;

use super::rational::{cr_int, format_rational, Coeff, CRational};

/// Sparse multivariate Laurent polynomial with Gaussian-rational
/// coefficients. Variables are identified by index; exponent vectors are
/// stored without trailing zeros.
#[derive(Clone, PartialEq, Default)]
pub struct MPoly {
    terms: BTreeMap<Vec<i32>, CRational>,
}

fn trim(mut e: Vec<i32>) -> Vec<i32> {
    while e.last() == Some(&0) {
        e.pop();
    }
    e
}

impl MPoly {
    pub fn constant(c: CRational) -> Self {
        let mut p = MPoly::default();
        p.add_monomial(Vec::new(), c);
        p
    }

    /// The variable with index `i` raised to `power`.
    pub fn var_pow(i: usize, power: i32) -> Self {
        let mut e = vec![0; i + 1];
        e[i] = power;
        let mut p = MPoly::default();
        p.add_monomial(e, cr_int(1));
        p
    }

    pub fn var(i: usize) -> Self {
        Self::var_pow(i, 1)
    }

    pub fn add_monomial(&mut self, exps: Vec<i32>, c: CRational) {
        if Coeff::is_zero(&c) {
            return;
        }
        let e = trim(exps);
        match self.terms.get_mut(&e) {
            Some(v) => {
                *v = &*v + &c;
                if Coeff::is_zero(v) {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i32>, &CRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Exponent of variable `i` in an exponent vector.
    pub fn exponent(exps: &[i32], i: usize) -> i32 {
        exps.get(i).copied().unwrap_or(0)
    }

    /// Splits by the power of variable `i`: `self = sum_k var_i^k * part_k`.
    pub fn split_by(&self, i: usize) -> BTreeMap<i32, MPoly> {
        let mut out: BTreeMap<i32, MPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let k = Self::exponent(e, i);
            let mut rest = e.clone();
            if i < rest.len() {
                rest[i] = 0;
            }
            out.entry(k).or_default().add_monomial(rest, c.clone());
        }
        out
    }

    /// Substitutes numeric values for the variables listed in `values`
    /// (index, value); remaining variables stay symbolic.
    pub fn substitute(&self, values: &[(usize, CRational)]) -> MPoly {
        let mut out = MPoly::default();
        for (e, c) in &self.terms {
            let mut coeff = c.clone();
            let mut exps = e.clone();
            for (i, v) in values {
                let k = Self::exponent(e, *i);
                if k == 0 {
                    continue;
                }
                let base = if k > 0 { v.clone() } else { cr_int(1) / v };
                for _ in 0..k.unsigned_abs() {
                    coeff = &coeff * &base;
                }
                exps[*i] = 0;
            }
            out.add_monomial(exps, coeff);
        }
        out
    }

    /// Constant term if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<CRational> {
        match self.terms.len() {
            0 => Some(cr_int(0)),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    /// Human-readable form with the given variable names.
    pub fn display_with(&self, names: &[&str]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut pieces = Vec::new();
        for (e, c) in self.terms.iter().rev() {
            let re = format_rational(&c.re);
            let coeff = if c.im == num_traits::Zero::zero() {
                re
            } else {
                format!("({re} + {}i)", format_rational(&c.im))
            };
            let mut mono = Vec::new();
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let name = names.get(i).copied().unwrap_or("?");
                if k == 1 {
                    mono.push(name.to_string());
                } else {
                    mono.push(format!("{name}^{k}"));
                }
            }
            if mono.is_empty() {
                pieces.push(coeff);
            } else if coeff == "1" {
                pieces.push(mono.join("*"));
            } else if coeff == "-1" {
                pieces.push(format!("-{}", mono.join("*")));
            } else {
                pieces.push(format!("{coeff}*{}", mono.join("*")));
            }
        }
        pieces.join(" + ").replace("+ -", "- ")
    }
}

impl Coeff for MPoly {
    fn zero() -> Self {
        MPoly::default()
    }
    fn one() -> Self {
        MPoly::constant(cr_int(1))
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn from_i64(v: i64) -> Self {
        MPoly::constant(cr_int(v))
    }
    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_monomial(e.clone(), c.clone());
        }
        out
    }
    fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_monomial(e.clone(), -c.clone());
        }
        out
    }
    fn mul(&self, other: &Self) -> Self {
        let mut out = MPoly::default();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let n = ea.len().max(eb.len());
                let e: Vec<i32> = (0..n)
                    .map(|i| Self::exponent(ea, i) + Self::exponent(eb, i))
                    .collect();
                out.add_monomial(e, ca * cb);
            }
        }
        out
    }
    fn neg(&self) -> Self {
        let mut out = MPoly::default();
        for (e, c) in &self.terms {
            out.add_monomial(e.clone(), -c.clone());
        }
        out
    }
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(&["x0", "x1", "x2", "x3", "x4", "x5", "x6", "x7"]))
    }
}
