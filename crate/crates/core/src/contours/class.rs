use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{basis_arcs, Contour};
use crate::error::{Error, Result};
use crate::loopgen::Potential;
use crate::symcore::{compositions, format_rational, parse_crational, Coeff, CRational};

/// Formal combination `sum_n c_n gamma^n` of symmetrized products of arcs.
///
/// `gamma^n` is the sum over the distinct ways of placing `n_1` variables on
/// `arcs[0]`, `n_2` on `arcs[1]`, and so on. With this normalization
/// `(sum_j c_j gamma_j)^N = sum_n prod_j c_j^{n_j} gamma^n`, and a single arc
/// `gamma` gives `gamma^(N) = gamma^N`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomologyClass {
    n: usize,
    arcs: Vec<Contour>,
    terms: BTreeMap<Vec<usize>, CRational>,
}

impl HomologyClass {
    pub fn zero(n: usize, arcs: Vec<Contour>) -> Self {
        HomologyClass { n, arcs, terms: BTreeMap::new() }
    }

    /// The basis element `gamma^comp`.
    pub fn basis(n: usize, arcs: Vec<Contour>, comp: Vec<usize>) -> Result<Self> {
        let mut c = Self::zero(n, arcs);
        c.add_term(comp, <CRational as Coeff>::one())?;
        Ok(c)
    }

    /// `(sum_j c_j gamma_j)^N` expanded on the basis.
    pub fn power(n: usize, arcs: Vec<Contour>, coeffs: &[CRational]) -> Result<Self> {
        if coeffs.len() != arcs.len() {
            return Err(Error::LengthMismatch { expected: arcs.len(), got: coeffs.len() });
        }
        let mut c = Self::zero(n, arcs);
        for comp in compositions(n, coeffs.len()) {
            let mut w = <CRational as Coeff>::one();
            for (cj, &nj) in coeffs.iter().zip(&comp) {
                for _ in 0..nj {
                    w = &w * cj;
                }
            }
            c.add_term(comp, w)?;
        }
        Ok(c)
    }

    /// `Gamma = R^N` as a one-arc class.
    pub fn real_line(n: usize) -> Self {
        Self::basis(n, vec![Contour::real_line()], vec![n]).expect("valid composition")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[Contour] {
        &self.arcs
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &CRational)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, comp: Vec<usize>, c: CRational) -> Result<()> {
        if comp.len() != self.arcs.len() {
            return Err(Error::LengthMismatch { expected: self.arcs.len(), got: comp.len() });
        }
        if comp.iter().sum::<usize>() != self.n {
            return Err(Error::Precondition(format!(
                "composition {comp:?} does not sum to N = {}",
                self.n
            )));
        }
        let e = self.terms.entry(comp.clone()).or_insert_with(<CRational as Coeff>::zero);
        *e = &*e + c;
        if Coeff::is_zero(e) {
            self.terms.remove(&comp);
        }
        Ok(())
    }

    /// `a * self + b * other` for classes on the same arcs.
    pub fn combine(&self, a: &CRational, other: &HomologyClass, b: &CRational) -> Result<Self> {
        if self.arcs != other.arcs || self.n != other.n {
            return Err(Error::Precondition("classes live on different arc bases".into()));
        }
        let mut out = Self::zero(self.n, self.arcs.clone());
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c * a)?;
        }
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c * b)?;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> ClassJson {
        ClassJson {
            terms: self
                .terms
                .iter()
                .map(|(n, c)| ClassTerm { n: n.clone(), re: format_rational(&c.re), im: format_rational(&c.im) })
                .collect(),
            arcs: None,
        }
    }

    /// Builds a class from JSON. `arcs` selects the arc basis: `"basis"`
    /// (default, [`basis_arcs`]), `"real_line"` or `"unit_circle"`.
    pub fn from_json(js: &ClassJson, n: usize, v: &Potential) -> Result<Self> {
        let arcs = match js.arcs.as_deref().unwrap_or("basis") {
            "basis" => basis_arcs(v)?,
            "real_line" => vec![Contour::real_line()],
            "unit_circle" => vec![Contour::circle(num_complex::Complex64::new(0.0, 0.0), 1.0)],
            other => return Err(Error::Parse(format!("field 'arcs': unknown arc set '{other}'"))),
        };
        let mut c = Self::zero(n, arcs);
        for t in &js.terms {
            c.add_term(t.n.clone(), parse_crational(&t.re, &t.im)?)?;
        }
        Ok(c)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassTerm {
    pub n: Vec<usize>,
    #[serde(default = "one_str")]
    pub re: String,
    #[serde(default = "zero_str")]
    pub im: String,
}

fn one_str() -> String {
    "1".into()
}

fn zero_str() -> String {
    "0".into()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassJson {
    pub terms: Vec<ClassTerm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arcs: Option<String>,
}
