use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::UPoly;
use crate::symcore::{cr_int, cr_to_c64, format_rational, parse_crational, Coeff, CRational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKind {
    Polynomial,
    Rational,
}

/// Matrix-model potential.
///
/// Polynomial: `V(x) = sum_{k=1}^{d+1} t_k x^k / k`, stored as
/// `t = [t_1, .., t_{d+1}]` with `t_{d+1} != 0`, `d >= 1`.
///
/// Rational: `V'(x) = R(x) / D(x)` with `R, D` coprime and `D` monic.
/// `d = deg V'` counts pole orders, finite ones (`deg D`) plus the one at
/// infinity (`max(0, deg R - deg D)`).
#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    Polynomial { t: Vec<CRational> },
    Rational { r: UPoly, d: UPoly },
}

impl Potential {
    pub fn polynomial(t: Vec<CRational>) -> Result<Self> {
        let mut t = t;
        while t.last().is_some_and(Coeff::is_zero) {
            t.pop();
        }
        if t.len() < 2 {
            return Err(Error::InvalidPotential(
                "field 't': need degree >= 2 with nonzero leading t_{d+1}".into(),
            ));
        }
        Ok(Potential::Polynomial { t })
    }

    /// Polynomial potential from small integer coefficients `t_1, t_2, ..`.
    pub fn from_ints(t: &[i64]) -> Result<Self> {
        Self::polynomial(t.iter().map(|&v| cr_int(v)).collect())
    }

    pub fn rational(r: Vec<CRational>, d: Vec<CRational>) -> Result<Self> {
        let r = UPoly::new(r);
        let d = UPoly::new(d);
        if d.is_zero() {
            return Err(Error::InvalidPotential("field 'd': denominator is zero".into()));
        }
        if r.is_zero() {
            return Err(Error::InvalidPotential("field 'r': numerator is zero".into()));
        }
        if d.leading() != cr_int(1) {
            return Err(Error::InvalidPotential("field 'd': denominator must be monic".into()));
        }
        if r.gcd(&d).degree() != Some(0) {
            return Err(Error::InvalidPotential(
                "fields 'r'/'d': numerator and denominator are not coprime".into(),
            ));
        }
        let v = Potential::Rational { r, d };
        if v.degree() == 0 {
            return Err(Error::InvalidPotential("V' has no poles (degree 0)".into()));
        }
        Ok(v)
    }

    pub fn kind(&self) -> PotentialKind {
        match self {
            Potential::Polynomial { .. } => PotentialKind::Polynomial,
            Potential::Rational { .. } => PotentialKind::Rational,
        }
    }

    /// `d = deg V'`, the dimension of the one-arc homology space.
    pub fn degree(&self) -> usize {
        match self {
            Potential::Polynomial { t } => t.len() - 1,
            Potential::Rational { r, d } => {
                let dr = r.degree().unwrap_or(0);
                let dd = d.degree().unwrap_or(0);
                dd + dr.saturating_sub(dd)
            }
        }
    }

    /// `(shift, leading)` such that `Q_{(mu_1 - shift, ..)}` has the strictly
    /// dominant term `leading * p_{mu}`; `None` when no such term exists
    /// (rational `V'` with `deg R <= deg D`).
    pub fn reduction_step(&self) -> Option<(u32, CRational)> {
        match self {
            Potential::Polynomial { t } => Some(((t.len() - 1) as u32, t.last().unwrap().clone())),
            Potential::Rational { r, d } => {
                let dr = r.degree()?;
                let dd = d.degree()?;
                (dr > dd).then(|| (dr as u32, r.leading()))
            }
        }
    }

    /// Coefficients of `V'(x)` when `V` is a polynomial.
    pub fn vprime_coeffs(&self) -> Option<&[CRational]> {
        match self {
            Potential::Polynomial { t } => Some(t),
            Potential::Rational { .. } => None,
        }
    }

    pub fn vprime_c64(&self) -> Option<Vec<Complex64>> {
        self.vprime_coeffs().map(|t| t.iter().map(cr_to_c64).collect())
    }

    pub fn to_json(&self) -> PotentialJson {
        let pairs = |v: &[CRational]| {
            v.iter()
                .map(|c| CoeffJson::Pair([format_rational(&c.re), format_rational(&c.im)]))
                .collect::<Vec<_>>()
        };
        match self {
            Potential::Polynomial { t } => PotentialJson {
                kind: PotentialKind::Polynomial,
                t: Some(pairs(t)),
                r: None,
                d: None,
            },
            Potential::Rational { r, d } => PotentialJson {
                kind: PotentialKind::Rational,
                t: None,
                r: Some(pairs(r.coeffs())),
                d: Some(pairs(d.coeffs())),
            },
        }
    }

    pub fn from_json(js: &PotentialJson) -> Result<Self> {
        let field = |name: &str, v: &Option<Vec<CoeffJson>>| -> Result<Vec<CRational>> {
            let v = v
                .as_ref()
                .ok_or_else(|| Error::InvalidPotential(format!("missing field '{name}'")))?;
            v.iter()
                .enumerate()
                .map(|(i, c)| {
                    c.parse().map_err(|e| {
                        Error::InvalidPotential(format!("field '{name}[{i}]': {e}"))
                    })
                })
                .collect()
        };
        match js.kind {
            PotentialKind::Polynomial => Self::polynomial(field("t", &js.t)?),
            PotentialKind::Rational => Self::rational(field("r", &js.r)?, field("d", &js.d)?),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let js: PotentialJson = serde_json::from_str(s)
            .map_err(|e| Error::InvalidPotential(format!("malformed potential JSON: {e}")))?;
        Self::from_json(&js)
    }
}

/// On-disk form: `{"kind":"polynomial","t":[["0","0"],["1","0"]]}` with
/// `t_k` for `k = 1, 2, ..` as `[re, im]` rational strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialJson {
    pub kind: PotentialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<CoeffJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<CoeffJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<CoeffJson>>,
}

/// A coefficient: `["re", "im"]`, or a bare real `"p/q"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffJson {
    Pair([String; 2]),
    Real(String),
}

impl CoeffJson {
    fn parse(&self) -> Result<CRational> {
        match self {
            CoeffJson::Pair([re, im]) => parse_crational(re, im),
            CoeffJson::Real(re) => parse_crational(re, "0"),
        }
    }
}
