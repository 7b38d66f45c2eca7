//! Saddle points of `V_r = V - r log x` and the discriminating symmetric
//! polynomials `p_{r,m}` whose normalized expectations tend to `delta_{n,m}`.
//!
//! Each saddle `xi_j` gets the ray from `0` through `xi_j` as its arc. For
//! large `r` the ray lies inside an admissible sector and is homotopic to the
//! steepest-descent arc through `xi_j`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::contours::Weight;
use crate::error::{Error, Result};
use crate::loopgen::Potential;
use crate::poly::{horner, roots};
use crate::quad::rules::adaptive;
use crate::symcore::{compositions, cr_to_c64, Coeff};


/// Largest eigenvalue count handled by the discriminator.
pub const MAX_N: usize = 2;

/// Pole a saddle approaches as `r` grows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PoleAssoc {
    /// Large saddle; the `(xi - p)` factors use `p = 0`.
    Infinity,
    Finite { at: [f64; 2] },
}

#[derive(Clone, Debug)]
pub struct SaddleSet {
    pub r: u32,
    /// Roots of `x V'(x) = r`, sorted by argument in `(-pi, pi]`.
    pub xi: Vec<Complex64>,
    /// `Q'(xi_j)` for `Q(x) = prod_j (x - xi_j)`.
    pub q_prime: Vec<Complex64>,
    pub vr_values: Vec<Complex64>,
    pub vr_second: Vec<Complex64>,
    pub pole_assoc: Vec<PoleAssoc>,
}

impl SaddleSet {
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    /// `V_r''(xi_j)^{-1/2}` on the branch fixed by the ray through `xi_j`:
    /// the Gaussian integral along direction `alpha` is
    /// `e^{i alpha} sqrt(2 pi) / sqrt(V'' e^{2 i alpha})`.
    pub fn inv_sqrt_second(&self, j: usize) -> Complex64 {
        let rot = Complex64::from_polar(1.0, self.xi[j].arg());
        rot / (self.vr_second[j] * rot * rot).sqrt()
    }

    /// Indices of the `len() - 1` saddles with the smallest `Re V_r`.
    pub fn dominant(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.vr_values[a].re.total_cmp(&self.vr_values[b].re));
        idx.truncate(self.len().saturating_sub(1).max(1));
        idx.sort_unstable();
        idx
    }
}

/// `V = P(x) + c log x` data used by the discriminator.
struct LogPotential {
    weight: Weight,
    /// Coefficients of `x V'(x)`.
    xvprime: Vec<Complex64>,
}

impl LogPotential {
    fn new(v: &Potential) -> Result<Self> {
        let weight = Weight::new(v)?;
        let xvprime = match v {
            Potential::Polynomial { t } => {
                let mut c = vec![Complex64::new(0.0, 0.0)];
                c.extend(t.iter().map(cr_to_c64));
                c
            }
            Potential::Rational { r, d } => {
                let pole_at_zero = d.degree() == Some(1) && d.coeffs()[0].is_zero();
                if !pole_at_zero {
                    return Err(Error::Unsupported(
                        "discriminator supports rational V' only with a single pole at 0".into(),
                    ));
                }
                if r.degree().unwrap_or(0) < 2 {
                    return Err(Error::Unsupported("discriminator needs V to grow at infinity".into()));
                }
                r.to_c64()
            }
        };
        Ok(LogPotential { weight, xvprime })
    }

    fn v(&self, x: Complex64) -> Complex64 {
        -self.weight.log_weight(x)
    }

    fn v_second(&self, x: Complex64) -> Complex64 {
        let p = &self.weight.poly;
        let mut s = Complex64::new(0.0, 0.0);
        for k in (2..p.len()).rev() {
            s = s * x + p[k] * (k * (k - 1)) as f64;
        }
        for &(pole, res) in &self.weight.poles {
            s -= res as f64 / ((x - pole) * (x - pole));
        }
        s
    }
}

/// Saddle points of `V_r = V - r log x`: the roots of `x V'(x) = r`.
pub fn saddle_points(v: &Potential, r: u32) -> Result<SaddleSet> {
    if r == 0 {
        return Err(Error::Precondition("r must be at least 1".into()));
    }
    let lp = LogPotential::new(v)?;
    saddles_of(&lp, r)
}

fn saddles_of(lp: &LogPotential, r: u32) -> Result<SaddleSet> {
    let rf = r as f64;
    let mut eq = lp.xvprime.clone();
    eq[0] -= rf;
    let mut xi = roots(&eq);
    // negative reals may carry a -0 imaginary part; keep them at +pi
    let key = |z: &Complex64| {
        let a = z.arg();
        if a <= -std::f64::consts::PI + 1e-12 { std::f64::consts::PI } else { a }
    };
    xi.sort_by(|a, b| key(a).total_cmp(&key(b)));
    let scale = xi.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for i in 0..xi.len() {
        for j in 0..i {
            if (xi[i] - xi[j]).norm() < 1e-6 * scale {
                return Err(Error::CoincidentSaddles { r });
            }
        }
        if xi[i].norm() == 0.0 {
            return Err(Error::CoincidentSaddles { r });
        }
    }
    for z in &xi {
        let res = (horner(&lp.xvprime, *z) - rf).norm();
        if res >= 1e-9 * rf {
            return Err(Error::Quadrature {
                achieved: res,
                requested: 1e-9 * rf,
                context: format!("saddle residual |xi V'(xi) - r| at xi = {z}"),
            });
        }
    }
    let q_prime = (0..xi.len())
        .map(|j| (0..xi.len()).filter(|&i| i != j).map(|i| xi[j] - xi[i]).product())
        .collect();
    let vr_values = xi.iter().map(|&z| lp.v(z) - z.ln() * rf).collect();
    let vr_second = xi.iter().map(|&z| lp.v_second(z) + rf / (z * z)).collect();
    let pole_assoc = vec![PoleAssoc::Infinity; xi.len()];
    Ok(SaddleSet { r, xi, q_prime, vr_values, vr_second, pole_assoc })
}

/// Lagrange polynomial `f_j(x) = prod_{i != j} (x - xi_i) / (xi_j - xi_i)`,
/// evaluated pointwise.
#[derive(Clone, Debug)]
pub struct LagrangeF {
    pub j: usize,
    nodes: Vec<Complex64>,
    inv_denom: Complex64,
}

impl LagrangeF {
    pub fn eval(&self, x: Complex64) -> Complex64 {
        let mut p = self.inv_denom;
        for (i, &z) in self.nodes.iter().enumerate() {
            if i != self.j {
                p *= x - z;
            }
        }
        p
    }
}

pub fn lagrange_f(s: &SaddleSet) -> Vec<LagrangeF> {
    (0..s.len())
        .map(|j| LagrangeF { j, nodes: s.xi.clone(), inv_denom: 1.0 / s.q_prime[j] })
        .collect()
}

/// `ln C_n` for `C_n = int_{R^n} prod_{i<j} (x_i - x_j)^2 prod_i e^{-x_i^2/2} dx_i
/// = (2 pi)^{n/2} prod_{k=1}^{n} k!`.
pub fn ln_c(n: usize) -> f64 {
    let mut s = 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
    for k in 1..=n {
        s += (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
    }
    s
}

/// `ln A(n)` without the `Q'(xi_j)^{n_j}` factors.
///
/// Inside a cluster of `n_j` eigenvalues the Gaussian integral in the
/// original variables already produces `V_r''^{-n_j^2/2} C_{n_j}`, so no
/// separate `r^{-n_j(n_j-1)/2} xi_j^{n_j(n_j-1)}` factor appears.
fn ln_a_reduced(s: &SaddleSet, n: &[usize]) -> Complex64 {
    let mut l = Complex64::new(0.0, 0.0);
    for i in 0..n.len() {
        for j in i + 1..n.len() {
            if n[i] * n[j] > 0 {
                l += (s.xi[i] - s.xi[j]).ln() * (2 * n[i] * n[j]) as f64;
            }
        }
    }
    for (j, &nj) in n.iter().enumerate() {
        if nj == 0 {
            continue;
        }
        l -= s.vr_values[j] * nj as f64;
        l += s.inv_sqrt_second(j).ln() * (nj * nj) as f64;
        l += ln_c(nj);
    }
    l
}

/// `ln A(n)` including the `Q'(xi_j)^{n_j}` factors.
pub fn ln_a(s: &SaddleSet, n: &[usize]) -> Complex64 {
    let mut l = ln_a_reduced(s, n);
    for (j, &nj) in n.iter().enumerate() {
        if nj > 0 {
            l += s.q_prime[j].ln() * nj as f64;
        }
    }
    l
}

/// Normalized ray integrals
/// `J[j][i][a] = e^{V_r(xi_j)} int_0^{inf e^{i arg xi_j}} x^{r+a} f_i(x) e^{-V(x)} dx`.
struct RayIntegrals {
    value: Vec<Vec<Vec<Complex64>>>,
    err: Vec<Vec<Vec<f64>>>,
}

fn ray_integrals(lp: &LogPotential, s: &SaddleSet, powers: usize, tol: f64) -> Result<RayIntegrals> {
    let fs = lagrange_f(s);
    let nf = fs.len();
    let rf = s.r as f64;
    let per_ray: Vec<Result<(Vec<Vec<Complex64>>, Vec<Vec<f64>>)>> = (0..s.len())
        .into_par_iter()
        .map(|j| {
            let alpha = s.xi[j].arg();
            if !lp.weight.decays_along(alpha) {
                return Err(Error::Unsupported(format!(
                    "ray through saddle {j} (angle {alpha:.4}) leaves the admissible sectors; increase r"
                )));
            }
            let dir = Complex64::from_polar(1.0, alpha);
            let shift = s.vr_values[j];
            let exponent = |t: f64| -> Complex64 {
                let x = dir * t;
                Complex64::new(rf * t.ln(), rf * alpha) + lp.weight.log_weight(x) + shift
            };
            let rho = s.xi[j].norm();
            let mut hi = 2.0 * rho;
            let margin = (tol * 1e-6).ln() - 2.0 * powers as f64 * hi.ln().max(0.0);
            while exponent(hi).re > margin || exponent(2.0 * hi).re > margin {
                hi *= 2.0;
                if hi > 1e6 * rho.max(1.0) {
                    return Err(Error::Quadrature {
                        achieved: f64::INFINITY,
                        requested: tol,
                        context: format!("no decay found along the ray through saddle {j}"),
                    });
                }
            }
            let dim = nf * powers;
            let f = |t: f64, out: &mut [Complex64]| {
                let x = dir * t;
                let w = exponent(t).exp() * dir;
                let mut xa = w;
                let fv: Vec<Complex64> = fs.iter().map(|f| f.eval(x)).collect();
                for a in 0..powers {
                    for i in 0..nf {
                        out[i * powers + a] = fv[i] * xa;
                    }
                    xa *= x;
                }
            };
            let res = adaptive(&f, dim, 0.0, hi, 64, tol, 0.0, 20_000).map_err(|e| match e {
                Error::Quadrature { achieved, requested, context } => Error::Quadrature {
                    achieved,
                    requested,
                    context: format!("ray through saddle {j} at r = {}: {context}", s.r),
                },
                other => other,
            })?;
            let mut val = vec![vec![Complex64::new(0.0, 0.0); powers]; nf];
            let mut err = vec![vec![0.0; powers]; nf];
            for i in 0..nf {
                for a in 0..powers {
                    val[i][a] = res.value[i * powers + a];
                    err[i][a] = res.err[i * powers + a];
                }
            }
            Ok((val, err))
        })
        .collect();
    let mut value = Vec::new();
    let mut err = Vec::new();
    for r in per_ray {
        let (v, e) = r?;
        value.push(v);
        err.push(e);
    }
    Ok(RayIntegrals { value, err })
}

/// Monomial expansion of `prod_{i<j} (x_i - x_j)^2` as exponent vectors.
fn vandermonde_squared(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut terms: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    terms.insert(vec![0; n], 1.0);
    for i in 0..n {
        for j in i + 1..n {
            for _ in 0..2 {
                let mut next = BTreeMap::new();
                for (e, c) in &terms {
                    let mut a = e.clone();
                    a[i] += 1;
                    *next.entry(a).or_insert(0.0) += c;
                    let mut b = e.clone();
                    b[j] += 1;
                    *next.entry(b).or_insert(0.0) -= c;
                }
                terms = next;
            }
        }
    }
    terms.into_iter().filter(|(_, c)| *c != 0.0).collect()
}

/// Distinct orderings of the multiset with counts `m`.
fn assignments(m: &[usize]) -> Vec<Vec<usize>> {
    fn rec(left: &mut Vec<usize>, cur: &mut Vec<usize>, total: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == total {
            out.push(cur.clone());
            return;
        }
        for j in 0..left.len() {
            if left[j] > 0 {
                left[j] -= 1;
                cur.push(j);
                rec(left, cur, total, out);
                cur.pop();
                left[j] += 1;
            }
        }
    }
    let mut out = Vec::new();
    let total = m.iter().sum();
    rec(&mut m.to_vec(), &mut Vec::new(), total, &mut out);
    out
}

fn canonical(n: &[usize]) -> Vec<usize> {
    n.iter().enumerate().flat_map(|(j, &c)| std::iter::repeat(j).take(c)).collect()
}

fn multinomial(n: &[usize]) -> f64 {
    let mut c = 1.0;
    let mut k = 0usize;
    for &nj in n {
        for i in 1..=nj {
            k += 1;
            c *= k as f64 / i as f64;
        }
    }
    c
}

/// Ratio `E_{gamma^n}(p_{r,m}) prod_j Q'(xi_j)^{m_j} / A(m)` with its
/// propagated quadrature error.
fn ratio_from(s: &SaddleSet, ints: &RayIntegrals, vdm: &[(Vec<usize>, f64)], n: &[usize], m: &[usize]) -> (Complex64, f64) {
    let arcs = canonical(n);
    let maps = assignments(m);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for sm in &maps {
        for (exps, c) in vdm {
            let mut prod = Complex64::new(*c, 0.0);
            let mut abs = c.abs();
            let mut rel = 0.0;
            for i in 0..arcs.len() {
                let v = ints.value[arcs[i]][sm[i]][exps[i]];
                let e = ints.err[arcs[i]][sm[i]][exps[i]];
                prod *= v;
                abs *= v.norm();
                rel += e / v.norm().max(f64::MIN_POSITIVE);
            }
            sum += prod;
            err += if rel.is_finite() { abs * rel } else { f64::INFINITY };
        }
    }
    let norm = multinomial(n) / maps.len() as f64;
    let mut log_scale = -ln_a_reduced(s, m);
    for &a in &arcs {
        log_scale -= s.vr_values[a];
    }
    let scale = log_scale.exp() * norm;
    (sum * scale, err * scale.norm())
}

fn check_composition(c: &[usize], len: usize, n_eig: usize, name: &str) -> Result<()> {
    if c.len() != len {
        return Err(Error::LengthMismatch { expected: len, got: c.len() });
    }
    if c.iter().sum::<usize>() != n_eig {
        return Err(Error::Precondition(format!("composition {name} must sum to N = {n_eig}")));
    }
    Ok(())
}

/// `E_{gamma^n}(p_{r,m}) prod_j Q'(xi_j)^{m_j} / A(m)`, which tends to
/// `delta_{n,m}` as `r -> infinity` whenever `m` dominates `n`.
pub fn discriminator_ratio(n: &[usize], m: &[usize], r: u32, v: &Potential, tol: f64) -> Result<Complex64> {
    let n_eig: usize = n.iter().sum();
    if n_eig == 0 || n_eig > MAX_N {
        return Err(Error::Cap(format!("discriminator supports 1 <= N <= {MAX_N}")));
    }
    let lp = LogPotential::new(v)?;
    let s = saddles_of(&lp, r)?;
    check_composition(n, s.len(), n_eig, "n")?;
    check_composition(m, s.len(), n_eig, "m")?;
    let ints = ray_integrals(&lp, &s, 2 * n_eig - 1, tol)?;
    Ok(ratio_from(&s, &ints, &vandermonde_squared(n_eig), n, m).0)
}

#[derive(Clone, Debug, Serialize)]
pub struct PairEntry {
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub ratio: [f64; 2],
    pub ratio_err: f64,
    pub delta: f64,
    pub deviation: f64,
    /// `|A(n)| <= |A(m)|` at this `r` (or `n = m`).
    pub m_dominates: bool,
    /// Both compositions are supported on the dominant saddles and `m`
    /// dominates `n`; these ratios must approach `delta_{n,m}`.
    pub in_window: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SaddleJson {
    pub xi: [f64; 2],
    pub q_prime: [f64; 2],
    pub vr: [f64; 2],
    pub vr_second: [f64; 2],
    pub pole: PoleAssoc,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscriminatorReport {
    pub r: u32,
    pub n: usize,
    pub tolerance: f64,
    pub saddles: Vec<SaddleJson>,
    pub dominant: Vec<usize>,
    pub pairs: Vec<PairEntry>,
    /// Largest `|ratio - delta|` over the window pairs.
    pub max_window_deviation: f64,
}

impl DiscriminatorReport {
    pub fn window(&self) -> impl Iterator<Item = &PairEntry> {
        self.pairs.iter().filter(|p| p.in_window)
    }

    pub fn pair(&self, n: &[usize], m: &[usize]) -> Option<&PairEntry> {
        self.pairs.iter().find(|p| p.n == n && p.m == m)
    }
}

fn c2(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Ratios for every pair of compositions of `n_eig` over the saddles.
pub fn discriminator_report(v: &Potential, n_eig: usize, r: u32, tol: f64) -> Result<DiscriminatorReport> {
    if n_eig == 0 || n_eig > MAX_N {
        return Err(Error::Cap(format!("discriminator supports 1 <= N <= {MAX_N}")));
    }
    let lp = LogPotential::new(v)?;
    let s = saddles_of(&lp, r)?;
    let ints = ray_integrals(&lp, &s, 2 * n_eig - 1, tol)?;
    let vdm = vandermonde_squared(n_eig);
    let dominant = s.dominant();
    let comps = compositions(n_eig, s.len());
    let in_dom = |c: &[usize]| c.iter().enumerate().all(|(j, &k)| k == 0 || dominant.contains(&j));
    let mut pairs = Vec::new();
    for n in &comps {
        for m in &comps {
            let (ratio, ratio_err) = ratio_from(&s, &ints, &vdm, n, m);
            let delta = if n == m { 1.0 } else { 0.0 };
            let m_dominates = n == m || ln_a(&s, n).re <= ln_a(&s, m).re;
            pairs.push(PairEntry {
                n: n.clone(),
                m: m.clone(),
                ratio: c2(ratio),
                ratio_err,
                delta,
                deviation: (ratio - delta).norm(),
                m_dominates,
                in_window: m_dominates && in_dom(n) && in_dom(m),
            });
        }
    }
    let max_window_deviation = pairs.iter().filter(|p| p.in_window).map(|p| p.deviation).fold(0.0, f64::max);
    let saddles = (0..s.len())
        .map(|j| SaddleJson {
            xi: c2(s.xi[j]),
            q_prime: c2(s.q_prime[j]),
            vr: c2(s.vr_values[j]),
            vr_second: c2(s.vr_second[j]),
            pole: s.pole_assoc[j],
        })
        .collect();
    Ok(DiscriminatorReport { r, n: n_eig, tolerance: tol, saddles, dominant, pairs, max_window_deviation })
}
