//! Eigenvalue integrals `E_Gamma(p) = int_Gamma p Delta^2 prod e^{-V(x_i)} dx_i`.
//!
//! One-dimensional arc moments `m_a(k) = int_{gamma_a} x^k e^{-V} dx` are
//! computed once per arc; products of them assemble the `N`-dimensional
//! integral through the expansion
//! `Delta^2 = sum_{s,t} sgn(s) sgn(t) prod_i x_i^{s(i) + t(i)}`.

pub(crate) mod rules;

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use rules::{adaptive, periodic, VecIntegral};

use crate::contours::{basis_arcs, Contour, HomologyClass, Weight};
use crate::error::{Error, Result};
use crate::loopgen::Potential;
use crate::symcore::{compositions, cr_to_c64, partitions_in_box, Partition, PowerSumPoly};

/// Largest supported number of eigenvalues.
pub const MAX_N: usize = 5;
/// Largest supported number of parts in a power-sum product.
pub const MAX_PARTS: usize = 6;

const MAX_PIECES: usize = 4000;
const MAX_PERIODIC_NODES: usize = 1 << 16;
/// Rays are cut where the integrand bound falls below this fraction of its peak.
const TAIL: f64 = 1e-18;

/// Value with an absolute error bound and a magnitude scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub re: f64,
    pub im: f64,
    pub err: f64,
    /// Bound on the integral of the absolute value of the integrand; the
    /// natural scale for cancellations such as symmetric zeros.
    #[serde(default)]
    pub scale: f64,
}

impl Estimate {
    pub fn new(value: Complex64, err: f64) -> Self {
        Estimate { re: value.re, im: value.im, err, scale: value.norm() }
    }

    pub fn with_scale(value: Complex64, err: f64, scale: f64) -> Self {
        Estimate { re: value.re, im: value.im, err, scale: scale.max(value.norm()) }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Parameter where `(1 + |x|)^kmax |e^{-V(x)}|` has dropped below
/// `TAIL` times its running peak for good.
fn ray_cutoff(c: &Contour, seg: usize, w: &Weight, kmax: u32) -> f64 {
    let bound = |s: f64| {
        let (x, _) = c.eval(seg, s);
        w.log_weight(x).re + kmax as f64 * (1.0 + x.norm()).ln()
    };
    let drop = TAIL.ln();
    let mut peak = bound(0.0);
    let mut s = 0.0;
    let mut step = 0.05;
    let mut below = 0;
    while s < 1e6 {
        s += step;
        step *= 1.15;
        let b = bound(s);
        if b > peak {
            peak = b;
            below = 0;
        } else if b < peak + drop {
            below += 1;
            if below >= 3 {
                return s;
            }
        } else {
            below = 0;
        }
    }
    s
}

/// Moments `int_c x^k e^{-V} dx` for `k = 0..=kmax`, with absolute error
/// estimates meeting `rel_tol` relative to the scale `int |x^k e^{-V} dx|`.
pub fn arc_moments(c: &Contour, w: &Weight, kmax: u32, rel_tol: f64) -> Result<Vec<Estimate>> {
    let dim = kmax as usize + 1;
    let mut total = VecIntegral::zeros(dim);
    for (i, seg) in c.segments.iter().enumerate() {
        let f = |s: f64, out: &mut [Complex64]| {
            let (x, dx) = c.eval(i, s);
            let mut v = w.eval(x) * dx;
            if !v.is_finite() {
                v = Complex64::new(0.0, 0.0);
            }
            for o in out.iter_mut() {
                *o = v;
                v *= x;
            }
        };
        let part = if seg.is_closed() {
            periodic(&f, dim, rel_tol, 0.0, MAX_PERIODIC_NODES)?
        } else if seg.is_ray() {
            let smax = ray_cutoff(c, i, w, kmax);
            adaptive(&f, dim, 0.0, smax, 16, rel_tol, 0.0, MAX_PIECES)?
        } else {
            adaptive(&f, dim, 0.0, 1.0, 4, rel_tol, 0.0, MAX_PIECES)?
        };
        total.accumulate(&part, seg.sign());
    }
    Ok((0..dim)
        .map(|k| {
            // truncated tails are below TAIL times the peak
            let tail = TAIL * total.l1[k];
            Estimate::with_scale(total.value[k], total.err[k] + tail + 1e-15 * total.l1[k], total.l1[k])
        })
        .collect())
}

/// Single moment `int_c x^k e^{-V} dx`.
pub fn arc_moment(c: &Contour, v: &Potential, k: u32, tol: f64) -> Result<(Complex64, f64)> {
    let w = Weight::new(v)?;
    let e = arc_moments(c, &w, k, tol)?[k as usize];
    Ok((e.value(), e.err))
}

/// Moments `m_a(k)` for every arc `a` and `k <= kmax`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentTable {
    pub kmax: u32,
    pub entries: Vec<Vec<Estimate>>,
}

impl MomentTable {
    /// Arcs are integrated in parallel; the table layout does not depend on
    /// scheduling.
    pub fn build(arcs: &[Contour], w: &Weight, kmax: u32, tol: f64) -> Result<Self> {
        let entries: Result<Vec<Vec<Estimate>>> = arcs
            .par_iter()
            .map(|c| arc_moments(c, w, kmax, tol))
            .collect();
        Ok(MomentTable { kmax, entries: entries? })
    }

    pub fn get(&self, arc: usize, k: u32) -> Result<(Complex64, f64)> {
        self.entry(arc, k).map(|e| (e.value(), e.err))
    }

    pub fn entry(&self, arc: usize, k: u32) -> Result<&Estimate> {
        self.entries
            .get(arc)
            .and_then(|row| row.get(k as usize))
            .ok_or(Error::MissingMoment { arc, k: k as usize })
    }

    /// CSV with columns `arc,k,re,im,err`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("arc,k,re,im,err\n");
        for (a, row) in self.entries.iter().enumerate() {
            for (k, e) in row.iter().enumerate() {
                s.push_str(&format!("{a},{k},{:e},{:e},{:e}\n", e.re, e.im, e.err));
            }
        }
        s
    }
}

/// Highest moment power an expectation of `p` needs.
pub fn required_kmax(p: &PowerSumPoly, n: usize) -> u32 {
    p.max_weight().unwrap_or(0) + 2 * (n as u32).saturating_sub(1)
}

/// Permutations of `0..n` with their signs.
fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    fn rec(k: usize, perm: &mut Vec<usize>, sign: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        if k == perm.len() {
            out.push((perm.clone(), sign));
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            rec(k + 1, perm, if i == k { sign } else { -sign }, out);
            perm.swap(k, i);
        }
    }
    rec(0, &mut perm, 1.0, &mut out);
    out
}

fn multinomial(comp: &[usize]) -> f64 {
    let mut acc = 1.0;
    let mut m = 0usize;
    for &c in comp {
        for i in 1..=c {
            m += 1;
            acc *= m as f64 / i as f64;
        }
    }
    acc
}

struct Assembler<'a> {
    table: &'a MomentTable,
    n: usize,
    perms: Vec<(Vec<usize>, f64)>,
}

impl Assembler<'_> {
    /// `int p_mu Delta^2 prod_i e^{-V(x_i)} dx_i` with variable `i` on arc
    /// `arcs[i]`, as (value, error bound, magnitude scale).
    fn canonical(&self, mu: &Partition, arcs: &[usize]) -> Result<(Complex64, f64, f64)> {
        let n = self.n;
        let parts = mu.parts();
        // group part->variable assignments by exponent vector, sorted inside
        // blocks of equal arcs (the integrand is symmetric there)
        let mut groups: HashMap<Vec<u32>, f64> = HashMap::new();
        let total = n.pow(parts.len() as u32);
        let mut e = vec![0u32; n];
        for code in 0..total {
            e.iter_mut().for_each(|x| *x = 0);
            let mut c = code;
            for &p in parts {
                e[c % n] += p;
                c /= n;
            }
            let mut key = e.clone();
            let mut start = 0;
            while start < n {
                let mut end = start;
                while end < n && arcs[end] == arcs[start] {
                    end += 1;
                }
                key[start..end].sort_unstable_by(|a, b| b.cmp(a));
                start = end;
            }
            *groups.entry(key).or_insert(0.0) += 1.0;
        }
        let mut keys: Vec<(Vec<u32>, f64)> = groups.into_iter().collect();
        keys.sort_by(|a, b| a.0.cmp(&b.0));
        let mut value = Complex64::new(0.0, 0.0);
        let mut err = 0.0;
        let mut abs = 0.0;
        let mut scale = 0.0;
        let mut m = vec![Complex64::new(0.0, 0.0); n];
        let mut me = vec![0.0; n];
        for (ex, count) in keys {
            for (s, ss) in &self.perms {
                for (t, st) in &self.perms {
                    let mut prod = Complex64::new(1.0, 0.0);
                    let mut l1 = count;
                    for i in 0..n {
                        let k = ex[i] + (s[i] + t[i]) as u32;
                        let entry = self.table.entry(arcs[i], k)?;
                        m[i] = entry.value();
                        me[i] = entry.err;
                        prod *= m[i];
                        l1 *= entry.scale.max(m[i].norm());
                    }
                    let sign = ss * st * count;
                    value += prod * sign;
                    abs += prod.norm() * count;
                    scale += l1;
                    for i in 0..n {
                        let others: f64 = (0..n).filter(|&l| l != i).map(|l| m[l].norm() + me[l]).product();
                        err += count * me[i] * others;
                    }
                }
            }
        }
        Ok((value, err + 8.0 * f64::EPSILON * abs * n as f64, scale))
    }
}

/// `E_Gamma(p)` from precomputed arc moments.
pub fn expectation_with(class: &HomologyClass, p: &PowerSumPoly, table: &MomentTable) -> Result<Estimate> {
    let n = class.n();
    check_caps(n, p)?;
    if let Some(nv) = p.nvars_usize() {
        if nv != n {
            return Err(Error::Precondition(format!("polynomial built for N = {nv}, class has N = {n}")));
        }
    }
    let need = required_kmax(p, n);
    if need > table.kmax {
        return Err(Error::MissingMoment { arc: 0, k: need as usize });
    }
    let asm = Assembler { table, n, perms: permutations(n) };
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut scale = 0.0;
    for (comp, c) in class.terms() {
        let arcs: Vec<usize> = comp.iter().enumerate().flat_map(|(a, &k)| std::iter::repeat(a).take(k)).collect();
        let weight = cr_to_c64(c) * multinomial(comp);
        for (mu, pc) in p.terms() {
            let (v, e, sc) = asm.canonical(mu, &arcs)?;
            let coef = weight * cr_to_c64(pc);
            value += coef * v;
            err += coef.norm() * e;
            scale += coef.norm() * sc;
        }
    }
    Ok(Estimate::with_scale(value, err, scale))
}

fn check_caps(n: usize, p: &PowerSumPoly) -> Result<()> {
    if n == 0 || n > MAX_N {
        return Err(Error::Cap(format!("N = {n} outside 1..={MAX_N}")));
    }
    if p.max_length() > MAX_PARTS {
        return Err(Error::Cap(format!("power-sum products limited to {MAX_PARTS} parts")));
    }
    Ok(())
}

/// `E_Gamma(p)` with arc moments computed to relative tolerance `tol`.
pub fn expectation(class: &HomologyClass, p: &PowerSumPoly, v: &Potential, tol: f64) -> Result<Estimate> {
    check_caps(class.n(), p)?;
    let w = Weight::new(v)?;
    let table = MomentTable::build(class.arcs(), &w, required_kmax(p, class.n()), tol)?;
    expectation_with(class, p, &table)
}

/// `E_{gamma^n}(p_nu)` for the basis compositions `n` and `nu in A_{N,d}`.
#[derive(Clone, Debug, Serialize)]
pub struct MomentMatrix {
    pub n: usize,
    pub d: usize,
    pub rows: Vec<Vec<usize>>,
    pub cols: Vec<Partition>,
    pub entries: Vec<Vec<Estimate>>,
    /// Singular values after dividing every column by its largest entry.
    pub scaled_singular_values: Vec<f64>,
    pub smallest_scaled_singular_value: f64,
    /// `gamma^n` sums over distinct placements of variables on arcs.
    pub convention: String,
}

pub fn moment_matrix(v: &Potential, n: usize, tol: f64) -> Result<MomentMatrix> {
    if n == 0 || n > MAX_N {
        return Err(Error::Cap(format!("N = {n} outside 1..={MAX_N}")));
    }
    let d = v.degree();
    let arcs = basis_arcs(v)?;
    let w = Weight::new(v)?;
    let rows = compositions(n, d);
    let cols = partitions_in_box(n, d as u32 - 1);
    let kmax = (n * (d - 1)) as u32 + 2 * (n as u32 - 1);
    let table = MomentTable::build(&arcs, &w, kmax, tol)?;
    let nv = crate::symcore::cr_int(n as i64);
    let mut entries = Vec::with_capacity(rows.len());
    for comp in &rows {
        let class = HomologyClass::basis(n, arcs.clone(), comp.clone())?;
        let row: Result<Vec<Estimate>> = cols
            .iter()
            .map(|nu| {
                let p = PowerSumPoly::monomial(nu.parts(), crate::symcore::cr_int(1), nv.clone());
                expectation_with(&class, &p, &table)
            })
            .collect();
        entries.push(row?);
    }
    let size = rows.len();
    let mut m = DMatrix::<Complex64>::zeros(size, size);
    for j in 0..size {
        let scale = (0..size).map(|i| entries[i][j].value().norm()).fold(0.0, f64::max);
        for i in 0..size {
            m[(i, j)] = if scale > 0.0 { entries[i][j].value() / scale } else { Complex64::new(0.0, 0.0) };
        }
    }
    let mut sv: Vec<f64> = m.singular_values().iter().cloned().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let smallest = sv.last().cloned().unwrap_or(0.0);
    Ok(MomentMatrix {
        n,
        d,
        rows,
        cols,
        entries,
        scaled_singular_values: sv,
        smallest_scaled_singular_value: smallest,
        convention: "gamma^n = sum over distinct placements of the variables on arcs".into(),
    })
}
