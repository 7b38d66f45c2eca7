//! Gaussian Wick calculus and map generating series.
//!
//! `<prod_i Tr M^{k_i}>` under `e^{-Tr M^2/2}` is a sum over perfect
//! matchings of the half-edges; a matching contributes `N^{#cycles}` of the
//! permutation `gamma o pi`, where `gamma` rotates half-edges around each
//! trace. The map model `V(x) = N(x^2/(2t) - sum_k t_k x^k / k)` then
//! expands into exact series in `t` whose coefficients are Laurent
//! polynomials in `N`, and its loop equations are Tutte's equations.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::loopgen::q_from_coeffs;
use crate::symcore::{cr_int, Coeff, CRational, MPoly};

/// Largest number of half-edges a single Wick sum may have.
pub const MAX_HALF_EDGES: u32 = 16;
/// Largest series order accepted from callers.
pub const MAX_ORDER: u32 = 6;

/// Laurent polynomial in `N` with Gaussian-rational coefficients.
#[derive(Clone, Default, PartialEq)]
pub struct NPoly(BTreeMap<i32, CRational>);

impl NPoly {
    pub fn zero() -> Self {
        NPoly::default()
    }

    pub fn monomial(power: i32, c: CRational) -> Self {
        let mut p = NPoly::zero();
        p.add_term(power, c);
        p
    }

    pub fn add_term(&mut self, power: i32, c: CRational) {
        if Coeff::is_zero(&c) {
            return;
        }
        let e = self.0.entry(power).or_insert_with(<CRational as Coeff>::zero);
        *e = &*e + c;
        if Coeff::is_zero(e) {
            self.0.remove(&power);
        }
    }

    pub fn coeff(&self, power: i32) -> CRational {
        self.0.get(&power).cloned().unwrap_or_else(<CRational as Coeff>::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&i32, &CRational)> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn eval(&self, n: &CRational) -> CRational {
        let mut acc = <CRational as Coeff>::zero();
        for (&k, c) in &self.0 {
            let base = if k >= 0 { n.clone() } else { cr_int(1) / n };
            let mut t = c.clone();
            for _ in 0..k.unsigned_abs() {
                t = &t * &base;
            }
            acc = acc + t;
        }
        acc
    }

    pub fn to_mpoly(&self, var: usize) -> MPoly {
        let mut m = MPoly::default();
        for (&k, c) in &self.0 {
            let mut e = vec![0; var + 1];
            e[var] = k;
            m.add_monomial(e, c.clone());
        }
        m
    }
}

impl fmt::Display for NPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_mpoly(0).display_with(&["N"]))
    }
}

impl fmt::Debug for NPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NPoly({self})")
    }
}

/// Histogram of `#cycles(gamma o pi)` over all perfect matchings `pi`.
fn cycle_histogram(powers: &[u32]) -> Vec<u64> {
    let total: u32 = powers.iter().sum();
    let h = total as usize;
    let mut hist = vec![0u64; h + 1];
    if total % 2 == 1 {
        return hist;
    }
    // gamma: next half-edge around the same trace
    let mut gamma = vec![0usize; h];
    let mut start = 0;
    for &k in powers {
        let k = k as usize;
        for j in 0..k {
            gamma[start + j] = start + (j + 1) % k;
        }
        start += k;
    }
    let mut pi = vec![usize::MAX; h];
    fn rec(pi: &mut [usize], gamma: &[usize], hist: &mut [u64]) {
        let Some(a) = pi.iter().position(|&x| x == usize::MAX) else {
            hist[count_cycles(gamma, pi)] += 1;
            return;
        };
        for b in a + 1..pi.len() {
            if pi[b] != usize::MAX {
                continue;
            }
            pi[a] = b;
            pi[b] = a;
            rec(pi, gamma, hist);
            pi[a] = usize::MAX;
            pi[b] = usize::MAX;
        }
    }
    rec(&mut pi, &gamma, &mut hist);
    hist
}

fn count_cycles(gamma: &[usize], pi: &[usize]) -> usize {
    let mut seen = vec![false; gamma.len()];
    let mut cycles = 0;
    for s in 0..gamma.len() {
        if seen[s] {
            continue;
        }
        cycles += 1;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = gamma[pi[x]];
        }
    }
    cycles
}

/// `<prod_i Tr M^{k_i}>` for `e^{-Tr M^2 / 2}`, exact in `N`.
pub fn gaussian_trace_moment(powers: &[u32]) -> Result<NPoly> {
    let total: u32 = powers.iter().sum();
    if total > MAX_HALF_EDGES {
        return Err(Error::Cap(format!("{total} half-edges exceed the cap of {MAX_HALF_EDGES}")));
    }
    let mut p = NPoly::zero();
    // zero powers are traces of the identity
    let zeros = powers.iter().filter(|&&k| k == 0).count() as i32;
    let nonzero: Vec<u32> = powers.iter().copied().filter(|&k| k > 0).collect();
    for (c, &count) in cycle_histogram(&nonzero).iter().enumerate() {
        if count > 0 {
            p.add_term(c as i32 + zeros, cr_int(count as i64));
        }
    }
    Ok(p)
}

/// Memoized Wick sums keyed by sorted powers.
#[derive(Default)]
struct WickCache(HashMap<Vec<u32>, NPoly>);

impl WickCache {
    fn get(&mut self, powers: &[u32]) -> Result<NPoly> {
        let mut key = powers.to_vec();
        key.sort_unstable_by(|a, b| b.cmp(a));
        if let Some(p) = self.0.get(&key) {
            return Ok(p.clone());
        }
        let p = gaussian_trace_moment(&key)?;
        self.0.insert(key, p.clone());
        Ok(p)
    }
}

/// Variable layout of map-series coefficients: `N`, then `t`, then one
/// variable per vertex degree.
pub const VAR_N: usize = 0;
pub const VAR_T: usize = 1;

/// Truncated series `T_{k_1..k_n} = sum_e t^e c_e(N, t_k)`.
#[derive(Clone, Debug)]
pub struct MapSeries {
    pub marked: Vec<u32>,
    pub degrees: Vec<u32>,
    pub e_max: u32,
    /// Coefficient of `t^e`, in the variables `N` (index 0) and
    /// `t_{degrees[i]}` (index `2 + i`).
    pub coeffs: BTreeMap<u32, MPoly>,
}

impl MapSeries {
    pub fn variable_names(&self) -> Vec<String> {
        let mut names = vec!["N".to_string(), "t".to_string()];
        names.extend(self.degrees.iter().map(|k| format!("t{k}")));
        names
    }

    /// The whole series as one polynomial in `N, t, t_k`.
    pub fn as_mpoly(&self) -> MPoly {
        let mut out = MPoly::default();
        for (&e, c) in &self.coeffs {
            out = out.add(&c.mul(&MPoly::var_pow(VAR_T, e as i32)));
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(Coeff::is_zero)
    }

    /// Substitutes numeric vertex weights (by degree).
    pub fn with_weights(&self, values: &[(u32, CRational)]) -> MapSeries {
        let subs: Vec<(usize, CRational)> = values
            .iter()
            .filter_map(|(k, v)| self.degrees.iter().position(|d| d == k).map(|i| (2 + i, v.clone())))
            .collect();
        MapSeries {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, c.substitute(&subs))).collect(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> SeriesJson {
        let names = self.variable_names();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        SeriesJson {
            marked: self.marked.clone(),
            degrees: self.degrees.clone(),
            e_max: self.e_max,
            coeffs: self.coeffs.iter().map(|(e, c)| (e.to_string(), c.display_with(&refs))).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesJson {
    pub marked: Vec<u32>,
    pub degrees: Vec<u32>,
    pub e_max: u32,
    pub coeffs: BTreeMap<String, String>,
}

fn check_degrees(degrees: &[u32]) -> Result<()> {
    for (i, &k) in degrees.iter().enumerate() {
        if k < 3 {
            return Err(Error::Precondition(format!("vertex degree {k} < 3")));
        }
        if degrees[..i].contains(&k) {
            return Err(Error::Precondition(format!("vertex degree {k} listed twice")));
        }
    }
    Ok(())
}

/// Compositions `n_k` of vertex counts with `sum k n_k = budget`.
fn vertex_configs(degrees: &[u32], budget: u32) -> Vec<Vec<u32>> {
    fn rec(degrees: &[u32], budget: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let Some((&k, rest)) = degrees.split_first() else {
            if budget == 0 {
                out.push(cur.clone());
            }
            return;
        };
        for n in 0..=budget / k {
            cur.push(n);
            rec(rest, budget - n * k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(degrees, budget, &mut Vec::new(), &mut out);
    out
}

fn series_with_cache(degrees: &[u32], marked: &[u32], e_max: u32, cache: &mut WickCache) -> Result<MapSeries> {
    check_degrees(degrees)?;
    if 2 * e_max > MAX_HALF_EDGES {
        return Err(Error::Cap(format!("order {e_max} needs more than {MAX_HALF_EDGES} half-edges")));
    }
    let marked_weight: u32 = marked.iter().sum();
    let mut coeffs = BTreeMap::new();
    for e in 0..=e_max {
        let mut c = MPoly::default();
        if 2 * e >= marked_weight {
            for config in vertex_configs(degrees, 2 * e - marked_weight) {
                let mut powers = marked.to_vec();
                // prod_k (N t_k / k)^{n_k} / n_k!
                let mut w = MPoly::constant(cr_int(1));
                for (i, (&k, &n)) in degrees.iter().zip(&config).enumerate() {
                    powers.extend(std::iter::repeat(k).take(n as usize));
                    let mut fact = 1i64;
                    for j in 1..=n as i64 {
                        fact *= j * k as i64;
                    }
                    let mut exps = vec![0; 3 + i];
                    exps[VAR_N] = n as i32;
                    exps[2 + i] = n as i32;
                    let mut mono = MPoly::default();
                    mono.add_monomial(exps, cr_int(1) / cr_int(fact));
                    w = w.mul(&mono);
                }
                // propagator t/N per edge; t is kept outside the coefficient
                let wick = cache.get(&powers)?.to_mpoly(VAR_N);
                c = c.add(&w.mul(&wick).mul(&MPoly::var_pow(VAR_N, -(e as i32))));
            }
        }
        coeffs.insert(e, c);
    }
    Ok(MapSeries { marked: marked.to_vec(), degrees: degrees.to_vec(), e_max, coeffs })
}

/// Non-connected map series `T_{marked}` to order `t^{e_max}` with symbolic
/// vertex weights `t_k`, `k in degrees`.
pub fn map_series(degrees: &[u32], marked: &[u32], e_max: u32) -> Result<MapSeries> {
    if e_max > MAX_ORDER {
        return Err(Error::Cap(format!("e_max = {e_max} exceeds {MAX_ORDER}")));
    }
    series_with_cache(degrees, marked, e_max, &mut WickCache::default())
}

/// `sum_nu c_nu T_nu` for `Q_mu` of the map model, truncated at `t^{e_max}`.
/// Loop equations hold exactly iff every coefficient vanishes.
pub fn tutte_residual(degrees: &[u32], mu: &[u32], e_max: u32) -> Result<MapSeries> {
    if e_max > MAX_ORDER {
        return Err(Error::Cap(format!("e_max = {e_max} exceeds {MAX_ORDER}")));
    }
    check_degrees(degrees)?;
    // V'(x) = N x / t - N sum_k t_k x^{k-1}
    let dmax = degrees.iter().copied().max().unwrap_or(2).max(2) as usize;
    let mut t = vec![MPoly::default(); dmax];
    let n = MPoly::var(VAR_N);
    t[1] = n.mul(&MPoly::var_pow(VAR_T, -1));
    for (i, &k) in degrees.iter().enumerate() {
        t[k as usize - 1] = t[k as usize - 1].sub(&n.mul(&MPoly::var(2 + i)));
    }
    let q = q_from_coeffs(mu, &t, &n);
    let mut cache = WickCache::default();
    let mut total = MPoly::default();
    for (nu, c) in q.terms() {
        // the t^{-1} term needs one more order
        let s = series_with_cache(degrees, nu.parts(), e_max + 1, &mut cache)?;
        total = total.add(&c.mul(&s.as_mpoly()));
    }
    let mut coeffs = BTreeMap::new();
    for (e, c) in total.split_by(VAR_T) {
        if e < 0 {
            return Err(Error::Precondition(format!("unexpected negative order t^{e} in residual")));
        }
        if e as u32 <= e_max {
            coeffs.insert(e as u32, c);
        }
    }
    for e in 0..=e_max {
        coeffs.entry(e).or_default();
    }
    Ok(MapSeries { marked: mu.to_vec(), degrees: degrees.to_vec(), e_max, coeffs })
}
