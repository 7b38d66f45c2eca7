//! Reduction of moments `E(p_mu)` to the finite basis `A_{N,d}`.
//!
//! Every moment functional that kills all `Q_mu` is fixed by its values on
//! partitions fitting in an `N x (d-1)` box. The reduction expresses any
//! `E(p_mu)` as an exact linear form in those values; the form is then
//! applied to exact or floating basis values.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Debug;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::loopgen::{q_mu, Potential};
use crate::symcore::{
    cr_to_c64, partitions_in_box, partitions_of_weight, reduce_length, Coeff, CRational, Partition,
    PowerSumPoly,
};

/// `dim H_N = binom(N + d - 1, N)`.
pub fn hn_dimension(n: usize, d: usize) -> usize {
    let mut acc: u128 = 1;
    for i in 0..n as u128 {
        acc = acc * (d as u128 + i) / (i + 1);
    }
    acc as usize
}

/// Values a moment functional may take.
pub trait MomentScalar: Clone + Debug + Send + Sync {
    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn scale(&self, c: &CRational) -> Self;
}

impl MomentScalar for CRational {
    fn zero() -> Self {
        <CRational as Coeff>::zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, c: &CRational) -> Self {
        self * c
    }
}

impl MomentScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, c: &CRational) -> Self {
        self * cr_to_c64(c)
    }
}

/// Unnormalized moment functional known on `A_{N,d}`; the empty partition
/// carries `E(1) = Z`.
#[derive(Clone, Debug)]
pub struct MomentFunctional<S> {
    n: usize,
    d: usize,
    basis_values: BTreeMap<Partition, S>,
}

impl<S: MomentScalar> MomentFunctional<S> {
    pub fn new(n: usize, d: usize, basis_values: BTreeMap<Partition, S>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Precondition("N and d must be positive".into()));
        }
        let want: BTreeSet<Partition> = partitions_in_box(n, d as u32 - 1).into_iter().collect();
        let have: BTreeSet<Partition> = basis_values.keys().cloned().collect();
        if want != have {
            let missing: Vec<Partition> = want.difference(&have).cloned().collect();
            let extra: Vec<String> = have.difference(&want).map(|p| p.to_string()).collect();
            if !missing.is_empty() {
                return Err(Error::MissingOracle(missing));
            }
            return Err(Error::Precondition(format!(
                "basis values outside A_{{{n},{d}}}: {}",
                extra.join(", ")
            )));
        }
        Ok(Self { n, d, basis_values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn basis_values(&self) -> &BTreeMap<Partition, S> {
        &self.basis_values
    }

    /// Applies an exact linear form over the basis.
    pub fn apply(&self, form: &LinearForm) -> S {
        form.iter().fold(S::zero(), |acc, (nu, c)| {
            acc.add(&self.basis_values[nu].scale(c))
        })
    }
}

/// Exact linear combination of basis moments.
pub type LinearForm = BTreeMap<Partition, CRational>;

/// Which part to eliminate when several are `>= d`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SubstitutionOrder {
    /// Largest part, leftmost on ties.
    #[default]
    LargestPart,
    /// Smallest part that is still `>= d`.
    SmallestEligible,
}

/// Memoizing reducer `p_mu -> linear form on A_{N,d}`.
pub struct Reducer {
    v: Potential,
    n: usize,
    shift: u32,
    lead_inv: CRational,
    order: SubstitutionOrder,
    memo: HashMap<Partition, LinearForm>,
}

impl Reducer {
    pub fn new(v: &Potential, n: usize, order: SubstitutionOrder) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("N must be positive".into()));
        }
        let (shift, lead) = v.reduction_step().ok_or_else(|| {
            Error::Unsupported(
                "rational V' = R/D with deg R <= deg D has no dominant loop-equation term".into(),
            )
        })?;
        if Coeff::is_zero(&lead) {
            return Err(Error::InvalidPotential("leading coefficient is zero".into()));
        }
        if shift as usize != v.degree() {
            return Err(Error::Unsupported(
                "reduction needs deg R - deg D to carry the full degree of V'".into(),
            ));
        }
        let one = <CRational as Coeff>::one();
        Ok(Self {
            v: v.clone(),
            n,
            shift,
            lead_inv: one / lead,
            order,
            memo: HashMap::new(),
        })
    }

    pub fn d(&self) -> usize {
        self.shift as usize
    }

    fn add_form(acc: &mut LinearForm, form: &LinearForm, c: &CRational) {
        for (nu, a) in form {
            let e = acc.entry(nu.clone()).or_insert_with(<CRational as Coeff>::zero);
            *e = &*e + a * c;
            if Coeff::is_zero(e) {
                acc.remove(nu);
            }
        }
    }

    /// Reduces a whole power-sum polynomial.
    pub fn reduce_poly(&mut self, p: &PowerSumPoly) -> LinearForm {
        let mut out = LinearForm::new();
        for (mu, c) in p.terms() {
            let f = self.reduce(mu);
            Self::add_form(&mut out, &f, c);
        }
        out
    }

    pub fn reduce(&mut self, mu: &Partition) -> LinearForm {
        if let Some(f) = self.memo.get(mu) {
            return f.clone();
        }
        let f = self.reduce_uncached(mu);
        self.memo.insert(mu.clone(), f.clone());
        f
    }

    fn reduce_uncached(&mut self, mu: &Partition) -> LinearForm {
        if mu.len() > self.n {
            let p = PowerSumPoly::monomial(mu.parts(), <CRational as Coeff>::one(), self.nv());
            let shorter = reduce_length(&p, self.n);
            return self.reduce_poly(&shorter);
        }
        let parts = mu.parts();
        let eligible = |&(_, &x): &(usize, &u32)| x >= self.shift;
        let pick = match self.order {
            SubstitutionOrder::LargestPart => parts.iter().enumerate().find(eligible),
            SubstitutionOrder::SmallestEligible => parts.iter().enumerate().filter(eligible).last(),
        };
        let Some((i, &big)) = pick else {
            return LinearForm::from([(mu.clone(), <CRational as Coeff>::one())]);
        };
        let mut tuple = vec![big - self.shift];
        tuple.extend(parts.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, &x)| x));
        let q = q_mu(&tuple, &self.v, self.n).expect("potential kind checked at construction");
        // lead * E(p_mu) = - sum_{other terms} c E(p_nu)
        let mut out = LinearForm::new();
        let scale = -self.lead_inv.clone();
        for (nu, c) in q.terms() {
            if nu == mu {
                continue;
            }
            let f = self.reduce(nu);
            Self::add_form(&mut out, &f, &(c * &scale));
        }
        out
    }

    fn nv(&self) -> CRational {
        crate::symcore::cr_int(self.n as i64)
    }
}

/// Solved moments together with the coefficient growth of the forms used.
#[derive(Clone, Debug)]
pub struct MomentSolution<S> {
    pub values: BTreeMap<Partition, S>,
    pub forms: BTreeMap<Partition, LinearForm>,
    /// Largest `|c_{mu,nu}|` over all forms; a condition estimate.
    pub growth: f64,
}

/// `E(p_mu)` for every target, from the basis values of `f`.
pub fn solve_moments<S: MomentScalar>(
    f: &MomentFunctional<S>,
    v: &Potential,
    targets: &[Partition],
) -> Result<BTreeMap<Partition, S>> {
    solve_moments_with(f, v, targets, SubstitutionOrder::LargestPart).map(|s| s.values)
}

pub fn solve_moments_with<S: MomentScalar>(
    f: &MomentFunctional<S>,
    v: &Potential,
    targets: &[Partition],
    order: SubstitutionOrder,
) -> Result<MomentSolution<S>> {
    if v.degree() != f.d {
        return Err(Error::Precondition(format!(
            "functional built for d = {} but deg V' = {}",
            f.d,
            v.degree()
        )));
    }
    let mut red = Reducer::new(v, f.n, order)?;
    let mut values = BTreeMap::new();
    let mut forms = BTreeMap::new();
    let mut growth = 0.0f64;
    for mu in targets {
        let form = red.reduce(mu);
        for c in form.values() {
            growth = growth.max(cr_to_c64(c).norm());
        }
        values.insert(mu.clone(), f.apply(&form));
        forms.insert(mu.clone(), form);
    }
    Ok(MomentSolution { values, forms, growth })
}

/// All tuples `(mu_1; mu_2 >= .. >= mu_l >= 1)` with `mu_1 >= 0` and total
/// weight at most `weight_max`.
pub fn loop_tuples(weight_max: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for m1 in 0..=weight_max {
        for w in 0..=weight_max - m1 {
            for rest in partitions_of_weight(w, w as usize) {
                let mut t = vec![m1];
                t.extend_from_slice(rest.parts());
                out.push(t);
            }
        }
    }
    out
}

/// Reduced `Q_mu` (length at most `N`) for every loop tuple.
fn reduced_equations(v: &Potential, n: usize, weight_max: u32) -> Result<Vec<(Vec<u32>, PowerSumPoly)>> {
    loop_tuples(weight_max)
        .into_iter()
        .map(|t| {
            let q = q_mu(&t, v, n)?;
            Ok((t, reduce_length(&q, n)))
        })
        .collect()
}

/// Partitions an oracle must supply for [`residuals`].
pub fn needed_partitions(v: &Potential, n: usize, weight_max: u32) -> Result<BTreeSet<Partition>> {
    Ok(reduced_equations(v, n, weight_max)?
        .into_iter()
        .flat_map(|(_, q)| q.terms().map(|(m, _)| m.clone()).collect::<Vec<_>>())
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualEntry {
    pub mu: Vec<u32>,
    pub residual: f64,
    pub scale: f64,
    pub relative: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub n: usize,
    pub weight_max: u32,
    pub entries: Vec<ResidualEntry>,
    pub max_relative: f64,
    pub worst: Option<Vec<u32>>,
}

/// Evaluates `|E(Q_mu)| / sum |c_nu E(p_nu)|` for every loop tuple of weight
/// at most `weight_max`; `Q_mu` is reduced to `N` variables first.
pub fn residuals(
    oracle: &BTreeMap<Partition, Complex64>,
    v: &Potential,
    n: usize,
    weight_max: u32,
) -> Result<ResidualReport> {
    residuals_scaled(oracle, &BTreeMap::new(), v, n, weight_max)
}

/// As [`residuals`], measuring each `E(p_nu)` against
/// `max(|E(p_nu)|, scales[nu])`. Quadrature oracles pass the integral of the
/// absolute integrand here, so moments that vanish by symmetry do not
/// inflate the relative residual.
pub fn residuals_scaled(
    oracle: &BTreeMap<Partition, Complex64>,
    scales: &BTreeMap<Partition, f64>,
    v: &Potential,
    n: usize,
    weight_max: u32,
) -> Result<ResidualReport> {
    let eqs = reduced_equations(v, n, weight_max)?;
    let missing: BTreeSet<Partition> = eqs
        .iter()
        .flat_map(|(_, q)| q.terms().map(|(m, _)| m.clone()).collect::<Vec<_>>())
        .filter(|m| !oracle.contains_key(m))
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingOracle(missing.into_iter().collect()));
    }
    let mut entries = Vec::with_capacity(eqs.len());
    let mut max_relative = 0.0f64;
    let mut worst = None;
    for (mu, q) in eqs {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for (m, c) in q.terms() {
            let c = cr_to_c64(c);
            sum += c * oracle[m];
            scale += c.norm() * oracle[m].norm().max(scales.get(m).copied().unwrap_or(0.0));
        }
        let residual = sum.norm();
        let relative = if scale > 0.0 { residual / scale } else { 0.0 };
        if worst.is_none() || relative > max_relative {
            max_relative = relative;
            worst = Some(mu.clone());
        }
        entries.push(ResidualEntry { mu, residual, scale, relative });
    }
    Ok(ResidualReport { n, weight_max, entries, max_relative, worst })
}

/// Dimension of the space of functionals on `{p_mu : l(mu) <= N, |mu| <= w}`
/// killed by every reduced `Q_mu` that lives in that space. Exact rank over
/// the Gaussian rationals.
pub fn solution_space_dimension(v: &Potential, n: usize, w: u32) -> Result<usize> {
    let unknowns: Vec<Partition> = (0..=w)
        .flat_map(|k| partitions_of_weight(k, n))
        .collect();
    let index: HashMap<&Partition, usize> = unknowns.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut rows: Vec<Vec<CRational>> = Vec::new();
    for (_, q) in reduced_equations(v, n, w)? {
        if q.terms().any(|(m, _)| !index.contains_key(m)) {
            continue;
        }
        let mut row = vec![<CRational as Coeff>::zero(); unknowns.len()];
        for (m, c) in q.terms() {
            row[index[m]] = c.clone();
        }
        rows.push(row);
    }
    Ok(unknowns.len() - exact_rank(rows))
}

fn exact_rank(mut rows: Vec<Vec<CRational>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..rows.len()).find(|&r| !Coeff::is_zero(&rows[r][col])) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = <CRational as Coeff>::one() / rows[rank][col].clone();
        let pivot_row: Vec<CRational> = rows[rank].iter().map(|x| x * &inv).collect();
        for r in rank + 1..rows.len() {
            if Coeff::is_zero(&rows[r][col]) {
                continue;
            }
            let f = rows[r][col].clone();
            for c in col..ncols {
                let delta = &pivot_row[c] * &f;
                rows[r][c] = &rows[r][c] - delta;
            }
        }
        rows[rank] = pivot_row;
        rank += 1;
    }
    rank
}
