mod common;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use common::*;
use loopeq::contours::{basis_arcs, deform, Contour, Deformation, HomologyClass};
use loopeq::discrim::{discriminator_report, DiscriminatorReport};
use loopeq::loopgen::Potential;
use loopeq::momsolve::{solve_moments_with, MomentFunctional, SubstitutionOrder};
use loopeq::quad::expectation;
use loopeq::symcore::{
    cr_int, cr_to_c64, partitions_in_box, partitions_of_weight, reduce_length, CRational, Partition, PowerSumPoly,
};
use loopeq::wick::gaussian_trace_moment;
use loopeq::C64;
use proptest::prelude::*;

fn nonzero_rational() -> impl Strategy<Value = CRational> {
    small_rational().prop_filter("nonzero", |c| *c != cr_int(0))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn reduce_length_is_a_weight_preserving_projection(mu in partition(6, 10), n in 1usize..=4) {
        let p = monomial(&mu, n);
        let once = reduce_length(&p, n);
        prop_assert_eq!(reduce_length(&once, n), once.clone());
        prop_assert!(once.is_homogeneous());
        if !once.is_zero() {
            prop_assert_eq!(once.max_weight(), Some(mu.weight()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn substitution_orders_agree(
        shape in prop::sample::select(vec![(2usize, 2usize), (2, 3), (3, 2)]),
        lower in prop::collection::vec(small_rational(), 3),
        lead in nonzero_rational(),
        values in prop::collection::vec(small_rational(), 10),
    ) {
        let (n, d) = shape;
        let mut t: Vec<CRational> = lower.into_iter().take(d).collect();
        t.push(lead);
        let v = Potential::polynomial(t).unwrap();
        prop_assert_eq!(v.degree(), d);
        let basis: BTreeMap<Partition, CRational> = partitions_in_box(n, d as u32 - 1)
            .into_iter()
            .zip(values.into_iter().cycle())
            .collect();
        let f = MomentFunctional::new(n, d, basis).unwrap();
        let targets: Vec<Partition> = (0..=8).flat_map(|w| partitions_of_weight(w, 6)).collect();
        let a = solve_moments_with(&f, &v, &targets, SubstitutionOrder::LargestPart).unwrap();
        let b = solve_moments_with(&f, &v, &targets, SubstitutionOrder::SmallestEligible).unwrap();
        prop_assert_eq!(a.values, b.values);
    }

    #[test]
    fn one_basis_arc_per_degree_of_vprime(lower in prop::collection::vec(small_rational(), 5), deg in 2usize..=6, lead in nonzero_rational()) {
        let mut t: Vec<CRational> = lower.into_iter().take(deg - 1).collect();
        t.push(lead);
        let v = Potential::polynomial(t).unwrap();
        prop_assert_eq!(basis_arcs(&v).unwrap().len(), deg - 1);
    }
}

/// Tensor-product trapezoid rule for `int_{R^N} p_mu Delta^2 e^{-sum V}`.
fn brute_force(vcoef: &[f64], n: usize, mus: &[Partition]) -> Vec<f64> {
    let h = 0.15;
    let half = 80i32;
    let xs: Vec<f64> = (-half..=half).map(|i| i as f64 * h).collect();
    // V = sum_k t_k x^k / k
    let w: Vec<f64> = xs
        .iter()
        .map(|&x| (-vcoef.iter().enumerate().map(|(k, t)| t * x.powi(k as i32 + 1) / (k + 1) as f64).sum::<f64>()).exp())
        .collect();
    let mut sums = vec![0.0; mus.len()];
    let total = xs.len().pow(n as u32);
    let mut idx = vec![0usize; n];
    for flat in 0..total {
        let mut f = flat;
        for slot in idx.iter_mut() {
            *slot = f % xs.len();
            f /= xs.len();
        }
        let pts: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
        let mut base: f64 = idx.iter().map(|&i| w[i]).product();
        for i in 0..n {
            for j in i + 1..n {
                base *= (pts[i] - pts[j]).powi(2);
            }
        }
        for (s, mu) in sums.iter_mut().zip(mus) {
            let p: f64 = mu.parts().iter().map(|&k| pts.iter().map(|x| x.powi(k as i32)).sum::<f64>()).product();
            *s += base * p;
        }
    }
    let vol = h.powi(n as i32);
    sums.iter().map(|s| s * vol).collect()
}

#[test]
fn expectation_matches_tensor_quadrature() {
    let mus: Vec<Partition> = ["", "1", "2", "1,1", "4", "3,1", "2,2"].iter().map(|s| Partition::parse(s).unwrap()).collect();
    for (v, coef) in [(gauss(), vec![0.0, 1.0]), (quartic(), vec![0.0, 1.0, 0.0, 1.0])] {
        for n in 1..=3 {
            let brute = brute_force(&coef, n, &mus);
            for (mu, b) in mus.iter().zip(brute) {
                let e = expectation(&HomologyClass::real_line(n), &monomial(mu, n), &v, 1e-12).unwrap();
                let rel = (e.value() - C64::new(b, 0.0)).norm() / e.scale.max(e.value().norm());
                assert!(rel < 1e-7, "N = {n}, mu = {mu}: {} vs {b} (rel {rel:e})", e.value());
            }
        }
    }
}

#[test]
fn wick_counts_match_quadrature() {
    for n in 1..=3 {
        let nv = cr_int(n as i64);
        let z = expectation(&HomologyClass::real_line(n), &PowerSumPoly::constant(cr_int(1), nv.clone()), &gauss(), 1e-13)
            .unwrap()
            .value();
        for k in [2u32, 4] {
            let exact = cr_to_c64(&gaussian_trace_moment(&[k]).unwrap().eval(&nv));
            let e = expectation(&HomologyClass::real_line(n), &monomial(&Partition::single(k), n), &gauss(), 1e-13).unwrap();
            assert!((e.value() / z - exact).norm() < 1e-8 * exact.norm(), "N = {n}, k = {k}");
        }
    }
}

#[test]
fn quartic_real_line_is_first_two_arcs() {
    let v = quartic();
    let arcs = basis_arcs(&v).unwrap();
    for n in 1..=2 {
        let sum = HomologyClass::power(n, arcs.clone(), &[cr_int(1), cr_int(1), cr_int(0)]).unwrap();
        for mu in ["", "1", "2", "3,1", "2,2"] {
            let p = monomial(&Partition::parse(mu).unwrap(), n);
            let a = expectation(&sum, &p, &v, 1e-12).unwrap();
            let b = expectation(&HomologyClass::real_line(n), &p, &v, 1e-12).unwrap();
            let bar = a.err + b.err + 1e-13 * a.scale.max(b.scale);
            assert!((a.value() - b.value()).norm() <= bar, "N = {n}, mu = {mu}: {} vs {}", a.value(), b.value());
        }
    }
}

#[test]
fn expectation_is_deformation_invariant() {
    let v = quartic();
    let bumps = [
        Deformation::Bump { center: C64::new(0.3, 0.0), width: 1.0, amplitude: C64::new(0.0, 0.6) },
        Deformation::Translate { by: C64::new(0.0, -0.4) },
        Deformation::Rotate { center: C64::new(0.0, 0.0), angle: 0.3 },
    ];
    let n = 2;
    for bump in &bumps {
        let moved = deform(&Contour::real_line(), bump, &v).unwrap();
        let class = HomologyClass::basis(n, vec![moved], vec![n]).unwrap();
        for mu in ["", "2", "3,1", "4,2"] {
            let p = monomial(&Partition::parse(mu).unwrap(), n);
            let a = expectation(&class, &p, &v, 1e-12).unwrap();
            let b = expectation(&HomologyClass::real_line(n), &p, &v, 1e-12).unwrap();
            let bar = a.err + b.err + 1e-13 * a.scale.max(b.scale);
            assert!((a.value() - b.value()).norm() <= bar, "{bump:?}, mu = {mu}");
        }
    }
}

fn cubic_report() -> &'static DiscriminatorReport {
    static REPORT: OnceLock<DiscriminatorReport> = OnceLock::new();
    REPORT.get_or_init(|| discriminator_report(&cubic(), 1, 60, 1e-10).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    /// A nonzero combination of the dominant saddle classes is detected by
    /// some discriminating polynomial.
    #[test]
    fn discriminator_separates_classes(c in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2)) {
        let c: Vec<C64> = c.into_iter().map(|(a, b)| C64::new(a, b)).collect();
        let cmax = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assume!(cmax > 1e-3);
        let rep = cubic_report();
        let mut window: Vec<Vec<usize>> = rep.window().map(|p| p.n.clone()).collect();
        window.sort();
        window.dedup();
        prop_assert_eq!(window.len(), 2);
        let mut best = 0.0f64;
        for (i, m) in window.iter().enumerate() {
            let s: C64 = window
                .iter()
                .zip(&c)
                .map(|(n, cn)| {
                    let r = rep.pair(n, m).unwrap().ratio;
                    cn * C64::new(r[0], r[1])
                })
                .sum();
            prop_assert!((s - c[i]).norm() < 0.2 * cmax);
            best = best.max(s.norm());
        }
        prop_assert!(best > 0.5 * cmax);
    }
}
