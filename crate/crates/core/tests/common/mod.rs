#![allow(dead_code)]

use std::collections::BTreeMap;

use loopeq::contours::{basis_arcs, deform, Contour, Deformation, HomologyClass, Weight};
use loopeq::loopgen::Potential;
use loopeq::quad::{arc_moments, expectation_with, required_kmax, Estimate, MomentTable};
use loopeq::symcore::{cr_int, cr_ratio, eval_powersum, reduce_length, CRational, Partition, PowerSumPoly};
use loopeq::{Result, C64};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub fn gauss() -> Potential {
    Potential::from_ints(&[0, 1]).unwrap()
}

/// `x^3/3 + x`
pub fn cubic() -> Potential {
    Potential::from_ints(&[1, 0, 1]).unwrap()
}

/// `x^4/4 + x^2/2`
pub fn quartic() -> Potential {
    Potential::from_ints(&[0, 1, 0, 1]).unwrap()
}

/// `V' = 2/x`
pub fn haar() -> Potential {
    Potential::rational(vec![cr_int(2)], vec![cr_int(0), cr_int(1)]).unwrap()
}

pub fn monomial(nu: &Partition, n: usize) -> PowerSumPoly {
    PowerSumPoly::monomial(nu.parts(), cr_int(1), cr_int(n as i64))
}

pub fn kmax_for<'a>(parts: impl IntoIterator<Item = &'a Partition>, n: usize) -> u32 {
    parts.into_iter().map(|p| required_kmax(&monomial(p, n), n)).max().unwrap_or(0)
}

pub fn table(class: &HomologyClass, v: &Potential, kmax: u32, tol: f64) -> Result<MomentTable> {
    MomentTable::build(class.arcs(), &Weight::new(v)?, kmax, tol)
}

/// `E_Gamma(p_nu)` for every `nu`, with their scales.
pub fn oracle(
    class: &HomologyClass,
    v: &Potential,
    parts: &[Partition],
    tol: f64,
) -> Result<BTreeMap<Partition, Estimate>> {
    let t = table(class, v, kmax_for(parts, class.n()), tol)?;
    parts
        .iter()
        .map(|nu| Ok((nu.clone(), expectation_with(class, &monomial(nu, class.n()), &t)?)))
        .collect()
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn finish<T: std::fmt::Debug>(r: std::result::Result<(), proptest::test_runner::TestError<T>>) -> std::result::Result<(), String> {
    r.map_err(|e| e.to_string())
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

pub fn small_rational() -> impl Strategy<Value = CRational> {
    (-9i64..=9, 1i64..=6).prop_map(|(n, d)| cr_ratio(n, d))
}

fn small_complex() -> impl Strategy<Value = CRational> {
    (small_rational(), small_rational()).prop_map(|(a, b)| CRational::new(a.re, b.re))
}

/// Partitions with at most `max_len` parts and weight at most `max_weight`.
pub fn partition(max_len: usize, max_weight: u32) -> impl Strategy<Value = Partition> {
    prop::collection::vec(1u32..=max_weight.max(1), 0..=max_len)
        .prop_filter("weight", move |p| p.iter().sum::<u32>() <= max_weight)
        .prop_map(Partition::new)
}

/// `reduce_length(p_mu, N)` agrees with `p_mu` at random rational points.
pub fn reduce_length_exactness(cases: u32) -> std::result::Result<(), String> {
    let strat = (partition(6, 10), 1usize..=4).prop_flat_map(|(mu, n)| {
        (Just(mu), Just(n), prop::collection::vec(small_complex(), n))
    });
    finish(runner(cases).run(&strat, |(mu, n, pts)| {
        let p = monomial(&mu, n);
        let r = reduce_length(&p, n);
        prop_assert!(r.max_length() <= n);
        let lhs = eval_powersum(&r, &pts).map_err(|e| fail(e.to_string()))?;
        let rhs = eval_powersum(&p, &pts).map_err(|e| fail(e.to_string()))?;
        prop_assert_eq!(lhs, rhs, "mu = {}, N = {}", mu, n);
        Ok(())
    }))
}

fn deformation() -> impl Strategy<Value = Deformation> {
    let c = (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C64::new(a, b));
    prop_oneof![
        c.clone().prop_map(|by| Deformation::Translate { by: by * 0.5 }),
        (c.clone(), 0.6f64..1.6).prop_map(|(center, factor)| Deformation::Scale { center, factor }),
        (c.clone(), -0.2f64..0.2).prop_map(|(center, angle)| Deformation::Rotate { center, angle }),
        (c.clone(), 0.5f64..2.0, c).prop_map(|(center, width, a)| Deformation::Bump {
            center,
            width,
            amplitude: a * (0.5 * width),
        }),
    ]
}

/// Arc moments `k < moments` are unchanged by admissible deformations
/// within the combined error bars.
pub fn deformation_invariance(deformations: u32, moments: u32) -> std::result::Result<(), String> {
    let pots = [cubic(), quartic()];
    let arcs: Vec<Vec<Contour>> = pots.iter().map(|v| basis_arcs(v).unwrap()).collect();
    let weights: Vec<Weight> = pots.iter().map(|v| Weight::new(v).unwrap()).collect();
    let strat = (0usize..2, 0usize..3, deformation());
    let tol = 1e-12;
    finish(runner(deformations).run(&strat, |(pi, ai, bump)| {
        let arc = &arcs[pi][ai % arcs[pi].len()];
        let moved = deform(arc, &bump, &pots[pi]).map_err(|e| fail(format!("{bump:?}: {e}")))?;
        let a = arc_moments(arc, &weights[pi], moments - 1, tol).map_err(|e| fail(e.to_string()))?;
        let b = arc_moments(&moved, &weights[pi], moments - 1, tol).map_err(|e| fail(e.to_string()))?;
        for (k, (x, y)) in a.iter().zip(&b).enumerate() {
            let diff = (x.value() - y.value()).norm();
            let bar = x.err + y.err + 8.0 * f64::EPSILON * x.scale.max(y.scale);
            prop_assert!(diff <= bar, "k = {}, {:?}: |diff| = {:e} > {:e}", k, bump, diff, bar);
        }
        Ok(())
    }))
}

fn close(a: C64, b: C64, bar: f64) -> bool {
    (a - b).norm() <= bar
}

/// Linearity in the class, reordering of the power sums and relabelling of
/// the arcs.
pub fn linearity_and_symmetry(cases: u32) -> std::result::Result<(), String> {
    let v = cubic();
    let n = 2;
    let arcs = basis_arcs(&v).unwrap();
    let rev: Vec<Contour> = arcs.iter().rev().cloned().collect();
    let w = Weight::new(&v).unwrap();
    let kmax = 14;
    let fwd_table = MomentTable::build(&arcs, &w, kmax, 1e-12).unwrap();
    let rev_table = MomentTable::build(&rev, &w, kmax, 1e-12).unwrap();
    let comps = loopeq::symcore::compositions(n, arcs.len());
    let coeffs = || prop::collection::vec(small_complex(), comps.len());
    let strat = (
        coeffs(),
        coeffs(),
        small_complex(),
        small_complex(),
        prop::collection::vec(1u32..=4, 1..=3).prop_filter("weight", |p| p.iter().sum::<u32>() <= 6),
        any::<prop::sample::Index>(),
    );
    finish(runner(cases).run(&strat, |(c1, c2, a, b, parts, perm)| {
        let class = |cs: &[CRational]| {
            let mut g = HomologyClass::zero(n, arcs.clone());
            for (comp, c) in comps.iter().zip(cs) {
                g.add_term(comp.clone(), c.clone()).unwrap();
            }
            g
        };
        let g1 = class(&c1);
        let g2 = class(&c2);
        let combo = g1.combine(&a, &g2, &b).map_err(|e| fail(e.to_string()))?;
        let nv = cr_int(n as i64);
        let p = PowerSumPoly::monomial(&parts, cr_int(1), nv.clone());
        let e = |g: &HomologyClass, t: &MomentTable, p: &PowerSumPoly| expectation_with(g, p, t).map_err(|e| fail(e.to_string()));
        let e1 = e(&g1, &fwd_table, &p)?;
        let e2 = e(&g2, &fwd_table, &p)?;
        let ec = e(&combo, &fwd_table, &p)?;
        let (ac, bc) = (loopeq::symcore::cr_to_c64(&a), loopeq::symcore::cr_to_c64(&b));
        let bar = ac.norm() * e1.err + bc.norm() * e2.err + ec.err
            + 16.0 * f64::EPSILON * (ac.norm() * e1.scale + bc.norm() * e2.scale + ec.scale);
        prop_assert!(close(ec.value(), ac * e1.value() + bc * e2.value(), bar), "linearity, parts {:?}", parts);

        // the same product assembled from its factors in another order
        let mut order = parts.clone();
        let k = perm.index(order.len());
        order.rotate_left(k);
        order.reverse();
        let q = order.iter().fold(PowerSumPoly::constant(cr_int(1), nv.clone()), |acc, &m| {
            acc.mul(&PowerSumPoly::monomial(&[m], cr_int(1), nv.clone()))
        });
        let eq = e(&g1, &fwd_table, &q)?;
        prop_assert!(close(eq.value(), e1.value(), e1.err + eq.err), "reordered {:?}", order);

        // relabelling the arcs
        let mut g1r = HomologyClass::zero(n, rev.clone());
        for (comp, c) in comps.iter().zip(&c1) {
            let mut cr = comp.clone();
            cr.reverse();
            g1r.add_term(cr, c.clone()).unwrap();
        }
        let er = e(&g1r, &rev_table, &p)?;
        let bar = e1.err + er.err + 16.0 * f64::EPSILON * e1.scale;
        prop_assert!(close(er.value(), e1.value(), bar), "relabelled arcs, parts {:?}", parts);
        Ok(())
    }))
}
