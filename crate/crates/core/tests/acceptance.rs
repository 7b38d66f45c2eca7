//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use common::*;
use loopeq::contours::{basis_arcs, Contour, HomologyClass};
use loopeq::discrim::discriminator_report;
use loopeq::loopgen::{q_twomatrix, TwoPotential};
use loopeq::momsolve::{
    hn_dimension, loop_tuples, needed_partitions, residuals_scaled, solve_moments_with, MomentFunctional,
    SubstitutionOrder,
};
use loopeq::quad::moment_matrix;
use loopeq::symcore::{cr_int, cr_to_c64, partitions_in_box, partitions_of_weight, Coeff, MPoly, Partition};
use loopeq::wick::{gaussian_trace_moment, tutte_residual, NPoly};
use loopeq::C64;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn isomorphism() -> Outcome {
    let cases = [(1, cubic(), 2), (2, cubic(), 3), (2, quartic(), 6), (3, cubic(), 4)];
    let mut worst = f64::INFINITY;
    for (n, v, size) in cases {
        let start = Instant::now();
        let m = e(moment_matrix(&v, n, 1e-12))?;
        let d = v.degree();
        check(m.rows.len() == size && m.cols.len() == size && size == hn_dimension(n, d), || {
            format!("N={n} d={d}: matrix {}x{}, expected {size}", m.rows.len(), m.cols.len())
        })?;
        check(m.smallest_scaled_singular_value > 1e-8, || {
            format!("N={n} d={d}: smallest scaled singular value {:e}", m.smallest_scaled_singular_value)
        })?;
        check(start.elapsed() < Duration::from_secs(60), || format!("N={n} d={d}: {:?}", start.elapsed()))?;
        worst = worst.min(m.smallest_scaled_singular_value);
    }
    Ok(format!("sizes 2,3,6,4; smallest scaled singular value {worst:.3e}"))
}

fn quartic_residuals() -> Outcome {
    let v = quartic();
    let n = 2;
    let need: Vec<Partition> = e(needed_partitions(&v, n, 6))?.into_iter().collect();
    let est = e(oracle(&HomologyClass::real_line(n), &v, &need, 1e-13))?;
    let values = est.iter().map(|(k, x)| (k.clone(), x.value())).collect();
    let scales = est.iter().map(|(k, x)| (k.clone(), x.scale)).collect();
    let rep = e(residuals_scaled(&values, &scales, &v, n, 6))?;
    check(rep.entries.len() == loop_tuples(6).len(), || "missing loop tuples".into())?;
    check(rep.max_relative < 1e-8, || format!("max relative residual {:e} at {:?}", rep.max_relative, rep.worst))?;
    Ok(format!("{} tuples, max relative residual {:.2e}", rep.entries.len(), rep.max_relative))
}

fn gaussian_anchors() -> Outcome {
    let parts = [Partition::empty(), Partition::single(2)];
    let est = e(oracle(&HomologyClass::real_line(2), &gauss(), &parts, 1e-13))?;
    let z = est[&parts[0]].value();
    let p2 = est[&parts[1]].value() / z;
    check((z - C64::new(4.0 * PI, 0.0)).norm() < 1e-10, || format!("Z = {z}"))?;
    check((p2 - C64::new(4.0, 0.0)).norm() < 1e-10, || format!("E(p2)/Z = {p2}"))?;
    let t4 = e(gaussian_trace_moment(&[4]))?;
    let mut want = NPoly::zero();
    want.add_term(3, cr_int(2));
    want.add_term(1, cr_int(1));
    check(t4 == want, || format!("<Tr M^4> = {t4:?}"))?;
    check(t4.eval(&cr_int(1)) == cr_int(3), || "<x^4> at N = 1".into())?;
    Ok(format!("Z - 4pi = {:.1e}, E(p2)/Z - 4 = {:.1e}, <Tr M^4> = 2N^3 + N", (z.re - 4.0 * PI).abs(), (p2.re - 4.0).abs()))
}

fn tutte() -> Outcome {
    let start = Instant::now();
    let tuples = loop_tuples(4);
    for degree in [3u32, 4] {
        for mu in &tuples {
            let r = e(tutte_residual(&[degree], mu, 4))?;
            check(r.is_zero(), || format!("t_{degree}, mu = {mu:?}: nonzero residual"))?;
        }
    }
    check(start.elapsed() < Duration::from_secs(120), || format!("{:?}", start.elapsed()))?;
    Ok(format!("{} tuples x 2 models exactly zero to t^4", tuples.len()))
}

fn haar_circle() -> Outcome {
    let v = haar();
    let n = 2;
    let arcs = e(basis_arcs(&v))?;
    check(arcs.len() == 1 && arcs[0].is_closed(), || format!("{} basis arcs", arcs.len()))?;
    let dim = hn_dimension(n, v.degree());
    check(dim == 1, || format!("hn_dimension = {dim}"))?;
    let class = HomologyClass::basis(n, vec![Contour::circle(C64::new(0.0, 0.0), 1.0)], vec![n]).unwrap();
    let mut need: Vec<Partition> = e(needed_partitions(&v, n, 4))?.into_iter().collect();
    need.extend([Partition::empty(), Partition::single(1), Partition::single(2)]);
    need.sort();
    need.dedup();
    let est = e(oracle(&class, &v, &need, 1e-13))?;
    let values: BTreeMap<Partition, C64> = est.iter().map(|(k, x)| (k.clone(), x.value())).collect();
    let scales = est.iter().map(|(k, x)| (k.clone(), x.scale)).collect();
    let rep = e(residuals_scaled(&values, &scales, &v, n, 4))?;
    check(rep.max_relative < 1e-10, || format!("max relative residual {:e}", rep.max_relative))?;
    let z = values[&Partition::empty()];
    check(z.norm() > 1e-3, || format!("Z = {z}"))?;
    let mut worst = 0.0f64;
    for k in [1, 2] {
        let r = (values[&Partition::single(k)] / z).norm();
        check(r < 1e-10, || format!("E(p{k})/Z = {r:e}"))?;
        worst = worst.max(r);
    }
    Ok(format!("residual {:.1e}, hn_dimension 1, |E(p_k)/Z| <= {worst:.1e}", rep.max_relative))
}

fn round_trip() -> Outcome {
    let v = cubic();
    let n = 2;
    let d = v.degree();
    let arcs = e(basis_arcs(&v))?;
    let class = e(HomologyClass::basis(n, arcs, vec![2, 0]))?;
    let basis_parts = partitions_in_box(n, d as u32 - 1);
    let targets: Vec<Partition> = (0..=8).flat_map(|w| partitions_of_weight(w, 6)).collect();
    let mut need = basis_parts.clone();
    need.extend(targets.iter().cloned());
    let est = e(oracle(&class, &v, &need, 1e-13))?;
    let basis: BTreeMap<Partition, C64> = basis_parts.iter().map(|p| (p.clone(), est[p].value())).collect();
    let f = e(MomentFunctional::new(n, d, basis.clone()))?;
    let sol = e(solve_moments_with(&f, &v, &targets, SubstitutionOrder::LargestPart))?;
    let mut worst = 0.0f64;
    for mu in &targets {
        let direct = est[mu].value();
        let scale: f64 = sol.forms[mu].iter().map(|(nu, c)| cr_to_c64(c).norm() * basis[nu].norm()).sum();
        let rel = (sol.values[mu] - direct).norm() / direct.norm().max(scale);
        check(rel < 1e-6, || format!("mu = {mu}: relative deviation {rel:e}"))?;
        worst = worst.max(rel);
    }
    Ok(format!("{} targets, max relative deviation {worst:.2e}, growth {:.0}", targets.len(), sol.growth))
}

fn discriminator() -> Outcome {
    let start = Instant::now();
    let v = cubic();
    let at = |r| e(discriminator_report(&v, 1, r, 1e-10));
    let mid = at(60)?;
    let lo = at(25)?;
    let hi = at(100)?;
    check(mid.window().count() == 4, || format!("{} window pairs", mid.window().count()))?;
    check(mid.max_window_deviation < 0.2, || format!("r = 60 deviation {:e}", mid.max_window_deviation))?;
    for p in hi.window() {
        let q = lo.pair(&p.n, &p.m).ok_or("pair missing at r = 25")?;
        check(p.deviation <= q.deviation + 0.1, || format!("{:?}/{:?}: {} at r=100 vs {} at r=25", p.n, p.m, p.deviation, q.deviation))?;
    }
    check(start.elapsed() < Duration::from_secs(60), || format!("{:?}", start.elapsed()))?;
    Ok(format!(
        "max window deviation {:.1e} (r=25), {:.1e} (r=60), {:.1e} (r=100)",
        lo.max_window_deviation, mid.max_window_deviation, hi.max_window_deviation
    ))
}

fn two_matrix() -> Outcome {
    let start = Instant::now();
    let mut count = 0;
    for (d, dt) in [(1usize, 2usize), (2, 1), (2, 2)] {
        // variables: 0 = N, then t_1..t_{d+1}, then tt_1..tt_{dt+1}
        let t: Vec<MPoly> = (0..=d).map(|j| MPoly::var(1 + j)).collect();
        let tt: Vec<MPoly> = (0..=dt).map(|j| MPoly::var(2 + d + j)).collect();
        let lead = (0..dt).fold(tt[dt].clone(), |acc, _| acc.mul(&t[d]));
        let w = e(TwoPotential::new(t, tt))?;
        for m1 in 0..=2u32 {
            for spectator in [1u32, 2] {
                let q = q_twomatrix(&[m1, spectator], &w, &MPoly::var(0));
                let top = Partition::new(vec![m1 + (d * dt) as u32, spectator]);
                check(q.coeff(&top) == lead, || format!("d={d} dt={dt} mu=({m1},{spectator})"))?;
                count += 1;
            }
        }
    }
    check(start.elapsed() < Duration::from_secs(10), || format!("{:?}", start.elapsed()))?;
    Ok(format!("{count} leading coefficients equal tt_(dt+1) t_(d+1)^dt"))
}

fn properties() -> Outcome {
    reduce_length_exactness(500).map_err(|m| format!("reduce_length: {m}"))?;
    deformation_invariance(10, 5).map_err(|m| format!("deformation: {m}"))?;
    linearity_and_symmetry(50).map_err(|m| format!("linearity/symmetry: {m}"))?;
    Ok("reduce_length 500, deformation 10x5, linearity/symmetry 50".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("isomorphism witness", isomorphism),
        ("quartic loop-equation residuals", quartic_residuals),
        ("gaussian anchors", gaussian_anchors),
        ("tutte equations", tutte),
        ("haar circle", haar_circle),
        ("reduction round trip", round_trip),
        ("discriminator", discriminator),
        ("two-matrix leading term", two_matrix),
        ("property suites", properties),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {} {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
