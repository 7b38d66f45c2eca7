//! Vector-valued quadrature rules: globally adaptive Gauss–Kronrod (7/15)
//! on intervals and the doubling trapezoid rule on periodic integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Integral of a vector of functions with per-component error estimates and
/// `L^1` scales.
#[derive(Clone, Debug)]
pub struct VecIntegral {
    pub value: Vec<Complex64>,
    pub err: Vec<f64>,
    pub l1: Vec<f64>,
}

impl VecIntegral {
    pub fn zeros(dim: usize) -> Self {
        VecIntegral { value: vec![Complex64::new(0.0, 0.0); dim], err: vec![0.0; dim], l1: vec![0.0; dim] }
    }

    pub fn accumulate(&mut self, other: &VecIntegral, sign: f64) {
        for k in 0..self.value.len() {
            self.value[k] += other.value[k] * sign;
            self.err[k] += other.err[k];
            self.l1[k] += other.l1[k];
        }
    }

    fn remove(&mut self, other: &VecIntegral) {
        for k in 0..self.value.len() {
            self.value[k] -= other.value[k];
            self.err[k] -= other.err[k];
            self.l1[k] -= other.l1[k];
        }
    }
}

struct Piece {
    a: f64,
    b: f64,
    res: VecIntegral,
    key: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.key == o.key
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.key.total_cmp(&o.key).then(o.a.total_cmp(&self.a))
    }
}

fn gk15<F: Fn(f64, &mut [Complex64])>(f: &F, dim: usize, a: f64, b: f64, buf: &mut [Complex64]) -> VecIntegral {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = vec![Complex64::new(0.0, 0.0); dim];
    let mut g = vec![Complex64::new(0.0, 0.0); dim];
    let mut l1 = vec![0.0; dim];
    let mut add = |x: f64, wk: f64, wg: f64, buf: &mut [Complex64]| {
        f(x, buf);
        for j in 0..dim {
            k[j] += buf[j] * wk;
            g[j] += buf[j] * wg;
            l1[j] += buf[j].norm() * wk;
        }
    };
    add(c, WGK[7], WG[3], buf);
    for i in 0..7 {
        let wg = if i % 2 == 1 { WG[i / 2] } else { 0.0 };
        add(c - h * XGK[i], WGK[i], wg, buf);
        add(c + h * XGK[i], WGK[i], wg, buf);
    }
    let err = (0..dim).map(|j| ((k[j] - g[j]) * h).norm()).collect();
    VecIntegral {
        value: k.into_iter().map(|z| z * h).collect(),
        err,
        l1: l1.into_iter().map(|z| z * h.abs()).collect(),
    }
}

/// Adaptive integration of `f: [a, b] -> C^dim` until every component meets
/// `err_k <= rel_tol * l1_k + abs_tol`.
pub fn adaptive<F: Fn(f64, &mut [Complex64])>(
    f: &F,
    dim: usize,
    a: f64,
    b: f64,
    initial_pieces: usize,
    rel_tol: f64,
    abs_tol: f64,
    max_pieces: usize,
) -> Result<VecIntegral> {
    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    let mut heap = BinaryHeap::new();
    let mut total = VecIntegral::zeros(dim);
    let n0 = initial_pieces.max(1);
    for i in 0..n0 {
        let lo = a + (b - a) * i as f64 / n0 as f64;
        let hi = a + (b - a) * (i + 1) as f64 / n0 as f64;
        let res = gk15(f, dim, lo, hi, &mut buf);
        total.accumulate(&res, 1.0);
        heap.push(Piece { a: lo, b: hi, res, key: 0.0 });
    }
    // keys depend on the global scale, so rebuild once it is known
    let rekey = |heap: BinaryHeap<Piece>, scale: &[f64]| -> BinaryHeap<Piece> {
        heap.into_iter()
            .map(|mut p| {
                p.key = key_of(&p.res, scale);
                p
            })
            .collect()
    };
    let targets = |t: &VecIntegral| -> Vec<f64> { t.l1.iter().map(|l| rel_tol * l + abs_tol).collect() };
    let mut target = targets(&total);
    heap = rekey(heap, &target);
    let mut pieces = n0;
    loop {
        let done = (0..dim).all(|j| total.err[j] <= target[j]);
        if done {
            return Ok(total);
        }
        if pieces >= max_pieces {
            let worst = (0..dim)
                .map(|j| total.err[j] / target[j].max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            let achieved = total.err.iter().cloned().fold(0.0, f64::max);
            return Err(Error::Quadrature {
                achieved,
                requested: rel_tol,
                context: format!("adaptive Gauss-Kronrod did not converge (error/target = {worst:.2e})"),
            });
        }
        let p = heap.pop().expect("nonempty");
        total.remove(&p.res);
        let m = 0.5 * (p.a + p.b);
        let left = gk15(f, dim, p.a, m, &mut buf);
        let right = gk15(f, dim, m, p.b, &mut buf);
        total.accumulate(&left, 1.0);
        total.accumulate(&right, 1.0);
        // error terms were subtracted approximately; clamp drift
        for e in total.err.iter_mut() {
            *e = e.max(0.0);
        }
        pieces += 1;
        let new_target = targets(&total);
        let drift = new_target.iter().zip(&target).any(|(n, o)| (n - o).abs() > 0.5 * o.abs());
        heap.push(Piece { a: p.a, b: m, key: key_of(&left, &new_target), res: left });
        heap.push(Piece { a: m, b: p.b, key: key_of(&right, &new_target), res: right });
        if drift {
            heap = rekey(heap, &new_target);
        }
        target = new_target;
    }
}

fn key_of(r: &VecIntegral, target: &[f64]) -> f64 {
    r.err
        .iter()
        .zip(target)
        .map(|(e, t)| if *t > 0.0 { e / t } else if *e > 0.0 { f64::MAX } else { 0.0 })
        .fold(0.0, f64::max)
}

/// Trapezoid rule for a 1-periodic `f` on `[0, 1)`, doubling the node count
/// until two successive estimates agree.
pub fn periodic<F: Fn(f64, &mut [Complex64])>(
    f: &F,
    dim: usize,
    rel_tol: f64,
    abs_tol: f64,
    max_nodes: usize,
) -> Result<VecIntegral> {
    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    let mut n = 8usize;
    let mut sum = vec![Complex64::new(0.0, 0.0); dim];
    let mut abs = vec![0.0; dim];
    for i in 0..n {
        f(i as f64 / n as f64, &mut buf);
        for j in 0..dim {
            sum[j] += buf[j];
            abs[j] += buf[j].norm();
        }
    }
    let mut prev: Vec<Complex64> = sum.iter().map(|s| s / n as f64).collect();
    loop {
        // add the midpoints
        for i in 0..n {
            f((i as f64 + 0.5) / n as f64, &mut buf);
            for j in 0..dim {
                sum[j] += buf[j];
                abs[j] += buf[j].norm();
            }
        }
        n *= 2;
        let cur: Vec<Complex64> = sum.iter().map(|s| s / n as f64).collect();
        let l1: Vec<f64> = abs.iter().map(|a| a / n as f64).collect();
        let err: Vec<f64> = cur.iter().zip(&prev).map(|(c, p)| (c - p).norm()).collect();
        let ok = (0..dim).all(|j| err[j] <= rel_tol * l1[j] + abs_tol);
        if ok && n >= 32 {
            // the doubled rule converges geometrically; the difference bounds its error
            return Ok(VecIntegral { value: cur, err, l1 });
        }
        if n >= max_nodes {
            let achieved = err.iter().cloned().fold(0.0, f64::max);
            return Err(Error::Quadrature {
                achieved,
                requested: rel_tol,
                context: format!("periodic trapezoid rule with {n} nodes"),
            });
        }
        prev = cur;
    }
}
