//! Admissible integration arcs for `e^{-V(x)} dx` and their homology classes.
//!
//! For polynomial `V` of degree `d+1`, `Re V -> +inf` in `d+1` sectors at
//! infinity. The basis arc `gamma_j` (`j = 1..d`) comes in from sector `j`
//! along its bisector, follows a circle of radius `rho` clockwise and leaves
//! along the bisector of sector `j-1`. With this orientation
//! `gamma_{d+1} = -sum_j gamma_j`, the real axis is `gamma_1` for the
//! Gaussian and `gamma_1 + gamma_2` for the quartic.
//!
//! Rational `V' = R/D` is supported for simple poles with integer residues:
//! small circles around poles of `e^{-V}`, and chains of arcs between zeros
//! of `e^{-V}` and sectors at infinity.

mod class;
mod weight;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use class::{ClassJson, ClassTerm, HomologyClass};
pub use weight::Weight;

use crate::error::{Error, Result};
use crate::loopgen::Potential;

/// Angular sector at infinity where `Re V -> +inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sector {
    pub index: usize,
    pub center_angle: f64,
    pub half_width: f64,
}

/// Sectors at infinity ordered by center angle in `[0, 2 pi)`.
pub fn sectors(v: &Potential) -> Result<Vec<Sector>> {
    Ok(sectors_of(&Weight::new(v)?))
}

pub fn sectors_of(w: &Weight) -> Vec<Sector> {
    let Some((c, m)) = w.leading() else {
        return Vec::new();
    };
    let m_f = m as f64;
    let mut centers: Vec<f64> = (0..m)
        .map(|j| ((2.0 * PI * j as f64 - c.arg()) / m_f).rem_euclid(2.0 * PI))
        .collect();
    centers.sort_by(f64::total_cmp);
    centers
        .into_iter()
        .enumerate()
        .map(|(index, center_angle)| Sector { index, center_angle, half_width: PI / (2.0 * m_f) })
        .collect()
}

/// Smooth piece of a contour. Finite pieces are parametrized by `s in [0, 1]`;
/// rays by `s in [0, inf)` as `origin + s e^{i angle}`, traversed toward
/// infinity unless `inward`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Segment {
    Ray { origin: Complex64, angle: f64, inward: bool },
    Line { a: Complex64, b: Complex64 },
    Arc { center: Complex64, radius: f64, start: f64, sweep: f64 },
    Circle { center: Complex64, radius: f64 },
}

impl Segment {
    /// Point and derivative with respect to the parameter.
    pub fn eval(&self, s: f64) -> (Complex64, Complex64) {
        match *self {
            Segment::Ray { origin, angle, .. } => {
                let u = Complex64::from_polar(1.0, angle);
                (origin + u * s, u)
            }
            Segment::Line { a, b } => (a + (b - a) * s, b - a),
            Segment::Arc { center, radius, start, sweep } => {
                let e = Complex64::from_polar(radius, start + sweep * s);
                (center + e, Complex64::i() * e * sweep)
            }
            Segment::Circle { center, radius } => {
                let e = Complex64::from_polar(radius, 2.0 * PI * s);
                (center + e, Complex64::i() * e * (2.0 * PI))
            }
        }
    }

    /// Orientation sign of the parametrization.
    pub fn sign(&self) -> f64 {
        match self {
            Segment::Ray { inward: true, .. } => -1.0,
            _ => 1.0,
        }
    }

    pub fn is_ray(&self) -> bool {
        matches!(self, Segment::Ray { .. })
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, Segment::Circle { .. })
    }
}

/// Where a contour starts or ends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Endpoint {
    Infinity { angle: f64 },
    Pole { at: Complex64 },
    Closed,
}

/// Smooth perturbation `x -> phi(x)` applied to a whole contour.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Deformation {
    Translate { by: Complex64 },
    Scale { center: Complex64, factor: f64 },
    Rotate { center: Complex64, angle: f64 },
    /// `x + amplitude * exp(-|x - center|^2 / width^2)`.
    Bump { center: Complex64, width: f64, amplitude: Complex64 },
}

impl Deformation {
    /// The same perturbation at strength `h in [0, 1]`.
    fn partial(&self, h: f64) -> Deformation {
        match *self {
            Deformation::Translate { by } => Deformation::Translate { by: by * h },
            Deformation::Scale { center, factor } => Deformation::Scale { center, factor: factor.powf(h) },
            Deformation::Rotate { center, angle } => Deformation::Rotate { center, angle: angle * h },
            Deformation::Bump { center, width, amplitude } => {
                Deformation::Bump { center, width, amplitude: amplitude * h }
            }
        }
    }

    /// Image of a point and of a tangent vector.
    fn apply(&self, x: Complex64, dx: Complex64) -> (Complex64, Complex64) {
        match *self {
            Deformation::Translate { by } => (x + by, dx),
            Deformation::Scale { center, factor } => (center + (x - center) * factor, dx * factor),
            Deformation::Rotate { center, angle } => {
                let u = Complex64::from_polar(1.0, angle);
                (center + (x - center) * u, dx * u)
            }
            Deformation::Bump { center, width, amplitude } => {
                let z = x - center;
                let g = (-z.norm_sqr() / (width * width)).exp();
                // Wirtinger derivatives of g
                let dg = -z.conj() * g / (width * width);
                let dgbar = -z * g / (width * width);
                (x + amplitude * g, dx + amplitude * (dg * dx + dgbar * dx.conj()))
            }
        }
    }

    fn rotation(&self) -> f64 {
        match *self {
            Deformation::Rotate { angle, .. } => angle,
            _ => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Deformation::Translate { by } => by.is_finite(),
            Deformation::Scale { center, factor } => center.is_finite() && factor.is_finite() && factor > 0.0,
            Deformation::Rotate { center, angle } => center.is_finite() && angle.is_finite(),
            Deformation::Bump { center, width, amplitude } => {
                center.is_finite() && amplitude.is_finite() && width.is_finite() && width > 0.0
                    // keeps the map a diffeomorphism
                    && amplitude.norm() < 0.8 * width
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Deformation(format!("malformed deformation {self:?}")))
        }
    }
}

/// Piecewise smooth contour, possibly deformed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub segments: Vec<Segment>,
    pub start: Endpoint,
    pub end: Endpoint,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deformations: Vec<Deformation>,
}

impl Contour {
    /// The real axis from `-inf` to `+inf`.
    pub fn real_line() -> Self {
        Self::through_origin(PI, 0.0)
    }

    /// The imaginary axis from `-i inf` to `+i inf`.
    pub fn imaginary_line() -> Self {
        Self::through_origin(1.5 * PI, 0.5 * PI)
    }

    /// Straight line through 0 from direction `from` to direction `to`.
    pub fn through_origin(from: f64, to: f64) -> Self {
        let o = Complex64::new(0.0, 0.0);
        Contour {
            segments: vec![
                Segment::Ray { origin: o, angle: from, inward: true },
                Segment::Ray { origin: o, angle: to, inward: false },
            ],
            start: Endpoint::Infinity { angle: from },
            end: Endpoint::Infinity { angle: to },
            deformations: Vec::new(),
        }
    }

    /// Counterclockwise circle.
    pub fn circle(center: Complex64, radius: f64) -> Self {
        Contour {
            segments: vec![Segment::Circle { center, radius }],
            start: Endpoint::Closed,
            end: Endpoint::Closed,
            deformations: Vec::new(),
        }
    }

    /// Point and parameter derivative on segment `i`, after deformations.
    pub fn eval(&self, i: usize, s: f64) -> (Complex64, Complex64) {
        let (mut x, mut dx) = self.segments[i].eval(s);
        for d in &self.deformations {
            (x, dx) = d.apply(x, dx);
        }
        (x, dx)
    }

    /// Asymptotic directions of the endpoints at infinity, after deformations.
    pub fn infinite_directions(&self) -> Vec<f64> {
        let rot: f64 = self.deformations.iter().map(Deformation::rotation).sum();
        [&self.start, &self.end]
            .into_iter()
            .filter_map(|e| match e {
                Endpoint::Infinity { angle } => Some(angle + rot),
                _ => None,
            })
            .collect()
    }

    pub fn is_closed(&self) -> bool {
        self.start == Endpoint::Closed
    }

    /// Sampled polyline; rays are cut at parameter `ray_length`.
    pub fn polyline(&self, per_segment: usize, ray_length: f64) -> Vec<[f64; 2]> {
        let mut out = Vec::new();
        for (i, seg) in self.segments.iter().enumerate() {
            let (lo, hi) = if seg.is_ray() { (0.0, ray_length) } else { (0.0, 1.0) };
            let mut pts: Vec<[f64; 2]> = (0..=per_segment)
                .map(|k| {
                    let s = lo + (hi - lo) * k as f64 / per_segment as f64;
                    let (x, _) = self.eval(i, s);
                    [x.re, x.im]
                })
                .collect();
            if seg.sign() < 0.0 {
                pts.reverse();
            }
            out.extend(pts);
        }
        out
    }

    fn with_deformation(&self, d: Deformation) -> Contour {
        let mut c = self.clone();
        c.deformations.push(d);
        c
    }
}

fn angle_in_sector(theta: f64, s: &Sector) -> bool {
    let diff = (theta - s.center_angle + PI).rem_euclid(2.0 * PI) - PI;
    diff.abs() < s.half_width
}

fn sector_of(theta: f64, secs: &[Sector]) -> Option<usize> {
    secs.iter().position(|s| angle_in_sector(theta, s))
}

/// Default radius of the bounded part of the basis arcs.
fn inner_radius(w: &Weight) -> f64 {
    let far = w.poles.iter().map(|(p, _)| p.norm()).fold(0.0, f64::max);
    if w.poles.is_empty() {
        1.0
    } else {
        (2.0 * far + 1.0).max(1.0)
    }
}

/// Arc from sector direction `from` to direction `to`, turning by `sweep`
/// on the circle of radius `rho`.
fn sector_arc(from: f64, to: f64, sweep: f64, rho: f64) -> Contour {
    let o = Complex64::new(0.0, 0.0);
    Contour {
        segments: vec![
            Segment::Ray { origin: Complex64::from_polar(rho, from), angle: from, inward: true },
            Segment::Arc { center: o, radius: rho, start: from, sweep },
            Segment::Ray { origin: Complex64::from_polar(rho, to), angle: to, inward: false },
        ],
        start: Endpoint::Infinity { angle: from },
        end: Endpoint::Infinity { angle: to },
        deformations: Vec::new(),
    }
}

/// Basis of `d` admissible arcs.
pub fn basis_arcs(v: &Potential) -> Result<Vec<Contour>> {
    let w = Weight::new(v)?;
    let d = v.degree();
    let secs = sectors_of(&w);
    let rho = inner_radius(&w);
    let mut arcs = Vec::new();
    // clockwise from sector j to sector j-1
    for j in 1..secs.len() {
        let from = secs[j].center_angle;
        let to = secs[j - 1].center_angle;
        arcs.push(sector_arc(from, to, to - from, rho));
    }
    let zeros: Vec<Complex64> = w.poles.iter().filter(|(_, r)| *r < 0).map(|(p, _)| *p).collect();
    let mut prev: Option<Endpoint> = secs.last().map(|s| Endpoint::Infinity { angle: s.center_angle });
    for &z in &zeros {
        if let Some(p) = prev {
            let seg = match p {
                Endpoint::Infinity { angle } => Segment::Ray { origin: z, angle, inward: true },
                Endpoint::Pole { at } => Segment::Line { a: at, b: z },
                Endpoint::Closed => unreachable!(),
            };
            arcs.push(Contour {
                segments: vec![seg],
                start: p,
                end: Endpoint::Pole { at: z },
                deformations: Vec::new(),
            });
        }
        prev = Some(Endpoint::Pole { at: z });
    }
    let special: Vec<Complex64> = w.poles.iter().map(|(p, _)| *p).collect();
    for &(p, r) in &w.poles {
        if r > 0 {
            let gap = special
                .iter()
                .filter(|q| **q != p)
                .map(|q| (q - p).norm())
                .fold(f64::INFINITY, f64::min);
            arcs.push(Contour::circle(p, (0.4 * gap).min(1.0)));
        }
    }
    if arcs.len() != d {
        return Err(Error::Unsupported(format!(
            "pole/sector configuration yields {} arcs but deg V' = {d}",
            arcs.len()
        )));
    }
    for a in &arcs {
        if let Some(p) = closest_pole(a, &w, 0.05) {
            return Err(Error::Unsupported(format!("basis arc passes through the pole at {p}")));
        }
    }
    Ok(arcs)
}

/// First pole of `V'` within `margin` of the contour, if any.
fn closest_pole(c: &Contour, w: &Weight, margin: f64) -> Option<Complex64> {
    if w.poles.is_empty() {
        return None;
    }
    let far = w.poles.iter().map(|(p, _)| p.norm()).fold(0.0, f64::max) + 2.0;
    let pts = c.polyline(400, 2.0 * far);
    for &(p, r) in &w.poles {
        let endpoint = r < 0
            && [&c.start, &c.end].iter().any(|e| matches!(e, Endpoint::Pole { at } if (at - p).norm() < 1e-12));
        if endpoint {
            continue;
        }
        let hit = pts.windows(2).any(|ab| {
            let a = Complex64::new(ab[0][0], ab[0][1]);
            let b = Complex64::new(ab[1][0], ab[1][1]);
            point_segment_distance(p, a, b) < margin
        });
        if hit {
            return Some(p);
        }
    }
    None
}

fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Result of [`admissibility_check`].
#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityReport {
    pub pass: bool,
    pub kmax: u32,
    pub offending: Option<[f64; 2]>,
    pub reason: String,
}

/// Checks that `|x^k e^{-V(x)}|` stays bounded along `c` for `k <= kmax`:
/// each end at infinity must lie strictly inside a sector, and sampled
/// values along rays must decay.
pub fn admissibility_check(c: &Contour, v: &Potential, kmax: u32) -> Result<AdmissibilityReport> {
    let w = Weight::new(v)?;
    Ok(admissibility_with(c, &w, kmax))
}

pub fn admissibility_with(c: &Contour, w: &Weight, kmax: u32) -> AdmissibilityReport {
    let fail = |x: Complex64, reason: String| AdmissibilityReport {
        pass: false,
        kmax,
        offending: Some([x.re, x.im]),
        reason,
    };
    for theta in c.infinite_directions() {
        if !w.decays_along(theta) {
            let x = Complex64::from_polar(1e3, theta);
            return fail(x, format!("Re V does not grow to +inf along direction {theta:.4}"));
        }
    }
    if let Some(p) = closest_pole(c, w, 1e-9) {
        return fail(p, "contour meets a pole of V'".into());
    }
    for (i, seg) in c.segments.iter().enumerate() {
        let mut peak = 0.0f64;
        let samples: Vec<f64> = if seg.is_ray() {
            (0..60).map(|j| if j == 0 { 0.0 } else { 1.25f64.powi(j) - 1.0 }).collect()
        } else {
            (0..=64).map(|j| j as f64 / 64.0).collect()
        };
        let mut last = 0.0;
        for &s in &samples {
            let (x, _) = c.eval(i, s);
            let lw = w.log_weight(x).re;
            let lx = x.norm().max(1.0).ln() * kmax as f64;
            let val = lw + lx;
            if !val.is_finite() && val > 0.0 {
                return fail(x, "weight is not finite".into());
            }
            peak = peak.max(val);
            last = val;
        }
        if seg.is_ray() && last > peak - 20.0 {
            let (x, _) = c.eval(i, *samples.last().unwrap());
            return fail(x, "integrand does not decay along the ray".into());
        }
    }
    AdmissibilityReport { pass: true, kmax, offending: None, reason: "ok".into() }
}

/// Applies a deformation after checking that it is a homotopy through
/// admissible contours: ends at infinity stay in their sectors and no pole
/// of `V'` is crossed.
pub fn deform(c: &Contour, bump: &Deformation, v: &Potential) -> Result<Contour> {
    bump.validate()?;
    let w = Weight::new(v)?;
    let secs = sectors_of(&w);
    let before = c.infinite_directions();
    let out = c.with_deformation(bump.clone());
    for (t0, t1) in before.iter().zip(out.infinite_directions()) {
        let s0 = sector_of(*t0, &secs);
        let s1 = sector_of(t1, &secs);
        if s1.is_none() || s0 != s1 {
            return Err(Error::Deformation(format!(
                "end at infinity leaves its admissible sector (direction {t1:.4})"
            )));
        }
        let rot = t1 - t0;
        if rot.abs() >= PI {
            return Err(Error::Deformation("rotation winds an end around infinity".into()));
        }
    }
    for step in 0..=20 {
        let h = step as f64 / 20.0;
        let partial = c.with_deformation(bump.partial(h));
        if let Some(p) = closest_pole(&partial, &w, 1e-3) {
            return Err(Error::Deformation(format!("deformation crosses the pole at {p}")));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
