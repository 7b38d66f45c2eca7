use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use loopeq::contours::{admissibility_with, basis_arcs, sectors, ClassJson, Contour, HomologyClass, Weight};
use loopeq::discrim::discriminator_report;
use loopeq::loopgen::{q_from_coeffs, q_mu, Potential};
use loopeq::momsolve::{residuals_scaled, solve_moments_with, needed_partitions, MomentFunctional, SubstitutionOrder};
use loopeq::quad::{expectation_with, moment_matrix, required_kmax, Estimate, MomentTable, MAX_N, MAX_PARTS};
use loopeq::symcore::{cr_int, cr_to_c64, parse_crational, partitions_in_box, partitions_of_weight, Coeff, CRational, MPoly, Partition, PowerSumPoly};
use loopeq::wick::{map_series, tutte_residual, MapSeries, MAX_ORDER};
use loopeq::C64;
use serde::{Deserialize, Serialize};

use crate::cache::MomentCache;
use crate::{Cli, ClassArgs, Command, MapWeights};

pub enum Failure {
    /// Bad flags, unreadable or malformed input, unsupported configuration.
    Config(String),
    /// The computation ran but a mathematical check did not pass.
    Verification(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Verification(_) => 1,
        }
    }

    fn context(self, command: &str) -> Self {
        match self {
            Failure::Config(m) => Failure::Config(format!("{command}: {m}")),
            Failure::Verification(m) => Failure::Verification(format!("{command}: {m}")),
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Verification(m) => m,
        }
    }
}

impl From<loopeq::Error> for Failure {
    fn from(e: loopeq::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Settings shared by every subcommand, validated against the caps.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: &'static str,
    pub potential: Option<PathBuf>,
    pub n: Option<usize>,
    pub tol: Option<f64>,
    pub order: Option<u32>,
    pub out: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Self {
        let (command, potential, n, tol, order) = match &cli.command {
            Command::Gen { pot, n, .. } => ("gen", Some(pot.potential.clone()), *n, None, None),
            Command::Solve { pot, class, .. } => ("solve", Some(pot.potential.clone()), Some(class.n), Some(class.tol), None),
            Command::Residuals { pot, class, .. } => {
                ("residuals", Some(pot.potential.clone()), Some(class.n), Some(class.tol), None)
            }
            Command::Contours { pot, .. } => ("contours", Some(pot.potential.clone()), None, None, None),
            Command::Expect { pot, class, .. } => ("expect", Some(pot.potential.clone()), Some(class.n), Some(class.tol), None),
            Command::Iso { pot, n, tol, .. } => ("iso", Some(pot.potential.clone()), Some(*n), Some(*tol), None),
            Command::Maps { order, .. } => ("maps", None, None, None, Some(*order)),
            Command::Tutte { order, .. } => ("tutte", None, None, None, Some(*order)),
            Command::Discrim { pot, n, tol, .. } => ("discrim", Some(pot.potential.clone()), Some(*n), Some(*tol), None),
        };
        RunConfig { command, potential, n, tol, order, out: cli.out.clone(), cache_dir: cli.cache_dir.clone() }
    }

    pub fn validate(&self) -> Outcome {
        if let Some(n) = self.n {
            if n == 0 || n > MAX_N {
                return Err(Failure::Config(format!("--N must be in 1..={MAX_N}")));
            }
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t < 1.0) {
                return Err(Failure::Config("--tol must lie in (0, 1)".into()));
            }
        }
        if let Some(e) = self.order {
            if e > MAX_ORDER {
                return Err(Failure::Config(format!("--order must be at most {MAX_ORDER}")));
            }
        }
        Ok(())
    }

    fn load_potential(&self) -> Result<Potential, Failure> {
        let path = self.potential.as_ref().ok_or_else(|| Failure::Config("missing --potential".into()))?;
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read potential file {}: {e}", path.display())))?;
        Ok(Potential::from_json_str(&text)?)
    }

    fn emit<T: Serialize>(&self, report: &T) -> Outcome {
        let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
        s.push('\n');
        self.emit_text(&s)
    }

    fn emit_text(&self, s: &str) -> Outcome {
        match &self.out {
            Some(p) => write_file(p, s),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(s.as_bytes())
                    .map_err(|e| Failure::Config(format!("cannot write to stdout: {e}")))
            }
        }
    }
}

fn write_file(p: &Path, s: &str) -> Outcome {
    fs::write(p, s).map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display())))
}

pub fn run(cli: &Cli) -> Outcome {
    let cfg = RunConfig::from_cli(cli);
    dispatch(cli, &cfg).map_err(|f| f.context(cfg.command))
}

fn dispatch(cli: &Cli, cfg: &RunConfig) -> Outcome {
    cfg.validate()?;
    let cfg = cfg.clone();
    let cache = MomentCache::new(cfg.cache_dir.as_deref());
    match &cli.command {
        Command::Gen { mu, n, symbolic, json, .. } => gen(&cfg, mu, *n, *symbolic, *json),
        Command::Solve { class, weight, targets, basis, check, .. } => {
            let args = SolveArgs { weight: *weight, targets: targets.as_deref(), basis: basis.as_deref(), check: *check };
            solve(&cfg, &cache, class, &args)
        }
        Command::Residuals { class, weight, threshold, .. } => residual_cmd(&cfg, &cache, class, *weight, *threshold),
        Command::Contours { emit, samples, ray_length, kmax, .. } => {
            contours(&cfg, emit.as_deref(), *samples, *ray_length, *kmax)
        }
        Command::Expect { class, mu, normalize, moments_csv, .. } => {
            expect(&cfg, &cache, class, mu, *normalize, moments_csv.as_deref())
        }
        Command::Iso { n, tol, threshold, .. } => iso(&cfg, *n, *tol, *threshold),
        Command::Maps { weights, marked, order } => maps(&cfg, weights, marked, *order),
        Command::Tutte { weights, mu, order } => tutte(&cfg, weights, mu, *order),
        Command::Discrim { r, n, tol, threshold, .. } => discrim(&cfg, *r, *n, *tol, *threshold),
    }
}

fn parse_list(s: &str, flag: &str) -> Result<Vec<u32>, Failure> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|_| Failure::Config(format!("{flag}: '{t}' is not a non-negative integer"))))
        .collect()
}

fn parse_partitions(s: &str, flag: &str) -> Result<Vec<Partition>, Failure> {
    s.split(';')
        .map(|t| {
            let parts = parse_list(t, flag)?;
            if parts.contains(&0) {
                return Err(Failure::Config(format!("{flag}: partition parts must be positive")));
            }
            if parts.len() > MAX_PARTS {
                return Err(Failure::Config(format!("{flag}: at most {MAX_PARTS} parts")));
            }
            Ok(Partition::new(parts))
        })
        .collect()
}

#[derive(Serialize)]
struct TermJson {
    mu: Vec<u32>,
    coeff: String,
}

#[derive(Serialize)]
struct GenReport {
    mu: Vec<u32>,
    n: String,
    q: String,
    terms: Vec<TermJson>,
}

fn format_q(terms: &[TermJson]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let pieces: Vec<String> = terms
        .iter()
        .map(|t| {
            let p = Partition::new(t.mu.clone());
            let c = if t.coeff.contains(" + ") || t.coeff.contains(" - ") {
                format!("({})", t.coeff)
            } else {
                t.coeff.clone()
            };
            match (t.mu.is_empty(), c.as_str()) {
                (true, _) => c,
                (false, "1") => format!("p{p}"),
                (false, "-1") => format!("-p{p}"),
                (false, _) => format!("{c}*p{p}"),
            }
        })
        .collect();
    pieces.join(" + ").replace("+ -", "- ")
}

fn gen(cfg: &RunConfig, mu: &str, n: Option<usize>, symbolic: bool, json: bool) -> Outcome {
    let v = cfg.load_potential()?;
    let mu = parse_list(mu, "--mu")?;
    if mu.is_empty() {
        return Err(Failure::Config("--mu: need at least mu_1".into()));
    }
    if mu.len() > MAX_PARTS {
        return Err(Failure::Config(format!("--mu: at most {MAX_PARTS} entries")));
    }
    let (terms, n_label): (Vec<TermJson>, String) = match (&v, n, symbolic) {
        (Potential::Polynomial { t }, _, _) if symbolic || n.is_none() => {
            let mut names = vec!["N".to_string()];
            let coeffs: Vec<MPoly> = t
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    names.push(format!("t{}", k + 1));
                    if symbolic && !Coeff::is_zero(c) {
                        MPoly::var(k + 1)
                    } else {
                        MPoly::constant(c.clone())
                    }
                })
                .collect();
            let nv = match n {
                Some(n) => MPoly::constant(cr_int(n as i64)),
                None => MPoly::var(0),
            };
            let q = q_from_coeffs(&mu, &coeffs, &nv);
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let terms = q
                .terms()
                .map(|(p, c)| TermJson { mu: p.parts().to_vec(), coeff: c.display_with(&refs) })
                .collect();
            (terms, n.map_or("N".to_string(), |n| n.to_string()))
        }
        (Potential::Rational { .. }, None, _) => {
            return Err(Failure::Config("rational potentials need a numeric --N".into()))
        }
        (_, Some(n), _) => {
            let q = q_mu(&mu, &v, n)?;
            let terms = q
                .terms()
                .map(|(p, c)| TermJson {
                    mu: p.parts().to_vec(),
                    coeff: PowerSumPoly::constant(c.clone(), cr_int(1)).to_string(),
                })
                .collect();
            (terms, n.to_string())
        }
        (_, None, _) => unreachable!("polynomial without N handled above"),
    };
    let report = GenReport { mu, n: n_label, q: format_q(&terms), terms };
    if json {
        cfg.emit(&report)
    } else {
        cfg.emit_text(&format!("Q = {}\n", report.q))
    }
}

fn load_class(args: &ClassArgs, v: &Potential) -> Result<HomologyClass, Failure> {
    match &args.class {
        None => {
            let arcs = basis_arcs(v)?;
            let mut comp = vec![0; arcs.len()];
            comp[0] = args.n;
            Ok(HomologyClass::basis(args.n, arcs, comp)?)
        }
        Some(source) => {
            let text = if source.trim_start().starts_with('{') {
                source.clone()
            } else {
                fs::read_to_string(source).map_err(|e| Failure::Config(format!("cannot read class file {source}: {e}")))?
            };
            let js: ClassJson =
                serde_json::from_str(&text).map_err(|e| Failure::Config(format!("malformed class JSON: {e}")))?;
            Ok(HomologyClass::from_json(&js, args.n, v)?)
        }
    }
}

fn monomial(mu: &Partition, n: usize) -> PowerSumPoly {
    PowerSumPoly::monomial(mu.parts(), cr_int(1), cr_int(n as i64))
}

fn table_for(cache: &MomentCache, v: &Potential, class: &HomologyClass, kmax: u32, tol: f64) -> Result<MomentTable, Failure> {
    Ok(cache.table(v, class.arcs(), kmax, tol)?)
}

fn kmax_for(parts: &[Partition], n: usize) -> u32 {
    parts.iter().map(|p| p.weight()).max().unwrap_or(0) + 2 * (n as u32 - 1)
}

#[derive(Serialize)]
struct ValueJson {
    mu: Partition,
    re: f64,
    im: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    err: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    direct: Option<Estimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    relative: Option<f64>,
}

#[derive(Serialize)]
struct SolveReport {
    n: usize,
    d: usize,
    weight: u32,
    class: ClassJson,
    basis: Vec<ValueJson>,
    values: Vec<ValueJson>,
    growth: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_relative: Option<f64>,
}

struct SolveArgs<'a> {
    weight: u32,
    targets: Option<&'a str>,
    basis: Option<&'a Path>,
    check: Option<f64>,
}

#[derive(Deserialize)]
struct BasisEntry {
    mu: Vec<u32>,
    re: f64,
    #[serde(default)]
    im: f64,
}

fn read_basis(path: &Path) -> Result<BTreeMap<Partition, C64>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let entries: Vec<BasisEntry> =
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for e in entries {
        if e.mu.contains(&0) {
            return Err(Failure::Config(format!("{}: partition parts must be positive", path.display())));
        }
        if !e.re.is_finite() || !e.im.is_finite() {
            return Err(Failure::Config(format!("{}: non-finite value for {:?}", path.display(), e.mu)));
        }
        let mu = Partition::new(e.mu);
        if out.insert(mu.clone(), C64::new(e.re, e.im)).is_some() {
            return Err(Failure::Config(format!("{}: duplicate entry for {mu}", path.display())));
        }
    }
    Ok(out)
}

fn solve(cfg: &RunConfig, cache: &MomentCache, args: &ClassArgs, opts: &SolveArgs) -> Outcome {
    let v = cfg.load_potential()?;
    let n = args.n;
    let class = load_class(args, &v)?;
    let d = v.degree();
    let basis_parts = partitions_in_box(n, d as u32 - 1);
    let targets: Vec<Partition> = match opts.targets {
        Some(t) => parse_partitions(t, "--targets")?,
        None => (0..=opts.weight).flat_map(|w| partitions_of_weight(w, MAX_PARTS)).collect(),
    };
    let mut need = Vec::new();
    if opts.basis.is_none() {
        need.extend(basis_parts.iter().cloned());
    }
    if opts.check.is_some() {
        need.extend(targets.iter().cloned());
    }
    let table = if need.is_empty() { None } else { Some(table_for(cache, &v, &class, kmax_for(&need, n), args.tol)?) };
    let mut basis = BTreeMap::new();
    let mut basis_json = Vec::new();
    match opts.basis {
        Some(path) => {
            basis = read_basis(path)?;
            for (nu, x) in &basis {
                basis_json.push(ValueJson { mu: nu.clone(), re: x.re, im: x.im, err: None, direct: None, relative: None });
            }
        }
        None => {
            let table = table.as_ref().expect("table built for the basis");
            for nu in &basis_parts {
                let e = expectation_with(&class, &monomial(nu, n), table)?;
                basis.insert(nu.clone(), e.value());
                basis_json.push(ValueJson { mu: nu.clone(), re: e.re, im: e.im, err: Some(e.err), direct: None, relative: None });
            }
        }
    }
    let f = MomentFunctional::new(n, d, basis.clone())?;
    let sol = solve_moments_with(&f, &v, &targets, SubstitutionOrder::LargestPart)?;
    let mut values = Vec::new();
    let mut max_rel: Option<f64> = None;
    for mu in &targets {
        let s = sol.values[mu];
        let (direct, relative) = match &table {
            Some(table) if opts.check.is_some() => {
                let e = expectation_with(&class, &monomial(mu, n), table)?;
                let scale: f64 = sol.forms[mu].iter().map(|(nu, c)| cr_to_c64(c).norm() * basis[nu].norm()).sum();
                let rel = (s - e.value()).norm() / e.value().norm().max(scale).max(f64::MIN_POSITIVE);
                max_rel = Some(max_rel.map_or(rel, |m: f64| m.max(rel)));
                (Some(e), Some(rel))
            }
            _ => (None, None),
        };
        values.push(ValueJson { mu: mu.clone(), re: s.re, im: s.im, err: None, direct, relative });
    }
    let weight = targets.iter().map(Partition::weight).max().unwrap_or(0);
    let report = SolveReport { n, d, weight, class: class.to_json(), basis: basis_json, values, growth: sol.growth, max_relative: max_rel };
    cfg.emit(&report)?;
    match (opts.check, max_rel) {
        (Some(th), Some(m)) if m > th => Err(Failure::Verification(format!(
            "solved moments deviate from quadrature by {m:.3e} (threshold {th:.1e})"
        ))),
        _ => Ok(()),
    }
}

fn residual_cmd(cfg: &RunConfig, cache: &MomentCache, args: &ClassArgs, weight: u32, threshold: f64) -> Outcome {
    let v = cfg.load_potential()?;
    let n = args.n;
    let class = load_class(args, &v)?;
    let need: Vec<Partition> = needed_partitions(&v, n, weight)?.into_iter().collect();
    let table = table_for(cache, &v, &class, kmax_for(&need, n), args.tol)?;
    let mut oracle = BTreeMap::new();
    let mut scales = BTreeMap::new();
    for mu in &need {
        let e = expectation_with(&class, &monomial(mu, n), &table)?;
        oracle.insert(mu.clone(), e.value());
        scales.insert(mu.clone(), e.scale);
    }
    let report = residuals_scaled(&oracle, &scales, &v, n, weight)?;
    cfg.emit(&report)?;
    if report.max_relative > threshold {
        return Err(Failure::Verification(format!(
            "max relative residual {:.3e} above {threshold:.1e} (worst mu = {:?})",
            report.max_relative, report.worst
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct ArcJson {
    index: usize,
    contour: Contour,
    admissibility: loopeq::contours::AdmissibilityReport,
}

#[derive(Serialize)]
struct ContoursReport {
    degree: usize,
    sectors: Vec<loopeq::contours::Sector>,
    arcs: Vec<ArcJson>,
}

#[derive(Serialize)]
struct PolylineFile {
    arcs: Vec<Vec<[f64; 2]>>,
}

fn contours(cfg: &RunConfig, emit: Option<&Path>, samples: usize, ray_length: f64, kmax: u32) -> Outcome {
    let v = cfg.load_potential()?;
    let w = Weight::new(&v)?;
    let sec = sectors(&v)?;
    let arcs = basis_arcs(&v)?;
    let entries: Vec<ArcJson> = arcs
        .iter()
        .enumerate()
        .map(|(i, c)| ArcJson { index: i + 1, contour: c.clone(), admissibility: admissibility_with(c, &w, kmax) })
        .collect();
    if let Some(p) = emit {
        let lines = PolylineFile { arcs: arcs.iter().map(|c| c.polyline(samples.max(2), ray_length)).collect() };
        write_file(p, &serde_json::to_string(&lines).expect("polylines serialize"))?;
    }
    let failing: Vec<usize> = entries.iter().filter(|a| !a.admissibility.pass).map(|a| a.index).collect();
    cfg.emit(&ContoursReport { degree: v.degree(), sectors: sec, arcs: entries })?;
    if !failing.is_empty() {
        return Err(Failure::Verification(format!("arcs {failing:?} failed the admissibility check")));
    }
    Ok(())
}

#[derive(Serialize)]
struct ExpectReport {
    n: usize,
    class: ClassJson,
    normalized: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    z: Option<Estimate>,
    results: Vec<ValueJson>,
}

fn expect(cfg: &RunConfig, cache: &MomentCache, args: &ClassArgs, mu: &str, normalize: bool, csv: Option<&Path>) -> Outcome {
    let v = cfg.load_potential()?;
    let n = args.n;
    let class = load_class(args, &v)?;
    let parts = parse_partitions(mu, "--mu")?;
    let table = table_for(cache, &v, &class, kmax_for(&parts, n), args.tol)?;
    if let Some(p) = csv {
        write_file(p, &table.to_csv())?;
    }
    let z = if normalize { Some(expectation_with(&class, &monomial(&Partition::empty(), n), &table)?) } else { None };
    let mut results = Vec::new();
    for mu in &parts {
        let p = monomial(mu, n);
        debug_assert!(required_kmax(&p, n) <= table.kmax);
        let e = expectation_with(&class, &p, &table)?;
        let (val, err) = match &z {
            Some(z) => {
                let q = e.value() / z.value();
                (q, q.norm() * (e.err / e.value().norm().max(f64::MIN_POSITIVE) + z.err / z.value().norm()))
            }
            None => (e.value(), e.err),
        };
        let err = if err.is_finite() { err } else { e.err / z.map_or(1.0, |z| z.value().norm()) };
        results.push(ValueJson { mu: mu.clone(), re: val.re, im: val.im, err: Some(err), direct: None, relative: None });
    }
    cfg.emit(&ExpectReport { n, class: class.to_json(), normalized: normalize, z, results })
}

fn iso(cfg: &RunConfig, n: usize, tol: f64, threshold: f64) -> Outcome {
    let v = cfg.load_potential()?;
    let m = moment_matrix(&v, n, tol)?;
    cfg.emit(&m)?;
    if m.smallest_scaled_singular_value <= threshold {
        return Err(Failure::Verification(format!(
            "smallest scaled singular value {:.3e} not above {threshold:.1e}",
            m.smallest_scaled_singular_value
        )));
    }
    Ok(())
}

fn map_weights(w: &MapWeights) -> Result<Vec<(u32, CRational)>, Failure> {
    let mut out = Vec::new();
    for (k, s) in [(3, &w.t3), (4, &w.t4), (5, &w.t5), (6, &w.t6)] {
        if let Some(s) = s {
            let c = parse_crational(s, "0").map_err(|e| Failure::Config(format!("--t{k}: {e}")))?;
            out.push((k, c));
        }
    }
    Ok(out)
}

fn finish_series(s: MapSeries, w: &MapWeights, values: &[(u32, CRational)]) -> MapSeries {
    if w.symbolic {
        s
    } else {
        s.with_weights(values)
    }
}

fn maps(cfg: &RunConfig, w: &MapWeights, marked: &str, order: u32) -> Outcome {
    let values = map_weights(w)?;
    let degrees: Vec<u32> = values.iter().map(|(k, _)| *k).collect();
    let marked = parse_list(marked, "--marked")?;
    if marked.len() > MAX_PARTS {
        return Err(Failure::Config(format!("--marked: at most {MAX_PARTS} faces")));
    }
    let s = map_series(&degrees, &marked, order)?;
    cfg.emit(&finish_series(s, w, &values).to_json())
}

#[derive(Serialize)]
struct TutteReport {
    mu: Vec<u32>,
    zero: bool,
    residual: loopeq::wick::SeriesJson,
}

fn tutte(cfg: &RunConfig, w: &MapWeights, mu: &str, order: u32) -> Outcome {
    let values = map_weights(w)?;
    let degrees: Vec<u32> = values.iter().map(|(k, _)| *k).collect();
    let mu = parse_list(mu, "--mu")?;
    if mu.is_empty() || mu.len() > MAX_PARTS {
        return Err(Failure::Config(format!("--mu: need 1..={MAX_PARTS} entries")));
    }
    let res = tutte_residual(&degrees, &mu, order)?;
    let zero = res.is_zero();
    cfg.emit(&TutteReport { mu, zero, residual: finish_series(res, w, &values).to_json() })?;
    if !zero {
        return Err(Failure::Verification("Tutte residual series is not zero".into()));
    }
    Ok(())
}

fn discrim(cfg: &RunConfig, r: u32, n: usize, tol: f64, threshold: f64) -> Outcome {
    let v = cfg.load_potential()?;
    let rep = discriminator_report(&v, n, r, tol)?;
    cfg.emit(&rep)?;
    if rep.max_window_deviation >= threshold {
        return Err(Failure::Verification(format!(
            "window ratio deviates from delta by {:.3e} (threshold {threshold})",
            rep.max_window_deviation
        )));
    }
    Ok(())
}
