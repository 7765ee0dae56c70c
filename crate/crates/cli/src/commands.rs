use std::fmt;
use std::fs;
use std::path::Path;

use eigenpaths::construct::RipResult;
use eigenpaths::polypaths::convex_reduction_poly;
use eigenpaths::twobytwo::PairingVerdict;
use eigenpaths::{
    classify, convex_reduction_check, pairings_of, rip_preserving_endpoints, rip_with, RipOptions, step_bound, splice_witness_experiment,
    track, track_roots, AmbiguityReport, CMatrix, Complex64, EigenPathSet, MatrixPath, MonicPoly, PathEval, PolyPath,
    RealFn, TrackConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::svg::{Chart, Series};
use crate::{Cli, Command};

pub enum Failure {
    Parse(String),
    Numerical(String),
    Assertion(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Assertion(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Parse(m) => write!(f, "bad input: {m}"),
            Failure::Numerical(m) => write!(f, "{m}"),
            Failure::Assertion(m) => write!(f, "assertion failed: {m}"),
        }
    }
}

impl From<eigenpaths::Error> for Failure {
    fn from(e: eigenpaths::Error) -> Self {
        if e.is_input_error() {
            Failure::Parse(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

type Out<T> = Result<T, Failure>;

fn read_json<T: for<'de> Deserialize<'de>>(cli: &Cli) -> Out<T> {
    let path = cli.input.as_ref().ok_or_else(|| Failure::Parse("--input is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::Parse(format!("cannot read {}: {e}", path.display())))?;
    // serde_json reports line and column
    serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn config(cli: &Cli) -> Out<TrackConfig> {
    let Some(raw) = &cli.config else {
        return Ok(TrackConfig::default());
    };
    let text = if raw.trim_start().starts_with('{') {
        raw.clone()
    } else {
        fs::read_to_string(raw).map_err(|e| Failure::Parse(format!("cannot read config {raw}: {e}")))?
    };
    let json: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("config: {e}")))?;
    Ok(TrackConfig::default().with_overrides(&json)?)
}

struct Writer<'a> {
    dir: &'a Path,
    written: Vec<String>,
}

impl Writer<'_> {
    fn put(&mut self, name: &str, contents: &str) -> Out<()> {
        let p = self.dir.join(name);
        fs::write(&p, contents).map_err(|e| Failure::Numerical(format!("cannot write {}: {e}", p.display())))?;
        self.written.push(name.to_string());
        Ok(())
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("results serialize");
    s.push('\n');
    s
}

pub fn run(cli: &Cli) -> Out<()> {
    fs::create_dir_all(&cli.out).map_err(|e| Failure::Numerical(format!("cannot create {}: {e}", cli.out.display())))?;
    let mut w = Writer {
        dir: &cli.out,
        written: Vec::new(),
    };
    let cfg = config(cli)?;
    let summary = match &cli.command {
        Command::Track => cmd_track(cli, &cfg, &mut w)?,
        Command::Classify2x2 { expect } => cmd_classify(cli, &cfg, expect.as_deref(), &mut w)?,
        Command::Rip { preserve } => cmd_rip(cli, &cfg, *preserve, &mut w)?,
        Command::Polytrack => cmd_polytrack(cli, &cfg, &mut w)?,
        Command::Reduce => cmd_reduce(cli, &cfg, &mut w)?,
        Command::Perturb => cmd_perturb(cli, &cfg, &mut w)?,
    };
    println!("{summary}");
    for f in &w.written {
        println!("wrote {}", cli.out.join(f).display());
    }
    Ok(())
}

fn path_series(set: &EigenPathSet, part: fn(Complex64) -> f64, prefix: &str, background: bool) -> Vec<Series> {
    set.paths
        .iter()
        .enumerate()
        .map(|(j, p)| Series {
            label: format!("{prefix}{j}"),
            points: set.grid.iter().zip(p).map(|(&a, &z)| (a, part(z))).collect(),
            background,
        })
        .collect()
}

fn markers(report: &AmbiguityReport, part: fn(Complex64) -> f64) -> Vec<(f64, f64)> {
    report.clusters.iter().map(|c| (c.ambiguity.alpha, part(c.ambiguity.lambda))).collect()
}

fn re(z: Complex64) -> f64 {
    z.re
}

fn im(z: Complex64) -> f64 {
    z.im
}

/// Re and Im charts of a path set, with an optional background set.
fn region_charts(
    w: &mut Writer,
    stem: &str,
    title: &str,
    set: &EigenPathSet,
    report: &AmbiguityReport,
    behind: Option<&EigenPathSet>,
) -> Out<()> {
    for (part, name, f) in [("re", "Re", re as fn(Complex64) -> f64), ("im", "Im", im)] {
        let mut series = behind.map_or_else(Vec::new, |b| path_series(b, f, "before ", true));
        series.extend(path_series(set, f, "path ", false));
        let chart = Chart {
            title: format!("{title}: {name}(lambda) vs alpha"),
            x_label: "alpha".into(),
            y_label: format!("{name}(lambda)"),
            series,
            markers: markers(report, f),
        };
        w.put(&format!("{stem}_{part}.svg"), &chart.render())?;
    }
    Ok(())
}

fn cmd_track(cli: &Cli, cfg: &TrackConfig, w: &mut Writer) -> Out<String> {
    let path: MatrixPath = read_json(cli)?;
    path.validate()?;
    let t = track(&path, cfg)?;
    if cli.format.csv() {
        w.put("eigenpaths.csv", &t.paths.to_csv())?;
    }
    if cli.format.json() {
        w.put("ambiguities.json", &pretty(&t.report))?;
    }
    if cli.format.svg() {
        region_charts(w, "eigenpaths", "eigenpaths", &t.paths, &t.report, None)?;
    }
    let ps = pairings_of(&t, cfg.pairing_cap);
    Ok(format!(
        "tracked {} eigenpaths on {} grid points; {} ambiguities; {} eigenpairings",
        t.paths.n(),
        t.paths.grid.len(),
        t.report.len(),
        ps.len()
    ))
}

#[derive(Deserialize)]
struct PairInput {
    a: CMatrix,
    b: CMatrix,
}

fn cmd_classify(cli: &Cli, cfg: &TrackConfig, expect: Option<&str>, w: &mut Writer) -> Out<String> {
    let PairInput { a, b } = read_json(cli)?;
    let v: PairingVerdict = classify(&a, &b)?;
    let verdict = serde_json::to_value(v.verdict).expect("verdict serializes");
    let name = verdict.as_str().unwrap_or_default().to_string();
    if cli.format.json() {
        w.put("verdict.json", &pretty(&v))?;
    }
    if cli.format.svg() {
        let t = track(&MatrixPath::convex(a, b), cfg)?;
        region_charts(w, "classify", &format!("verdict {name}"), &t.paths, &t.report, None)?;
    }
    if let Some(want) = expect {
        if want != name {
            return Err(Failure::Assertion(format!("expected verdict {want}, got {name}")));
        }
    }
    Ok(format!("verdict {name} (theta {:.6}, |arg(mu/lambda)| {:.6})", v.theta, v.arg_ratio.abs()))
}

fn cmd_rip(cli: &Cli, cfg: &TrackConfig, preserve: bool, w: &mut Writer) -> Out<String> {
    let path: MatrixPath = read_json(cli)?;
    path.validate()?;
    let eps = cli.eps.unwrap_or(0.1);
    let r: RipResult = if preserve {
        rip_preserving_endpoints(&path, eps, cfg)?
    } else {
        let opts = RipOptions {
            seed: cli.seed,
            ..Default::default()
        };
        rip_with(&path, eps, cfg, &opts)?
    };
    if !(r.sup_dev < eps && r.path_dev < eps) {
        return Err(Failure::Assertion(format!(
            "deviations sup {:e}, path {:e} not below eps {eps:e}",
            r.sup_dev, r.path_dev
        )));
    }
    let before = track(&path, cfg)?;
    let after = track(&r.new_path, cfg)?;
    if !after.report.is_empty() {
        return Err(Failure::Assertion("ripped path still has ambiguities".into()));
    }
    if cli.format.json() {
        w.put("rip.json", &r.to_json())?;
        w.put("ripped_path.json", &pretty(&r.new_path))?;
    }
    if cli.format.csv() {
        w.put("ripped_path.csv", &r.sampled_csv())?;
        w.put("eigenpaths_before.csv", &before.paths.to_csv())?;
        w.put("eigenpaths_after.csv", &after.paths.to_csv())?;
    }
    if cli.format.svg() {
        region_charts(w, "rip", &format!("rip eps={eps}"), &after.paths, &before.report, Some(&before.paths))?;
    }
    Ok(format!(
        "ripped {} ambiguities; sup deviation {:.3e}, path deviation {:.3e}, min gap {:.3e}",
        before.report.len(),
        r.sup_dev,
        r.path_dev,
        r.min_gap
    ))
}

fn cmd_polytrack(cli: &Cli, cfg: &TrackConfig, w: &mut Writer) -> Out<String> {
    let pp: PolyPath = read_json(cli)?;
    pp.validate()?;
    let t = track_roots(&pp, cfg)?;
    if cli.format.csv() {
        w.put("roots.csv", &t.paths.to_csv())?;
    }
    if cli.format.json() {
        w.put("ambiguities.json", &pretty(&t.report))?;
    }
    if cli.format.svg() {
        region_charts(w, "roots", "roots", &t.paths, &t.report, None)?;
    }
    Ok(format!("tracked {} root paths; {} collisions", t.paths.n(), t.report.len()))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ReduceInput {
    Matrices { a: CMatrix, b: CMatrix, f: RealFn, g: RealFn },
    Polys { q: Vec<Complex64>, r: Vec<Complex64>, f: RealFn, g: RealFn },
}

fn cmd_reduce(cli: &Cli, cfg: &TrackConfig, w: &mut Writer) -> Out<String> {
    let input: ReduceInput = read_json(cli)?;
    let rep = match input {
        ReduceInput::Matrices { a, b, f, g } => convex_reduction_check(&a, &b, &f, &g, cfg)?,
        ReduceInput::Polys { q, r, f, g } => convex_reduction_poly(&MonicPoly::new(q)?, &MonicPoly::new(r)?, &f, &g, cfg)?,
    };
    if cli.format.json() {
        w.put("reduction.json", &pretty(&rep))?;
    }
    match rep.contained {
        Some(false) => Err(Failure::Assertion(format!("{} convex pairings are missing", rep.missing.len()))),
        Some(true) => Ok(format!(
            "all {} convex pairings found among {} combination pairings",
            rep.convex_pairings, rep.combination_pairings
        )),
        None => Ok(format!("hypothesis fails (min max(f, g) = {:e}); nothing asserted", rep.min_f_or_g)),
    }
}

/// `C(α) + E` for a fixed matrix `E`.
struct Offset<'a> {
    base: &'a MatrixPath,
    e: CMatrix,
}

impl PathEval for Offset<'_> {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn eval(&self, alpha: f64) -> eigenpaths::Result<CMatrix> {
        Ok(&self.base.eval(alpha)? + &self.e)
    }
}

#[derive(Serialize)]
struct PerturbSummary {
    eps: f64,
    seed: u64,
    trials: usize,
    witnesses: usize,
    within_delta: usize,
    base_clusters: usize,
    worst_deviation: f64,
}

fn cmd_perturb(cli: &Cli, cfg: &TrackConfig, w: &mut Writer) -> Out<String> {
    let path: MatrixPath = read_json(cli)?;
    path.validate()?;
    let eps = cli.eps.unwrap_or(0.1);
    if !(eps > 0.0) {
        return Err(Failure::Parse("--eps must be positive".into()));
    }
    let n = path.dim();
    let mut m: f64 = 0.0;
    for k in 0..=256 {
        m = m.max(path.eval(k as f64 / 256.0)?.norm_fro());
    }
    // headroom for sampling between the probe points and for the offset itself
    let delta = step_bound(1.1 * m + 1.0, n, eps);
    let mut master = ChaCha8Rng::seed_from_u64(cli.seed);
    let mut table = String::from("trial,perturbation_norm,delta,within_delta,deviation,witness_found,base_clusters\n");
    let mut summary = PerturbSummary {
        eps,
        seed: cli.seed,
        trials: cli.trials,
        witnesses: 0,
        within_delta: 0,
        base_clusters: 0,
        worst_deviation: 0.0,
    };
    for trial in 0..cli.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(master.gen());
        let e = CMatrix::from_fn(n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let r = delta * rng.gen_range(0.1..0.9);
        let e = e.scale_real(r / e.norm_fro());
        let rep = splice_witness_experiment(&path, &Offset { base: &path, e }, eps, cfg)?;
        summary.witnesses += rep.witness_found as usize;
        summary.within_delta += rep.within_delta as usize;
        summary.base_clusters = rep.base_clusters;
        summary.worst_deviation = summary.worst_deviation.max(rep.deviation);
        table.push_str(&format!(
            "{trial},{:e},{:e},{},{:e},{},{}\n",
            rep.perturbation_norm, rep.delta, rep.within_delta, rep.deviation, rep.witness_found, rep.base_clusters
        ));
    }
    if cli.format.csv() {
        w.put("perturb.csv", &table)?;
    }
    if cli.format.json() {
        w.put("perturb_summary.json", &pretty(&summary))?;
    }
    let line = format!(
        "{}/{} witnesses within eps {eps} ({} within delta, worst deviation {:.3e})",
        summary.witnesses, summary.trials, summary.within_delta, summary.worst_deviation
    );
    if summary.witnesses < summary.trials || summary.within_delta < summary.trials {
        return Err(Failure::Assertion(line));
    }
    Ok(line)
}
