//! Adaptive eigenvalue path tracking and collision detection.
//!
//! The tracker samples the path on a uniform grid and bisects every interval
//! it cannot certify. An interval `[a, b]` is certified when either the
//! perturbation bound alone keeps every eigenvalue within `eps_resolution`
//! and well inside its cluster separation, or when the matched motion is
//! small, the midpoint confirms the matching, and linear prediction through
//! the midpoint is accurate relative to the local separation.

pub(crate) mod experiment;
mod matching;

pub use experiment::{splice_witness_experiment, ExperimentReport};
pub use matching::{assign, bottleneck_assign, match_spectra, match_values, matched_cost, matched_max_distance};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::TrackConfig;
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::path::{uniform_grid, PathEval};
use crate::spectra::eigenvalues;
use crate::types::{Ambiguity, AmbiguityReport, Cluster, EigenPathSet, ProbeData};

/// Largest `‖ΔC‖₂` for which matched eigenvalue motion stays below `eps`,
/// given `m ≥ ‖C‖₂` on both ends: `min{2m, εⁿ / (2^{4n−3} m^{n−1})}`.
///
/// Returns 0 for arguments outside `m > 0, n ≥ 1, eps > 0`.
pub fn step_bound(m: f64, n: usize, eps: f64) -> f64 {
    if !(m > 0.0 && eps > 0.0) || n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let log = nf * eps.ln() - (4.0 * nf - 3.0) * std::f64::consts::LN_2 - (nf - 1.0) * m.ln();
    (2.0 * m).min(log.exp())
}

/// `4 · 2^{−1/n} (‖C‖ + ‖C′‖)^{1−1/n} ‖C − C′‖^{1/n}`, an upper bound on the
/// optimally matched eigenvalue distance of two n×n matrices (2-norms).
pub fn raw_bound(norm_c: f64, norm_c2: f64, norm_diff: f64, n: usize) -> f64 {
    let inv = 1.0 / n as f64;
    4.0 * 2f64.powf(-inv) * (norm_c + norm_c2).powf(1.0 - inv) * norm_diff.powf(inv)
}

/// Tracked eigenpaths and the collision clusters found along the way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tracked {
    pub paths: EigenPathSet,
    pub report: AmbiguityReport,
}

#[derive(Clone)]
struct Sample {
    alpha: f64,
    values: Vec<Complex64>,
    mat: CMatrix,
    fro: f64,
    depth: usize,
}

fn take_sample<P: PathEval>(path: &P, alpha: f64, depth: usize) -> Result<Sample> {
    let mat = path.eval(alpha)?;
    let values = eigenvalues(&mat)?.into_vec();
    let fro = mat.norm_fro();
    Ok(Sample {
        alpha,
        values,
        mat,
        fro,
        depth,
    })
}

/// Union-find labels of `values` at radius `tol` (label = smallest member).
pub(crate) fn cluster_labels(values: &[Complex64], tol: f64) -> Vec<usize> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    (0..n).map(|i| root(&mut parent, i)).collect()
}

/// Groups of size at least two.
pub(crate) fn groups_of(labels: &[usize]) -> Vec<Vec<usize>> {
    let n = labels.len();
    let mut out = Vec::new();
    for r in 0..n {
        let g: Vec<usize> = (0..n).filter(|&i| labels[i] == r).collect();
        if g.len() >= 2 {
            out.push(g);
        }
    }
    out
}

/// Smallest distance between values carrying different labels.
fn separation(values: &[Complex64], labels: &[usize]) -> f64 {
    let mut s = f64::INFINITY;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if labels[i] != labels[j] {
                s = s.min((values[i] - values[j]).norm());
            }
        }
    }
    s
}

/// Assignment `xa[j] ↦ vb[π(j)]`; within clusters of `xa` the assignment
/// follows the linear prediction `pred`.
fn step_assign(
    xa: &[Complex64],
    la: &[usize],
    vb: &[Complex64],
    pred: Option<&[Complex64]>,
) -> Vec<usize> {
    let mut pi = match_values(xa, vb).expect("equal sizes");
    if let Some(pred) = pred {
        for g in groups_of(la) {
            let targets: Vec<usize> = g.iter().map(|&j| pi[j]).collect();
            let pg: Vec<Complex64> = g.iter().map(|&j| pred[j]).collect();
            let tv: Vec<Complex64> = targets.iter().map(|&t| vb[t]).collect();
            let sub = match_values(&pg, &tv).expect("equal sizes");
            for (k, &j) in g.iter().enumerate() {
                pi[j] = targets[sub[k]];
            }
        }
    }
    pi
}

fn predict(prev: Option<(f64, &[Complex64])>, a: f64, xa: &[Complex64], t: f64) -> Option<Vec<Complex64>> {
    let (ap, xp) = prev?;
    if a <= ap {
        return None;
    }
    let s = (t - a) / (a - ap);
    Some(xa.iter().zip(xp).map(|(x, p)| x + (x - p) * s).collect())
}

fn closest_approach(d0: Complex64, d1: Complex64) -> f64 {
    let dd = d1 - d0;
    let den = dd.norm_sqr();
    if den == 0.0 {
        return d0.norm();
    }
    let t = (-(d0.re * dd.re + d0.im * dd.im) / den).clamp(0.0, 1.0);
    (d0 + dd * t).norm()
}

enum Verdict {
    Accept(Vec<usize>),
    Refine {
        mid: Option<Sample>,
        direct: Vec<usize>,
        involved: Vec<usize>,
    },
}

struct Ctx<'a, P> {
    path: &'a P,
    cfg: &'a TrackConfig,
    n: usize,
}

impl<P: PathEval> Ctx<'_, P> {
    fn certify(
        &self,
        a: &Sample,
        xa: &[Complex64],
        prev: Option<(f64, &[Complex64])>,
        b: &Sample,
    ) -> Result<Verdict> {
        let tol = self.cfg.collision_tol;
        let la = cluster_labels(xa, tol);
        let lb = cluster_labels(&b.values, tol);
        let pred_b = predict(prev, a.alpha, xa, b.alpha);
        let direct = step_assign(xa, &la, &b.values, pred_b.as_deref());
        let xb: Vec<Complex64> = direct.iter().map(|&t| b.values[t]).collect();
        let sep_a = separation(xa, &la);
        let sep_b = separation(&b.values, &lb);

        let motion: Vec<f64> = xa.iter().zip(&xb).map(|(p, q)| (p - q).norm()).collect();
        let mut involved: Vec<usize> = Vec::new();
        for (j, &m) in motion.iter().enumerate() {
            if m > self.cfg.eps_resolution {
                involved.push(j);
            }
        }

        let diff = (&a.mat - &b.mat).norm_fro();
        let raw = raw_bound(a.fro, b.fro, diff, self.n);
        let rigorous = raw <= self.cfg.eps_resolution && raw < 0.5 * sep_a && raw < 0.5 * sep_b;
        if rigorous && involved.is_empty() {
            return Ok(Verdict::Accept(direct));
        }

        // closest approach of the interpolated segments
        let lbx: Vec<usize> = direct.iter().map(|&t| lb[t]).collect();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if la[i] == la[j] || lbx[i] == lbx[j] {
                    continue;
                }
                let d0 = xa[i] - xa[j];
                let d1 = xb[i] - xb[j];
                if closest_approach(d0, d1) < 0.5 * d0.norm().min(d1.norm()) {
                    involved.push(i);
                    involved.push(j);
                }
            }
        }

        let mid_alpha = 0.5 * (a.alpha + b.alpha);
        let can_split = mid_alpha > a.alpha && mid_alpha < b.alpha;
        if !can_split {
            involved.sort_unstable();
            involved.dedup();
            return Ok(if involved.is_empty() {
                Verdict::Accept(direct)
            } else {
                Verdict::Refine {
                    mid: None,
                    direct,
                    involved,
                }
            });
        }
        let m = take_sample(self.path, mid_alpha, a.depth.max(b.depth) + 1)?;
        let pred_m = predict(prev, a.alpha, xa, mid_alpha);
        let to_mid = step_assign(xa, &la, &m.values, pred_m.as_deref());
        let xm: Vec<Complex64> = to_mid.iter().map(|&t| m.values[t]).collect();
        let lm = cluster_labels(&xm, tol);
        let pred_bm = predict(Some((a.alpha, xa)), mid_alpha, &xm, b.alpha);
        let via_mid = step_assign(&xm, &lm, &b.values, pred_bm.as_deref());

        // consistency up to cluster membership on either end
        for g in la.iter().copied().collect::<std::collections::BTreeSet<_>>() {
            let members: Vec<usize> = (0..self.n).filter(|&j| la[j] == g).collect();
            let mut d: Vec<usize> = members.iter().map(|&j| lb[direct[j]]).collect();
            let mut v: Vec<usize> = members.iter().map(|&j| lb[via_mid[j]]).collect();
            d.sort_unstable();
            v.sort_unstable();
            if d != v {
                for &j in &members {
                    if lb[direct[j]] != lb[via_mid[j]] {
                        involved.push(j);
                        if let Some(k) = nearest_other(xa, j) {
                            involved.push(k);
                        }
                    }
                }
            }
        }

        let budget = self.cfg.prediction_ratio * sep_a.min(sep_b);
        if budget.is_finite() {
            for j in 0..self.n {
                let err = (xm[j] - (xa[j] + xb[j]) * 0.5).norm();
                if err > budget {
                    involved.push(j);
                    if let Some(k) = nearest_other(xa, j) {
                        involved.push(k);
                    }
                    if let Some(k) = nearest_other(&xb, j) {
                        involved.push(k);
                    }
                }
            }
        }
        involved.sort_unstable();
        involved.dedup();
        if involved.is_empty() {
            Ok(Verdict::Accept(direct))
        } else {
            Ok(Verdict::Refine {
                mid: Some(m),
                direct,
                involved,
            })
        }
    }
}

fn nearest_other(v: &[Complex64], j: usize) -> Option<usize> {
    (0..v.len())
        .filter(|&k| k != j)
        .min_by(|&p, &q| (v[p] - v[j]).norm().total_cmp(&(v[q] - v[j]).norm()))
}

/// Tracks the eigenvalues of `path` over `[0, 1]`.
///
/// Intervals are bisected until certified or until `max_depth`; uncertified
/// intervals at the cap become resolution-limited clusters. Every cluster is
/// classified as singular or not with [`classify_ambiguity`].
pub fn track<P: PathEval>(path: &P, cfg: &TrackConfig) -> Result<Tracked> {
    cfg.validate()?;
    let n = path.dim();
    let ctx = Ctx { path, cfg, n };
    let grid0 = uniform_grid(cfg.grid_init);
    let first = take_sample(path, 0.0, 0)?;
    let mut cols: Vec<Vec<Complex64>> = vec![first.values.clone()];
    let mut accepted: Vec<Sample> = vec![first];
    let mut stack: Vec<Sample> = Vec::with_capacity(grid0.len());
    for &g in grid0[1..].iter().rev() {
        stack.push(take_sample(path, g, 0)?);
    }
    let mut forced: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut notes: Vec<String> = Vec::new();

    while let Some(b) = stack.last() {
        let k = accepted.len() - 1;
        let a = &accepted[k];
        let xa = &cols[k];
        let prev = if k > 0 {
            Some((accepted[k - 1].alpha, cols[k - 1].as_slice()))
        } else {
            None
        };
        match ctx.certify(a, xa, prev, b)? {
            Verdict::Accept(pi) => {
                let b = stack.pop().expect("nonempty");
                cols.push(pi.iter().map(|&t| b.values[t]).collect());
                accepted.push(b);
            }
            Verdict::Refine {
                mid,
                direct,
                involved,
            } => {
                let depth = a.depth.max(b.depth) + 1;
                if depth <= cfg.max_depth && mid.is_some() {
                    stack.push(mid.expect("checked"));
                    continue;
                }
                let b = stack.pop().expect("nonempty");
                let xb: Vec<Complex64> = direct.iter().map(|&t| b.values[t]).collect();
                let members = forced_members(xa, &xb, &involved, cfg.collision_tol);
                match members {
                    Some((at_b, group)) => forced.push((if at_b { k + 1 } else { k }, group)),
                    None => notes.push(format!(
                        "interval [{:.6e}, {:.6e}] accepted at the depth cap without certification",
                        accepted[k].alpha, b.alpha
                    )),
                }
                cols.push(xb);
                accepted.push(b);
            }
        }
    }

    let grid: Vec<f64> = accepted.iter().map(|s| s.alpha).collect();
    let paths: Vec<Vec<Complex64>> = (0..n).map(|j| cols.iter().map(|c| c[j]).collect()).collect();
    let set = EigenPathSet { grid, paths };
    let mut report = build_report(&set, &forced, cfg);
    report.notes.extend(notes);
    for cl in &mut report.clusters {
        let (singular, probe) = classify_escalating(path, cl, &set.grid, cfg)?;
        cl.ambiguity.singular = singular;
        cl.probe = Some(probe);
    }
    if !report.is_empty() {
        report
            .notes
            .push("in-cluster matching fixed by linear prediction; other splices are enumerated separately".into());
    }
    Ok(Tracked { paths: set, report })
}

/// Chooses the endpoint with the tighter gap among `involved` paths and
/// groups them at twice that gap.
fn forced_members(
    xa: &[Complex64],
    xb: &[Complex64],
    involved: &[usize],
    tol: f64,
) -> Option<(bool, Vec<usize>)> {
    if involved.len() < 2 {
        return None;
    }
    let gap = |x: &[Complex64]| {
        let mut g = f64::INFINITY;
        for (p, &i) in involved.iter().enumerate() {
            for &j in &involved[p + 1..] {
                g = g.min((x[i] - x[j]).norm());
            }
        }
        g
    };
    let (ga, gb) = (gap(xa), gap(xb));
    let (at_b, x, g) = if gb < ga { (true, xb, gb) } else { (false, xa, ga) };
    let thr = tol.max(2.0 * g);
    let sub: Vec<Complex64> = involved.iter().map(|&j| x[j]).collect();
    let labels = cluster_labels(&sub, thr);
    let best = groups_of(&labels)
        .into_iter()
        .min_by(|p, q| diameter(&sub, p).total_cmp(&diameter(&sub, q)))?;
    Some((at_b, best.into_iter().map(|i| involved[i]).collect()))
}

fn diameter(v: &[Complex64], members: &[usize]) -> f64 {
    let mut d: f64 = 0.0;
    for (p, &i) in members.iter().enumerate() {
        for &j in &members[p + 1..] {
            d = d.max((v[i] - v[j]).norm());
        }
    }
    d
}

fn build_report(set: &EigenPathSet, forced: &[(usize, Vec<usize>)], cfg: &TrackConfig) -> AmbiguityReport {
    let m = set.grid.len();
    // member groups per sample, with forced groups merged in
    let mut per: Vec<Vec<(Vec<usize>, bool)>> = Vec::with_capacity(m);
    for k in 0..m {
        let col = set.column(k);
        let labels = cluster_labels(&col, cfg.collision_tol);
        let mut groups: Vec<(Vec<usize>, bool)> = groups_of(&labels).into_iter().map(|g| (g, false)).collect();
        for (fk, fg) in forced.iter().filter(|(fk, _)| *fk == k) {
            let _ = fk;
            let mut merged = fg.clone();
            groups.retain(|(g, _)| {
                if g.iter().any(|x| fg.contains(x)) {
                    merged.extend(g.iter().copied());
                    false
                } else {
                    true
                }
            });
            merged.sort_unstable();
            merged.dedup();
            groups.push((merged, true));
        }
        groups.sort();
        per.push(groups);
    }
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut open: Vec<(Vec<usize>, usize, bool)> = Vec::new();
    let close = |members: Vec<usize>, k0: usize, k1: usize, limited: bool, clusters: &mut Vec<Cluster>| {
        let (best_k, _) = (k0..=k1)
            .map(|k| (k, diameter(&set.column(k), &members)))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("nonempty span");
        let col = set.column(best_k);
        let lambda = members.iter().map(|&j| col[j]).sum::<Complex64>() / members.len() as f64;
        clusters.push(Cluster {
            ambiguity: Ambiguity {
                lambda,
                alpha: set.grid[best_k],
                multiplicity: members.len(),
                singular: false,
            },
            members,
            grid_span: (k0, k1),
            resolution_limited: limited,
            probe: None,
        });
    };
    for k in 0..m {
        let mut still: Vec<(Vec<usize>, usize, bool)> = Vec::new();
        for (g, k0, lim) in open.drain(..) {
            if let Some((_, f)) = per[k].iter().find(|(h, _)| *h == g) {
                still.push((g, k0, lim || *f));
            } else {
                close(g, k0, k - 1, lim, &mut clusters);
            }
        }
        for (g, f) in &per[k] {
            if !still.iter().any(|(h, _, _)| h == g) {
                still.push((g.clone(), k, *f));
            }
        }
        open = still;
    }
    for (g, k0, lim) in open {
        close(g, k0, m - 1, lim, &mut clusters);
    }
    clusters.sort_by(|p, q| {
        p.ambiguity
            .alpha
            .total_cmp(&q.ambiguity.alpha)
            .then(p.members.cmp(&q.members))
    });
    AmbiguityReport {
        clusters,
        notes: Vec::new(),
    }
}

fn local_step(grid: &[f64], alpha: f64) -> f64 {
    let k = grid.partition_point(|&g| g < alpha).min(grid.len() - 1);
    let mut h = f64::INFINITY;
    if k > 0 {
        h = h.min(grid[k] - grid[k - 1]);
    }
    if k + 1 < grid.len() {
        h = h.min(grid[k + 1] - grid[k]);
    }
    h
}

fn min_resolution(cfg: &TrackConfig) -> f64 {
    1.0 / (cfg.grid_init as f64 * 2f64.powi(cfg.max_depth.min(1000) as i32))
}

fn classify_escalating<P: PathEval>(
    path: &P,
    cl: &Cluster,
    grid: &[f64],
    cfg: &TrackConfig,
) -> Result<(bool, ProbeData)> {
    let top = 1.0 / cfg.grid_init as f64;
    let mut r = match cfg.probe_radius {
        Some(r) => r,
        None => (10.0 * local_step(grid, cl.ambiguity.alpha)).min(top),
    }
    .max(min_resolution(cfg));
    let mut all = ProbeData {
        radius: r,
        samples: Vec::new(),
    };
    loop {
        let (singular, probe) = classify_ambiguity(path, &cl.ambiguity, r, cfg)?;
        all.radius = r;
        all.samples.extend(probe.samples);
        if singular || cfg.probe_radius.is_some() || r >= top {
            return Ok((singular, all));
        }
        r = (r * 4.0).min(top);
    }
}

/// Decides whether the multiplicity of `amb` drops at nearby parameters.
///
/// Probes `α ± r` and `α ± r/2`; at each probe the `m` eigenvalues nearest
/// `λ` are clustered at `collision_tol`, and the ambiguity is singular when
/// any probe splits them.
pub fn classify_ambiguity<P: PathEval>(
    path: &P,
    amb: &Ambiguity,
    probe_radius: f64,
    cfg: &TrackConfig,
) -> Result<(bool, ProbeData)> {
    if !(probe_radius >= min_resolution(cfg)) {
        return Err(Error::invalid(format!(
            "probe radius {probe_radius:e} is below the tracker resolution {:e}",
            min_resolution(cfg)
        )));
    }
    let m = amb.multiplicity.min(path.dim());
    let mut samples = Vec::new();
    let mut singular = false;
    for off in [-probe_radius, -0.5 * probe_radius, 0.5 * probe_radius, probe_radius] {
        let t = amb.alpha + off;
        if !(0.0..=1.0).contains(&t) {
            continue;
        }
        let vals = eigenvalues(&path.eval(t)?)?.into_vec();
        let mut idx: Vec<usize> = (0..vals.len()).collect();
        idx.sort_by(|&i, &j| (vals[i] - amb.lambda).norm().total_cmp(&(vals[j] - amb.lambda).norm()));
        let near: Vec<Complex64> = idx[..m].iter().map(|&i| vals[i]).collect();
        let labels = cluster_labels(&near, cfg.collision_tol);
        let biggest = (0..m).map(|r| labels.iter().filter(|&&l| l == r).count()).max().unwrap_or(0);
        if biggest < m {
            singular = true;
        }
        samples.push((t, biggest));
    }
    Ok((
        singular,
        ProbeData {
            radius: probe_radius,
            samples,
        },
    ))
}
