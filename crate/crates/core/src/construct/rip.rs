use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bump::{random_matrix, Bump, Bumped, Shape, Window};
use crate::config::TrackConfig;
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::pairings::{pairing_from_paths, pairings_of, PAIRING_TOL};
use crate::path::{sup_distance, uniform_grid, MatrixPath, PathEval};
use crate::spectra::eigenvalues;
use crate::tracker::experiment::apply_splice;
use crate::tracker::{bottleneck_assign, match_values, track, Tracked};
use crate::types::{min_gap, Eigenpairing};

const VERIFY_POINTS: usize = 10_000;
const BASE_NODES: usize = 1024;
const WINDOW_NODES: usize = 512;
const MERGE_GAP: f64 = 1e-6;
const END_TOL: f64 = 1e-6;
const MAX_HALF_WIDTH: f64 = 0.05;
const ROUNDS: usize = 8;
const TRIES: usize = 30;
const OUTER: usize = 3;

#[derive(Debug, Clone, Default)]
pub struct RipOptions {
    /// Member permutation per reported cluster (report order); `None` keeps
    /// the tracked eigenpaths as the reference.
    pub splices: Option<Vec<Vec<usize>>>,
    /// Endpoints that must be reproduced exactly.
    pub preserve: (bool, bool),
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipWindow {
    pub start: f64,
    pub end: f64,
    /// Cluster abscissas handled by this window.
    pub alphas: Vec<f64>,
    pub shape: Shape,
    /// Frobenius norm of the accepted bump.
    pub bump_norm: f64,
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipResult {
    pub new_path: MatrixPath,
    /// Largest entrywise distance to the input path on the verification grid.
    pub sup_dev: f64,
    /// Largest distance between the new eigenpaths and the reference set.
    pub path_dev: f64,
    pub endpoint_preserved: (bool, bool),
    /// Smallest eigenvalue gap of the new path on the verification grid.
    pub min_gap: f64,
    pub windows: Vec<RipWindow>,
    /// The unique eigenpairing of the new path.
    pub pairing: Eigenpairing,
}

impl RipResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rip results serialize")
    }

    /// Sampled path as CSV with header `alpha,row,col,re,im`. Non-sampled
    /// paths (unchanged inputs) are sampled on a uniform grid first.
    pub fn sampled_csv(&self) -> String {
        let (grid, mats): (Vec<f64>, Vec<CMatrix>) = match &self.new_path {
            MatrixPath::Sampled { grid, matrices } => (grid.clone(), matrices.clone()),
            p => {
                let g = uniform_grid(BASE_NODES);
                let m = g.iter().map(|&a| p.evaluate(a).expect("alpha in range")).collect();
                (g, m)
            }
        };
        let mut out = String::from("alpha,row,col,re,im\n");
        for (a, m) in grid.iter().zip(&mats) {
            for r in 0..m.dim() {
                for c in 0..m.dim() {
                    let z = m[(r, c)];
                    out.push_str(&format!("{a},{r},{c},{},{}\n", z.re, z.im));
                }
            }
        }
        out
    }
}

/// Ambiguity-free ε-perturbation whose eigenpaths follow the tracked ones.
pub fn rip(path: &MatrixPath, eps: f64, cfg: &TrackConfig) -> Result<RipResult> {
    rip_with(path, eps, cfg, &RipOptions::default())
}

/// [`rip`] that reproduces every endpoint with distinct eigenvalues exactly.
pub fn rip_preserving_endpoints(path: &MatrixPath, eps: f64, cfg: &TrackConfig) -> Result<RipResult> {
    path.validate()?;
    let (c0, c1) = path.endpoints();
    let distinct = |m: &CMatrix| -> Result<bool> { Ok(eigenvalues(m)?.min_gap() > cfg.collision_tol) };
    let preserve = (distinct(&c0)?, distinct(&c1)?);
    if !preserve.0 && !preserve.1 {
        return Err(Error::Defective("neither endpoint has distinct eigenvalues".into()));
    }
    rip_with(
        path,
        eps,
        cfg,
        &RipOptions {
            preserve,
            ..RipOptions::default()
        },
    )
}

/// [`rip`] towards a designated eigenpairing of `path`.
pub fn rip_to_pairing(
    path: &MatrixPath,
    target: &Eigenpairing,
    eps: f64,
    cfg: &TrackConfig,
    seed: u64,
) -> Result<RipResult> {
    let base = track(path, cfg)?;
    let set = pairings_of(&base, cfg.pairing_cap);
    let k = set
        .find(target, PAIRING_TOL)
        .ok_or_else(|| Error::invalid("target is not an eigenpairing reachable by splicing"))?;
    rip_with(
        path,
        eps,
        cfg,
        &RipOptions {
            splices: Some(set.witnesses[k].clone()),
            preserve: (false, false),
            seed,
        },
    )
}

pub fn rip_with(path: &MatrixPath, eps: f64, cfg: &TrackConfig, opts: &RipOptions) -> Result<RipResult> {
    let base = track(path, cfg)?;
    let splices = match &opts.splices {
        Some(s) => s.clone(),
        None => base
            .report
            .clusters
            .iter()
            .map(|c| (0..c.members.len()).collect())
            .collect(),
    };
    Builder::new(path, base, eps, cfg, Some(splices), opts.preserve)?.run(opts.seed)
}

/// Collision-free perturbation without a pairing requirement.
pub(crate) fn perturb_any(path: &MatrixPath, eps: f64, cfg: &TrackConfig, seed: u64) -> Result<RipResult> {
    let base = track(path, cfg)?;
    Builder::new(path, base, eps, cfg, None, (false, false))?.run(seed)
}

struct Group {
    clusters: Vec<usize>,
    lo: f64,
    hi: f64,
    shape: Shape,
}

struct Builder<'a> {
    path: &'a MatrixPath,
    base: Tracked,
    eps: f64,
    cfg: &'a TrackConfig,
    /// Cluster indices in α order.
    order: Vec<usize>,
    splices: Option<Vec<Vec<usize>>>,
    /// Reference state before the k-th cluster in α order, and after the last.
    states: Vec<Vec<usize>>,
    groups: Vec<Group>,
}

impl<'a> Builder<'a> {
    fn new(
        path: &'a MatrixPath,
        base: Tracked,
        eps: f64,
        cfg: &'a TrackConfig,
        splices: Option<Vec<Vec<usize>>>,
        preserve: (bool, bool),
    ) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::invalid("eps must be positive"));
        }
        let clusters = &base.report.clusters;
        if let Some(s) = &splices {
            if s.len() != clusters.len() {
                return Err(Error::invalid(format!(
                    "{} splices given for {} clusters",
                    s.len(),
                    clusters.len()
                )));
            }
            for (sigma, c) in s.iter().zip(clusters) {
                let mut sorted = sigma.clone();
                sorted.sort_unstable();
                if sorted != (0..c.members.len()).collect::<Vec<_>>() {
                    return Err(Error::invalid("splice is not a permutation of the cluster members"));
                }
            }
        }
        let mut order: Vec<usize> = (0..clusters.len()).collect();
        order.sort_by(|&x, &y| clusters[x].ambiguity.alpha.total_cmp(&clusters[y].ambiguity.alpha));
        let n = base.paths.n();
        let mut states = vec![(0..n).collect::<Vec<usize>>()];
        for &k in &order {
            let last = states.last().expect("nonempty");
            let next = match &splices {
                Some(s) => apply_splice(last, &clusters[k].members, &s[k]),
                None => last.clone(),
            };
            states.push(next);
        }
        let mut groups: Vec<Group> = Vec::new();
        for &k in &order {
            let a = clusters[k].ambiguity.alpha;
            match groups.last_mut() {
                Some(g) if a - g.hi < MERGE_GAP => {
                    g.clusters.push(k);
                    g.hi = a;
                }
                _ => groups.push(Group {
                    clusters: vec![k],
                    lo: a,
                    hi: a,
                    shape: Shape::Interior,
                }),
            }
        }
        for g in &mut groups {
            let at_start = g.lo < END_TOL;
            let at_end = g.hi > 1.0 - END_TOL;
            g.shape = match (at_start, at_end) {
                (true, true) => {
                    return Err(Error::Construction {
                        alpha: g.lo,
                        reason: "collision cluster spans the whole path".into(),
                    })
                }
                (true, false) => Shape::Start,
                (false, true) => Shape::End,
                _ => Shape::Interior,
            };
            if at_start && preserve.0 {
                return Err(Error::Defective("start matrix has repeated eigenvalues".into()));
            }
            if at_end && preserve.1 {
                return Err(Error::Defective("end matrix has repeated eigenvalues".into()));
            }
        }
        Ok(Builder {
            path,
            base,
            eps,
            cfg,
            order,
            splices,
            states,
            groups,
        })
    }

    fn run(&self, seed: u64) -> Result<RipResult> {
        if self.base.report.is_empty() {
            return Ok(RipResult {
                new_path: self.path.clone(),
                sup_dev: 0.0,
                path_dev: 0.0,
                endpoint_preserved: (true, true),
                min_gap: self.base.paths.min_gap(),
                windows: Vec::new(),
                pairing: pairing_from_paths(&self.base.paths),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spans: Vec<(f64, f64)> = (0..self.groups.len())
            .map(|g| self.window_span(g))
            .collect::<Result<_>>()?;
        let mut failure = String::new();
        for outer in 0..OUTER {
            let mut bumps = Vec::new();
            let mut windows = Vec::new();
            for (g, &(a, b)) in spans.iter().enumerate() {
                let (bump, attempts) = self.search(g, a, b, &mut rng)?;
                windows.push(RipWindow {
                    start: a,
                    end: b,
                    alphas: self.groups[g]
                        .clusters
                        .iter()
                        .map(|&k| self.base.report.clusters[k].ambiguity.alpha)
                        .collect(),
                    shape: bump.shape,
                    bump_norm: bump.e.norm_fro(),
                    attempts,
                });
                bumps.push(bump);
            }
            let new_path = self.assemble(&bumps, 1 << outer)?;
            match self.verify(new_path, windows)? {
                Ok(r) => return Ok(r),
                Err(why) => failure = why,
            }
        }
        let alpha = self.groups.first().map_or(0.0, |g| g.lo);
        Err(Error::Construction {
            alpha,
            reason: format!("assembled path failed verification: {failure}"),
        })
    }

    fn cluster_alpha(&self, k: usize) -> f64 {
        self.base.report.clusters[k].ambiguity.alpha
    }

    /// Window around group `g`, narrowed until every cluster's members stay
    /// within `eps/4` of each other throughout.
    fn window_span(&self, gi: usize) -> Result<(f64, f64)> {
        let g = &self.groups[gi];
        let prev = if gi > 0 { self.groups[gi - 1].hi } else { 0.0 };
        let next = self.groups.get(gi + 1).map_or(1.0, |h| h.lo);
        let mut w = MAX_HALF_WIDTH;
        if g.shape != Shape::Start {
            w = w.min(0.45 * (g.lo - prev));
        }
        if g.shape != Shape::End {
            w = w.min(0.45 * (next - g.hi));
        }
        let span = |w: f64| match g.shape {
            Shape::Interior => (g.lo - w, g.hi + w),
            Shape::Start => (0.0, g.hi + w),
            Shape::End => (g.lo - w, 1.0),
        };
        let paths = &self.base.paths;
        let mut halvings = 0;
        loop {
            let (a, b) = span(w);
            let mut pts: Vec<f64> = (0..=64).map(|k| a + (b - a) * k as f64 / 64.0).collect();
            pts.extend(paths.grid.iter().copied().filter(|&x| x >= a && x <= b));
            let spread = pts
                .iter()
                .map(|&x| {
                    let v = paths.at(x);
                    g.clusters
                        .iter()
                        .map(|&k| diameter(&self.base.report.clusters[k].members, &v))
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if spread <= 0.25 * self.eps {
                break;
            }
            w *= 0.5;
            halvings += 1;
            if halvings > 60 {
                return Err(Error::Construction {
                    alpha: g.lo,
                    reason: "cluster members separate too fast for the requested eps".into(),
                });
            }
        }
        let (a, b) = span(w);
        let need = 100.0 * self.cfg.collision_tol;
        for (edge, check) in [(a, g.shape != Shape::Start), (b, g.shape != Shape::End)] {
            if check && eigenvalues(&self.path.evaluate(edge)?)?.min_gap() < need {
                return Err(Error::Construction {
                    alpha: edge,
                    reason: "window edge has nearly repeated eigenvalues".into(),
                });
            }
        }
        Ok((a, b))
    }

    fn search(&self, gi: usize, a: f64, b: f64, rng: &mut ChaCha8Rng) -> Result<(Bump, usize)> {
        let n = self.path.dim();
        let shape = self.groups[gi].shape;
        let mut attempts = 0;
        let mut last = String::new();
        let mut r = 0.25 * self.eps;
        for _ in 0..ROUNDS {
            for _ in 0..TRIES {
                attempts += 1;
                let bump = Bump {
                    start: a,
                    end: b,
                    shape,
                    e: random_matrix(n, r, rng),
                };
                match self.check_window(gi, &bump) {
                    Ok(()) => return Ok((bump, attempts)),
                    Err(why) => last = why,
                }
            }
            r *= 0.25;
        }
        Err(Error::Construction {
            alpha: 0.5 * (a + b),
            reason: format!("no admissible bump in {attempts} draws (last: {last})"),
        })
    }

    /// Base index reached from base index `i` after the group's clusters
    /// with abscissa below `alpha`.
    fn follow(&self, gi: usize, mut i: usize, alpha: f64) -> usize {
        let Some(s) = &self.splices else { return i };
        for &k in &self.groups[gi].clusters {
            if self.cluster_alpha(k) < alpha {
                let members = &self.base.report.clusters[k].members;
                if let Some(p) = members.iter().position(|&m| m == i) {
                    i = members[s[k][p]];
                }
            }
        }
        i
    }

    fn check_window(&self, gi: usize, bump: &Bump) -> std::result::Result<(), String> {
        let bumps = [bump.clone()];
        let bp = Bumped {
            base: self.path,
            bumps: &bumps,
        };
        let wp = Window {
            inner: &bp,
            a: bump.start,
            b: bump.end,
        };
        let t = track(&wp, self.cfg).map_err(|e| e.to_string())?;
        if !t.report.is_empty() {
            return Err("collision inside window".into());
        }
        if t.paths.min_gap() <= 10.0 * self.cfg.collision_tol {
            return Err("eigenvalues too close inside window".into());
        }
        if self.splices.is_none() {
            return Ok(());
        }
        let alphas: Vec<f64> = t.paths.grid.iter().map(|&x| wp.alpha(x)).collect();
        let dev = if bump.shape == Shape::Interior {
            let paths = &self.base.paths;
            let at = |x: f64| paths.at(x);
            let from = match_values(&t.paths.start(), &at(bump.start)).map_err(|e| e.to_string())?;
            let to = match_values(&t.paths.end(), &at(bump.end)).map_err(|e| e.to_string())?;
            for q in 0..from.len() {
                if to[q] != self.follow(gi, from[q], bump.end) {
                    return Err("bump realizes a different splice".into());
                }
            }
            let mut dev = 0.0f64;
            for (k, &x) in alphas.iter().enumerate() {
                let v = at(x);
                for (q, &i) in from.iter().enumerate() {
                    dev = dev.max((t.paths.paths[q][k] - v[self.follow(gi, i, x)]).norm());
                }
            }
            dev
        } else {
            let n = t.paths.n();
            let mut d = vec![vec![0.0f64; n]; n];
            for (k, &x) in alphas.iter().enumerate() {
                let v = self.base.paths.at(x);
                for (q, row) in d.iter_mut().enumerate() {
                    for (i, e) in row.iter_mut().enumerate() {
                        *e = e.max((t.paths.paths[q][k] - v[i]).norm());
                    }
                }
            }
            bottleneck_assign(&d).0
        };
        if dev >= 0.75 * self.eps {
            return Err(format!("window eigenpath deviation {dev:.3e}"));
        }
        Ok(())
    }

    fn assemble(&self, bumps: &[Bump], density: usize) -> Result<MatrixPath> {
        let mut nodes = uniform_grid(BASE_NODES * density);
        let per = WINDOW_NODES * density;
        for b in bumps {
            nodes.extend((0..=per).map(|k| b.start + (b.end - b.start) * k as f64 / per as f64));
        }
        nodes.retain(|x| (0.0..=1.0).contains(x));
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        let bp = Bumped { base: self.path, bumps };
        let matrices = nodes.iter().map(|&x| bp.eval(x)).collect::<Result<Vec<_>>>()?;
        Ok(MatrixPath::Sampled { grid: nodes, matrices })
    }

    fn reference(&self, alpha: f64) -> Vec<usize> {
        let passed = self
            .order
            .iter()
            .take_while(|&&k| self.cluster_alpha(k) < alpha)
            .count();
        self.states[passed].clone()
    }

    #[allow(clippy::type_complexity)]
    fn verify(&self, new_path: MatrixPath, windows: Vec<RipWindow>) -> Result<std::result::Result<RipResult, String>> {
        let nt = track(&new_path, self.cfg)?;
        if !nt.report.is_empty() {
            return Ok(Err(format!("{} clusters remain", nt.report.len())));
        }
        let uniform = uniform_grid(VERIFY_POINTS);
        let mut check = uniform.clone();
        if let MatrixPath::Sampled { grid, .. } = &new_path {
            check.extend(grid.iter().copied());
        }
        check.extend(nt.paths.grid.iter().copied());
        check.sort_by(f64::total_cmp);
        check.dedup();
        let sup_dev = sup_distance(self.path, &new_path, &check)?;
        let mut gap = f64::INFINITY;
        for &x in &uniform {
            gap = gap.min(min_gap(eigenvalues(&new_path.evaluate(x)?)?.values()));
        }
        let n = nt.paths.n();
        let mut d = vec![vec![0.0f64; n]; n];
        for &x in &check {
            let base = self.base.paths.at(x);
            let state = self.reference(x);
            let new = nt.paths.at(x);
            for (j, row) in d.iter_mut().enumerate() {
                let r = base[state[j]];
                for (q, e) in row.iter_mut().enumerate() {
                    *e = e.max((r - new[q]).norm());
                }
            }
        }
        let path_dev = bottleneck_assign(&d).0;
        if gap <= self.cfg.collision_tol {
            return Ok(Err(format!("gap {gap:.3e} at or below collision_tol")));
        }
        if sup_dev >= self.eps {
            return Ok(Err(format!("sup deviation {sup_dev:.3e}")));
        }
        if self.splices.is_some() && path_dev >= self.eps {
            return Ok(Err(format!("eigenpath deviation {path_dev:.3e}")));
        }
        let (c0, c1) = self.path.endpoints();
        let (n0, n1) = new_path.endpoints();
        Ok(Ok(RipResult {
            endpoint_preserved: (c0.dist_max(&n0) == 0.0, c1.dist_max(&n1) == 0.0),
            pairing: pairing_from_paths(&nt.paths),
            new_path,
            sup_dev,
            path_dev,
            min_gap: gap,
            windows,
        }))
    }
}

fn diameter(members: &[usize], v: &[num_complex::Complex64]) -> f64 {
    let mut d = 0.0f64;
    for (x, &i) in members.iter().enumerate() {
        for &j in &members[x + 1..] {
            d = d.max((v[i] - v[j]).norm());
        }
    }
    d
}
