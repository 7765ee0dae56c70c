//! Perturbation experiment: is some splice of the base eigenpaths within `eps`
//! of the eigenpaths of a nearby path?

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{match_values, step_bound, track, Tracked};
use crate::config::TrackConfig;
use crate::error::Result;
use crate::path::PathEval;
use crate::types::{Cluster, EigenPathSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub eps: f64,
    /// `step_bound(m, n, eps)` with `m` the largest Frobenius norm seen.
    pub delta: f64,
    /// Largest Frobenius distance between the two paths on the sampled grids.
    pub perturbation_norm: f64,
    pub within_delta: bool,
    pub witness_found: bool,
    /// Best sup-deviation over all splice choices.
    pub deviation: f64,
    /// Member permutation applied at each base cluster, in α order.
    pub splices: Vec<Vec<usize>>,
    pub base_clusters: usize,
    pub states_explored: usize,
}

/// All permutations of `0..m` in lexicographic order.
pub(crate) fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..m).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..m).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..m).rev().find(|&j| cur[j] > cur[i - 1]).expect("exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// Applies the splice `sigma` (a permutation of member positions) to a
/// state mapping each path to the base path it currently follows.
pub(crate) fn apply_splice(state: &[usize], members: &[usize], sigma: &[usize]) -> Vec<usize> {
    state
        .iter()
        .map(|&b| match members.iter().position(|&m| m == b) {
            Some(p) => members[sigma[p]],
            None => b,
        })
        .collect()
}

fn union_points(a: &EigenPathSet, b: &EigenPathSet, lo: f64, hi: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = a
        .grid
        .iter()
        .chain(&b.grid)
        .copied()
        .filter(|&x| x >= lo && x <= hi)
        .collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `D[j][b]`: sup over `[lo, hi]` of `|pert_j − base_b|`.
fn segment_costs(pert: &EigenPathSet, base: &EigenPathSet, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    let n = base.n();
    let mut d = vec![vec![0.0f64; n]; n];
    for t in union_points(pert, base, lo, hi) {
        let p = pert.at(t);
        let q = base.at(t);
        for j in 0..n {
            for b in 0..n {
                d[j][b] = d[j][b].max((p[j] - q[b]).norm());
            }
        }
    }
    d
}

/// Minimax search over splices at the base clusters.
pub(crate) fn best_splice(base: &Tracked, pert: &EigenPathSet) -> (f64, Vec<Vec<usize>>, usize) {
    let bp = &base.paths;
    let n = bp.n();
    let clusters: &[Cluster] = &base.report.clusters;
    let init_perm = match_values(&pert.start(), &bp.start()).expect("equal dimensions");
    let mut cuts: Vec<f64> = vec![0.0];
    cuts.extend(clusters.iter().map(|c| c.ambiguity.alpha));
    cuts.push(1.0);
    let costs: Vec<Vec<Vec<f64>>> = cuts
        .windows(2)
        .map(|w| segment_costs(pert, bp, w[0], w[1]))
        .collect();
    let state_cost = |d: &Vec<Vec<f64>>, s: &[usize]| (0..n).map(|j| d[j][s[j]]).fold(0.0, f64::max);

    type Layer = HashMap<Vec<usize>, (f64, Option<(Vec<usize>, usize)>)>;
    let mut layers: Vec<Layer> = Vec::new();
    let mut first: Layer = HashMap::new();
    first.insert(init_perm.clone(), (state_cost(&costs[0], &init_perm), None));
    layers.push(first);
    let mut explored = 1;
    for (ci, cl) in clusters.iter().enumerate() {
        let perms = permutations(cl.members.len());
        let mut next: Layer = HashMap::new();
        let prev = layers.last().expect("nonempty");
        let mut keys: Vec<&Vec<usize>> = prev.keys().collect();
        keys.sort();
        for s in keys {
            let (c0, _) = prev[s];
            for (pi, sigma) in perms.iter().enumerate() {
                let ns = apply_splice(s, &cl.members, sigma);
                let c = c0.max(state_cost(&costs[ci + 1], &ns));
                explored += 1;
                let better = next.get(&ns).map_or(true, |e| c < e.0);
                if better {
                    next.insert(ns, (c, Some((s.clone(), pi))));
                }
            }
        }
        layers.push(next);
    }
    let last = layers.last().expect("nonempty");
    let mut best: Option<(&Vec<usize>, f64)> = None;
    let mut keys: Vec<&Vec<usize>> = last.keys().collect();
    keys.sort();
    for s in keys {
        let c = last[s].0;
        if best.map_or(true, |b| c < b.1) {
            best = Some((s, c));
        }
    }
    let (mut state, cost) = best.map(|(s, c)| (s.clone(), c)).expect("at least one state");
    let mut splices = vec![Vec::new(); clusters.len()];
    for li in (1..layers.len()).rev() {
        let (_, back) = &layers[li][&state];
        let (prev_state, pi) = back.clone().expect("non-initial layer has a parent");
        splices[li - 1] = permutations(clusters[li - 1].members.len())[pi].clone();
        state = prev_state;
    }
    (cost, splices, explored)
}

/// Tracks `path` and `perturbation` and searches all splices of the base
/// eigenpaths for one within `eps` of the perturbed eigenpaths.
pub fn splice_witness_experiment<P: PathEval, Q: PathEval>(
    path: &P,
    perturbation: &Q,
    eps: f64,
    cfg: &TrackConfig,
) -> Result<ExperimentReport> {
    let mut cfg = cfg.clone();
    cfg.eps_resolution = cfg.eps_resolution.min(eps / 8.0);
    let base = track(path, &cfg)?;
    let pert = track(perturbation, &cfg)?;
    let mut m: f64 = 0.0;
    let mut pnorm: f64 = 0.0;
    for t in union_points(&base.paths, &pert.paths, 0.0, 1.0) {
        let a = path.eval(t)?;
        let b = perturbation.eval(t)?;
        m = m.max(a.norm_fro()).max(b.norm_fro());
        pnorm = pnorm.max((&a - &b).norm_fro());
    }
    let delta = step_bound(m.max(f64::MIN_POSITIVE), path.dim(), eps);
    let (deviation, splices, explored) = best_splice(&base, &pert.paths);
    Ok(ExperimentReport {
        eps,
        delta,
        perturbation_norm: pnorm,
        within_delta: pnorm < delta,
        witness_found: deviation < eps,
        deviation,
        splices,
        base_clusters: base.report.len(),
        states_explored: explored,
    })
}
