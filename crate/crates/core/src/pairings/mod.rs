//! Eigenpairings of tracked paths, splice enumeration, invariance
//! transforms and the convex reduction check.

mod reduction;
mod transforms;

pub use reduction::{convex_reduction_check, hypothesis_min, ReductionReport};
pub use transforms::{
    apply_similarity, block_combine, concatenate, convex_scale_shift_map, reverse, scale_shift, truncate,
};

use std::collections::HashSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::tracker::experiment::{apply_splice, permutations};
use crate::tracker::Tracked;
use crate::types::{argsort, AmbiguityReport, EigenPathSet, Eigenpairing, Spectrum};

/// Default tolerance for treating endpoint eigenvalues as equal.
pub const PAIRING_TOL: f64 = 1e-7;

/// Endpoint bijection `γⱼ(0) ↦ γⱼ(1)` of a path set.
pub fn pairing_from_paths(set: &EigenPathSet) -> Eigenpairing {
    pairing_with_state(set, &(0..set.n()).collect::<Vec<_>>(), PAIRING_TOL)
}

/// Pairing obtained when path `j` ends on base path `state[j]`.
fn pairing_with_state(set: &EigenPathSet, state: &[usize], tol: f64) -> Eigenpairing {
    let start = set.start();
    let end = set.end();
    let src = argsort(&start);
    let tgt = argsort(&end);
    let mut rank_t = vec![0; end.len()];
    for (r, &j) in tgt.iter().enumerate() {
        rank_t[j] = r;
    }
    let perm: Vec<usize> = src.iter().map(|&j| rank_t[state[j]]).collect();
    Eigenpairing::new(perm, Spectrum::new(start), Spectrum::new(end), tol).expect("state is a bijection")
}

/// One splice generator: a cluster and the member permutations applied there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpliceGenerator {
    pub alpha: f64,
    pub lambda: Complex64,
    pub members: Vec<usize>,
    pub permutations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingSet {
    pub pairings: Vec<Eigenpairing>,
    /// For each pairing, the member permutation chosen at every cluster.
    pub witnesses: Vec<Vec<Vec<usize>>>,
    pub generators: Vec<SpliceGenerator>,
    pub truncated: bool,
    pub notes: Vec<String>,
}

impl PairingSet {
    pub fn len(&self) -> usize {
        self.pairings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairings.is_empty()
    }

    pub fn contains(&self, p: &Eigenpairing, tol: f64) -> bool {
        self.find(p, tol).is_some()
    }

    pub fn find(&self, p: &Eigenpairing, tol: f64) -> Option<usize> {
        self.pairings.iter().position(|q| q.same_as(p, tol))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pairing sets serialize")
    }
}

/// Breadth-first enumeration of every endpoint bijection reachable by
/// permuting the branches inside each reported cluster.
pub fn enumerate_pairings(set: &EigenPathSet, report: &AmbiguityReport, cap: usize) -> PairingSet {
    enumerate_with_tol(set, report, cap, PAIRING_TOL)
}

pub fn enumerate_with_tol(set: &EigenPathSet, report: &AmbiguityReport, cap: usize, tol: f64) -> PairingSet {
    let n = set.n();
    let cap = cap.max(1);
    let mut notes = Vec::new();
    let mut truncated = false;
    let mut states: Vec<(Vec<usize>, Vec<Vec<usize>>)> = vec![((0..n).collect(), Vec::new())];
    let mut generators = Vec::new();
    for cl in &report.clusters {
        let m = cl.members.len();
        let perms = permutations(m);
        generators.push(SpliceGenerator {
            alpha: cl.ambiguity.alpha,
            lambda: cl.ambiguity.lambda,
            members: cl.members.clone(),
            permutations: perms.len(),
        });
        if m >= 3 {
            notes.push(format!(
                "cluster at alpha = {:.6} has multiplicity {m}; all {m}! branch permutations are assumed realizable",
                cl.ambiguity.alpha
            ));
        }
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut next = Vec::new();
        'outer: for (s, w) in &states {
            for sigma in &perms {
                let ns = apply_splice(s, &cl.members, sigma);
                if seen.insert(ns.clone()) {
                    if next.len() >= cap {
                        truncated = true;
                        break 'outer;
                    }
                    let mut nw = w.clone();
                    nw.push(sigma.clone());
                    next.push((ns, nw));
                }
            }
        }
        states = next;
    }
    let mut pairings: Vec<Eigenpairing> = Vec::new();
    let mut witnesses = Vec::new();
    for (s, w) in states {
        let p = pairing_with_state(set, &s, tol);
        if !pairings.iter().any(|q| *q == p) {
            if pairings.len() >= cap {
                truncated = true;
                break;
            }
            pairings.push(p);
            witnesses.push(w);
        }
    }
    if truncated {
        notes.push(format!("enumeration truncated at {cap} entries"));
    }
    if !report.is_empty() {
        notes.push("only splices at reported clusters are enumerated".into());
    }
    PairingSet {
        pairings,
        witnesses,
        generators,
        truncated,
        notes,
    }
}

/// [`enumerate_pairings`] for a [`Tracked`] result.
pub fn pairings_of(t: &Tracked, cap: usize) -> PairingSet {
    enumerate_pairings(&t.paths, &t.report, cap)
}
