//! Spectra, eigenpath sets, ambiguity reports and eigenpairings.

use std::cmp::Ordering;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lexicographic `(re, im)` order used for every multiset.
pub fn cmp_complex(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Indices that sort `values` lexicographically; ties keep input order.
pub fn argsort(values: &[Complex64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| cmp_complex(&values[i], &values[j]));
    idx
}

/// Size-n multiset of eigenvalues, stored sorted with explicit repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Spectrum {
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(mut values: Vec<Complex64>) -> Self {
        values.sort_by(cmp_complex);
        Spectrum { values }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> Complex64 {
        self.values.iter().sum()
    }

    /// Smallest distance between two entries (`∞` for a single value).
    pub fn min_gap(&self) -> f64 {
        min_gap(&self.values)
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.values
    }
}

pub(crate) fn min_gap(v: &[Complex64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            g = g.min((v[i] - v[j]).norm());
        }
    }
    g
}

/// `n` piecewise-linear trajectories over a shared α grid.
///
/// `paths[j][k]` is path `j` at `grid[k]`. Paths are indexed by the sorted
/// spectrum at the first grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPathSet {
    pub grid: Vec<f64>,
    pub paths: Vec<Vec<Complex64>>,
}

impl EigenPathSet {
    pub fn n(&self) -> usize {
        self.paths.len()
    }

    pub fn column(&self, k: usize) -> Vec<Complex64> {
        self.paths.iter().map(|p| p[k]).collect()
    }

    /// Linear interpolation of every path at `alpha`.
    pub fn at(&self, alpha: f64) -> Vec<Complex64> {
        let g = &self.grid;
        let k = g.partition_point(|&x| x <= alpha);
        if k == 0 {
            return self.column(0);
        }
        if k >= g.len() {
            return self.column(g.len() - 1);
        }
        if g[k - 1] == alpha {
            return self.column(k - 1);
        }
        let t = (alpha - g[k - 1]) / (g[k] - g[k - 1]);
        self.paths
            .iter()
            .map(|p| p[k - 1] * (1.0 - t) + p[k] * t)
            .collect()
    }

    pub fn start(&self) -> Vec<Complex64> {
        self.column(0)
    }

    pub fn end(&self) -> Vec<Complex64> {
        self.column(self.grid.len() - 1)
    }

    /// Largest single-step motion of any path.
    pub fn max_step(&self) -> f64 {
        self.paths
            .iter()
            .flat_map(|p| p.windows(2).map(|w| (w[1] - w[0]).norm()))
            .fold(0.0, f64::max)
    }

    /// Smallest pairwise gap over all grid columns.
    pub fn min_gap(&self) -> f64 {
        (0..self.grid.len())
            .map(|k| min_gap(&self.column(k)))
            .fold(f64::INFINITY, f64::min)
    }

    /// CSV with header `alpha,path,re,im`, one row per (grid point, path).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("alpha,path,re,im\n");
        for (k, a) in self.grid.iter().enumerate() {
            for (j, p) in self.paths.iter().enumerate() {
                let _ = writeln!(s, "{a:e},{j},{:e},{:e}", p[k].re, p[k].im);
            }
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("path sets serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: EigenPathSet = serde_json::from_str(s)?;
        if p.paths.is_empty() || p.paths.iter().any(|q| q.len() != p.grid.len()) {
            return Err(Error::invalid("every path must have one value per grid point"));
        }
        Ok(p)
    }
}

/// A repeated eigenvalue `lambda` of `C(alpha)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ambiguity {
    pub lambda: Complex64,
    pub alpha: f64,
    pub multiplicity: usize,
    pub singular: bool,
}

/// Evidence gathered when classifying an ambiguity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeData {
    pub radius: f64,
    /// `(alpha, numerical multiplicity near lambda)` for every probe.
    pub samples: Vec<(f64, usize)>,
}

/// One collision cluster found by the tracker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub ambiguity: Ambiguity,
    /// Indices of the tracked paths inside the cluster.
    pub members: Vec<usize>,
    /// Grid index range `[k0, k1]` over which the members stay clustered.
    pub grid_span: (usize, usize),
    /// Set when bisection stopped at the depth cap or float resolution
    /// before the gap fell below `collision_tol`.
    pub resolution_limited: bool,
    pub probe: Option<ProbeData>,
}

/// All collision clusters of a tracked path, ordered by α.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityReport {
    pub clusters: Vec<Cluster>,
    pub notes: Vec<String>,
}

impl AmbiguityReport {
    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn ambiguities(&self) -> Vec<Ambiguity> {
        self.clusters.iter().map(|c| c.ambiguity.clone()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Endpoint bijection `source[i] ↦ target[perm[i]]`.
///
/// `source` and `target` are the sorted spectra of `C(0)` and `C(1)`. When a
/// spectrum has repeated values the permutation is canonicalized so that
/// equal pairings of values compare equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenpairing {
    pub perm: Vec<usize>,
    pub source: Spectrum,
    pub target: Spectrum,
}

impl Eigenpairing {
    pub fn new(perm: Vec<usize>, source: Spectrum, target: Spectrum, tol: f64) -> Result<Self> {
        let n = perm.len();
        if source.len() != n || target.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: source.len().max(target.len()),
            });
        }
        if !is_permutation(&perm) {
            return Err(Error::invalid("pairing is not a bijection"));
        }
        let mut p = Eigenpairing {
            perm,
            source,
            target,
        };
        p.canonicalize(tol);
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    /// Only the counts of (source class, target class) pairs matter, so the
    /// permutation is rewritten to the smallest representative.
    fn canonicalize(&mut self, tol: f64) {
        let sc = classes(self.source.values(), tol);
        let tc = classes(self.target.values(), tol);
        let n = self.perm.len();
        let mut tclass: Vec<usize> = self.perm.iter().map(|&p| tc[p]).collect();
        let mut seen = vec![false; n];
        for i in 0..n {
            if seen[sc[i]] {
                continue;
            }
            seen[sc[i]] = true;
            let group: Vec<usize> = (i..n).filter(|&k| sc[k] == sc[i]).collect();
            let mut labels: Vec<usize> = group.iter().map(|&k| tclass[k]).collect();
            labels.sort_unstable();
            for (&k, l) in group.iter().zip(labels) {
                tclass[k] = l;
            }
        }
        let mut next: Vec<std::collections::VecDeque<usize>> = vec![Default::default(); n];
        for t in 0..n {
            next[tc[t]].push_back(t);
        }
        for i in 0..n {
            self.perm[i] = next[tclass[i]].pop_front().expect("class sizes agree");
        }
    }

    pub fn identity_like(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
    }

    pub fn inverse(&self, tol: f64) -> Eigenpairing {
        let mut inv = vec![0; self.n()];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p] = i;
        }
        Eigenpairing::new(inv, self.target.clone(), self.source.clone(), tol)
            .expect("inverse of a bijection")
    }

    /// `next ∘ self`, defined when `self.target` equals `next.source`.
    pub fn then(&self, next: &Eigenpairing, tol: f64) -> Result<Eigenpairing> {
        if !multiset_close(self.target.values(), next.source.values(), tol) {
            return Err(Error::invalid("pairings do not compose: endpoint spectra differ"));
        }
        let perm = self.perm.iter().map(|&p| next.perm[p]).collect();
        Eigenpairing::new(perm, self.source.clone(), next.target.clone(), tol)
    }

    /// Value pairs `(source, target)` in source order.
    pub fn value_pairs(&self) -> Vec<(Complex64, Complex64)> {
        self.perm
            .iter()
            .enumerate()
            .map(|(i, &p)| (self.source.values()[i], self.target.values()[p]))
            .collect()
    }

    /// True when both pairings send every value to the same value, up to `tol`.
    pub fn same_as(&self, other: &Eigenpairing, tol: f64) -> bool {
        self.maps_like(other, |z| z, tol)
    }

    /// True when `other` is the image of `self` under the value relabeling `f`.
    pub fn maps_like(&self, other: &Eigenpairing, f: impl Fn(Complex64) -> Complex64, tol: f64) -> bool {
        if self.n() != other.n() {
            return false;
        }
        let mut mine: Vec<(Complex64, Complex64)> =
            self.value_pairs().into_iter().map(|(a, b)| (f(a), f(b))).collect();
        let mut theirs = other.value_pairs();
        let key = |x: &(Complex64, Complex64), y: &(Complex64, Complex64)| {
            cmp_complex(&x.0, &y.0).then(cmp_complex(&x.1, &y.1))
        };
        mine.sort_by(key);
        theirs.sort_by(key);
        // greedy matching of pairs handles near-ties in the sort
        let mut used = vec![false; theirs.len()];
        'outer: for a in &mine {
            for (k, b) in theirs.iter().enumerate() {
                if !used[k] && (a.0 - b.0).norm() <= tol && (a.1 - b.1).norm() <= tol {
                    used[k] = true;
                    continue 'outer;
                }
            }
            return false;
        }
        true
    }
}

pub(crate) fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    for &x in p {
        if x >= p.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

/// Labels sorted values by runs of near-equal entries.
pub(crate) fn classes(sorted: &[Complex64], tol: f64) -> Vec<usize> {
    let n = sorted.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (sorted[i] - sorted[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    (0..n).map(|i| find(&mut parent, i)).collect()
}

pub(crate) fn multiset_close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    a.len() == b.len() && crate::tracker::matched_max_distance(a, b) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn spectrum_sorts_lexicographically() {
        let s = Spectrum::new(vec![c(1.0, 0.0), c(0.0, -1.0), c(0.0, 1.0)]);
        assert_eq!(s.values(), &[c(0.0, -1.0), c(0.0, 1.0), c(1.0, 0.0)]);
    }

    #[test]
    fn canonical_pairing_for_repeated_values() {
        let src = Spectrum::new(vec![c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        let tgt = Spectrum::new(vec![c(0.0, 0.0), c(5.0, 0.0), c(5.0, 0.0)]);
        let a = Eigenpairing::new(vec![2, 0, 1], src.clone(), tgt.clone(), 1e-12).unwrap();
        let b = Eigenpairing::new(vec![0, 2, 1], src.clone(), tgt.clone(), 1e-12).unwrap();
        assert_eq!(a, b);
        assert!(a.same_as(&b, 1e-12));
        let d = Eigenpairing::new(vec![1, 2, 0], src, tgt, 1e-12).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn inverse_and_compose() {
        let s = Spectrum::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        let p = Eigenpairing::new(vec![1, 2, 0], s.clone(), s.clone(), 1e-12).unwrap();
        let id = p.then(&p.inverse(1e-12), 1e-12).unwrap();
        assert!(id.identity_like());
    }

    #[test]
    fn rejects_non_bijection() {
        let s = Spectrum::new(vec![c(1.0, 0.0), c(2.0, 0.0)]);
        assert!(Eigenpairing::new(vec![0, 0], s.clone(), s, 0.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let p = EigenPathSet {
            grid: vec![0.0, 1.0],
            paths: vec![vec![c(1.0, 0.0), c(2.0, 0.5)]],
        };
        let csv = p.to_csv();
        assert!(csv.starts_with("alpha,path,re,im\n"));
        assert_eq!(csv.lines().count(), 3);
    }
}
