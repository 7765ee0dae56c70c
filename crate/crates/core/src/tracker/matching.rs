//! Optimal assignment between two spectra.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::types::Spectrum;

const DP_LIMIT: usize = 16;

/// Permutation `π` minimizing `Σ |s1[i] − s2[π(i)]|`, lexicographically
/// smallest among optimal assignments (up to rounding).
pub fn match_spectra(s1: &Spectrum, s2: &Spectrum) -> Result<Vec<usize>> {
    match_values(s1.values(), s2.values())
}

/// [`match_spectra`] on plain slices.
pub fn match_values(a: &[Complex64], b: &[Complex64]) -> Result<Vec<usize>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let cost: Vec<Vec<f64>> = a
        .iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).collect())
        .collect();
    Ok(assign(&cost))
}

/// Minimum-cost assignment for a square cost matrix.
pub fn assign(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    if n <= DP_LIMIT {
        assign_dp(cost)
    } else {
        hungarian(cost)
    }
}

/// Exact subset DP; ties resolved towards the smallest column per row.
fn assign_dp(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let full = (1usize << n) - 1;
    // rest[mask]: cheapest completion once the columns in `mask` are used by
    // rows 0..popcount(mask)
    let mut rest = vec![f64::INFINITY; 1 << n];
    rest[full] = 0.0;
    for mask in (0..full).rev() {
        let row = mask.count_ones() as usize;
        let mut best = f64::INFINITY;
        for (col, &c) in cost[row].iter().enumerate() {
            if mask & (1 << col) == 0 {
                best = best.min(c + rest[mask | (1 << col)]);
            }
        }
        rest[mask] = best;
    }
    let scale = rest[0].abs().max(f64::MIN_POSITIVE);
    let slack = 1e-12 * scale;
    let mut perm = Vec::with_capacity(n);
    let mut mask = 0usize;
    for row in 0..n {
        let col = (0..n)
            .find(|&col| {
                mask & (1 << col) == 0 && cost[row][col] + rest[mask | (1 << col)] <= rest[mask] + slack
            })
            .expect("an optimal column exists");
        perm.push(col);
        mask |= 1 << col;
    }
    perm
}

/// Shortest augmenting path Hungarian method with potentials.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0; n];
    for j in 1..=n {
        perm[p[j] - 1] = j - 1;
    }
    perm
}

/// `Σ |a[i] − b[π(i)]|` for the optimal `π`.
pub fn matched_cost(a: &[Complex64], b: &[Complex64]) -> f64 {
    match match_values(a, b) {
        Ok(p) => p.iter().enumerate().map(|(i, &j)| (a[i] - b[j]).norm()).sum(),
        Err(_) => f64::INFINITY,
    }
}

/// Bottleneck distance: the smallest `t` such that some bijection moves every
/// value by at most `t`. Infinite on a size mismatch.
pub fn matched_max_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let d: Vec<Vec<f64>> = a
        .iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).collect())
        .collect();
    bottleneck_assign(&d).0
}

/// Bijection minimizing the largest selected entry of a square cost matrix,
/// with that entry.
pub fn bottleneck_assign(d: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let n = d.len();
    if n == 0 {
        return (0.0, Vec::new());
    }
    let mut cand: Vec<f64> = d.iter().flatten().copied().collect();
    cand.sort_by(f64::total_cmp);
    cand.dedup();
    let (mut lo, mut hi) = (0usize, cand.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_under(d, cand[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let owner = perfect_under(d, cand[lo]).unwrap_or_else(|| (0..n).collect());
    (cand[lo], owner)
}

/// Row-to-column perfect matching using only entries `≤ t`.
fn perfect_under(d: &[Vec<f64>], t: f64) -> Option<Vec<usize>> {
    let n = d.len();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    fn augment(i: usize, d: &[Vec<f64>], t: f64, seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for j in 0..d.len() {
            if d[i][j] <= t && !seen[j] {
                seen[j] = true;
                if owner[j].map_or(true, |k| augment(k, d, t, seen, owner)) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    let ok = (0..n).all(|i| {
        let mut seen = vec![false; n];
        augment(i, d, t, &mut seen, &mut owner)
    });
    if !ok {
        return None;
    }
    let mut row_to_col = vec![0; n];
    for (j, o) in owner.iter().enumerate() {
        row_to_col[o.expect("perfect")] = j;
    }
    Some(row_to_col)
}
