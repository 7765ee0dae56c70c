use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::path::{de_casteljau, uniform_grid, Basis, MatrixPath, PathEval};
use crate::spectra::eigenvalues;

const CHECK_POINTS: usize = 1000;
const MAX_DEGREE: usize = 1 << 14;

/// Monomial coefficients of the Lagrange basis polynomial for node `i`.
fn lagrange(nodes: &[f64], i: usize) -> Vec<f64> {
    let mut c = vec![1.0];
    for (j, &x) in nodes.iter().enumerate() {
        if j == i {
            continue;
        }
        let s = 1.0 / (nodes[i] - x);
        let mut next = vec![0.0; c.len() + 1];
        for (m, &a) in c.iter().enumerate() {
            next[m + 1] += a * s;
            next[m] -= a * x * s;
        }
        c = next;
    }
    c
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}

/// Degree-`d` Bernstein coefficients of a monomial-basis polynomial.
fn to_bernstein(c: &[f64], d: usize) -> Vec<f64> {
    (0..=d)
        .map(|q| {
            let mut acc = 0.0;
            let mut ratio = 1.0;
            for (m, &a) in c.iter().enumerate() {
                if m > 0 {
                    if q < m {
                        break;
                    }
                    ratio *= (q - m + 1) as f64 / (d - m + 1) as f64;
                }
                acc += a * ratio;
            }
            acc
        })
        .collect()
}

fn add_scaled(coeffs: &mut [CMatrix], weights: &[f64], m: &CMatrix) {
    for (c, &w) in coeffs.iter_mut().zip(weights) {
        if w != 0.0 {
            *c = CMatrix::lincomb(1.0, c, w, m);
        }
    }
}

fn max_dev(coeffs: &[CMatrix], grid: &[f64], target: &[CMatrix]) -> (f64, f64) {
    grid.iter()
        .zip(target)
        .map(|(&t, m)| (de_casteljau(coeffs, t).dist_max(m), t))
        .fold((0.0, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc })
}

fn repeated(m: &CMatrix) -> Result<bool> {
    Ok(eigenvalues(m)?.min_gap() <= 1e-8 * (1.0 + m.norm_max()))
}

/// Bernstein polynomial path within `eps` of `path` (entrywise max norm on a
/// dense grid) that agrees with it exactly at `fixed_alphas`.
///
/// The degree doubles until the plain Bernstein approximant is within
/// `eps/2`; residuals at the fixed points are then removed with Lagrange
/// polynomials. If the fit has a repeated eigenvalue at a free abscissa it is
/// nudged there by a polynomial vanishing at every fixed point.
pub fn bernstein_fit<P: PathEval>(path: &P, fixed_alphas: &[f64], eps: f64) -> Result<MatrixPath> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid("eps must be positive"));
    }
    let mut fixed = fixed_alphas.to_vec();
    if fixed.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(Error::invalid("fixed abscissas must lie in [0, 1]"));
    }
    fixed.sort_by(f64::total_cmp);
    if fixed.windows(2).any(|w| w[1] - w[0] <= 1e-12) {
        return Err(Error::invalid("fixed abscissas must be distinct"));
    }
    let n = path.dim();
    let mut grid = uniform_grid(CHECK_POINTS);
    grid.extend(&fixed);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let target: Vec<CMatrix> = grid.iter().map(|&t| path.eval(t)).collect::<Result<_>>()?;
    let fixed_vals: Vec<CMatrix> = fixed.iter().map(|&t| path.eval(t)).collect::<Result<_>>()?;
    let lag: Vec<Vec<f64>> = (0..fixed.len()).map(|i| lagrange(&fixed, i)).collect();

    let mut d = fixed.len().max(1).next_power_of_two();
    let mut fit = loop {
        let coeffs: Vec<CMatrix> = (0..=d)
            .map(|k| path.eval(k as f64 / d as f64))
            .collect::<Result<_>>()?;
        let (bdev, worst) = max_dev(&coeffs, &grid, &target);
        let mut corrected = coeffs.clone();
        for (i, &a) in fixed.iter().enumerate() {
            let r = &fixed_vals[i] - &de_casteljau(&coeffs, a);
            add_scaled(&mut corrected, &to_bernstein(&lag[i], d), &r);
        }
        let (tdev, _) = max_dev(&corrected, &grid, &target);
        if bdev < 0.5 * eps && tdev < 0.75 * eps {
            break corrected;
        }
        if d >= MAX_DEGREE {
            // Bernstein error decays like 1/d for smooth paths
            let needed = (d as f64 * (bdev / (0.25 * eps)).max(2.0)).ceil();
            return Err(Error::Construction {
                alpha: worst,
                reason: format!("degree {d} leaves deviation {tdev:.3e}; roughly degree {needed} required"),
            });
        }
        d *= 2;
    };

    // nudge towards distinct eigenvalues at a free abscissa
    let mut pts = vec![0.0];
    pts.extend(&fixed);
    pts.push(1.0);
    let (lo, hi) = pts
        .windows(2)
        .map(|w| (w[0], w[1]))
        .fold((0.0, 0.0), |acc, w| if w.1 - w.0 > acc.1 - acc.0 { w } else { acc });
    let a0 = 0.5 * (lo + hi);
    if repeated(&de_casteljau(&fit, a0))? {
        let mut l0 = vec![1.0];
        for &x in &fixed {
            let s = 1.0 / (a0 - x);
            let mut next = vec![0.0; l0.len() + 1];
            for (m, &a) in l0.iter().enumerate() {
                next[m + 1] += a * s;
                next[m] -= a * x * s;
            }
            l0 = next;
        }
        let peak = grid.iter().map(|&t| horner(&l0, t).abs()).fold(0.0, f64::max).max(1.0);
        let weights = to_bernstein(&l0, d);
        let ramp = CMatrix::diag(&(0..n).map(|k| Complex64::new(k as f64, 0.0)).collect::<Vec<_>>());
        let generic = CMatrix::from_fn(n, |r, c| Complex64::new((1.0 + (r * n + c) as f64).sin(), 0.0));
        for dir in [ramp, generic] {
            let scale = dir.norm_max();
            if scale == 0.0 {
                continue;
            }
            let mut trial = fit.clone();
            add_scaled(&mut trial, &weights, &dir.scale_real(eps / (8.0 * peak * scale)));
            if !repeated(&de_casteljau(&trial, a0))? && max_dev(&trial, &grid, &target).0 < eps {
                fit = trial;
                break;
            }
        }
    }
    Ok(MatrixPath::Poly {
        coeffs: fit,
        basis: Basis::Bernstein,
    })
}
