//! Dense eigenvalues, monic polynomial roots and the 2×2 discriminant.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, ONE, ZERO};
use crate::types::Spectrum;

const EPS: f64 = f64::EPSILON;

/// Monic polynomial `tⁿ + a_{n−1} tⁿ⁻¹ + … + a₀`; `coeffs` holds `a₀..a_{n−1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonicPoly {
    pub coeffs: Vec<Complex64>,
}

impl MonicPoly {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("monic polynomial needs degree at least 1"));
        }
        if !coeffs.iter().all(|z| crate::matrix::is_finite(*z)) {
            return Err(Error::NonFinite("polynomial coefficients"));
        }
        Ok(MonicPoly { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// `Π (t − r)`.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![ONE];
        for &r in roots {
            let mut next = vec![ZERO; c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= r * ck;
            }
            c = next;
        }
        c.pop();
        MonicPoly { coeffs: c }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ONE, |acc, &c| acc * t + c)
    }

    /// `(p(t), p′(t))` by Horner.
    pub fn eval_with_derivative(&self, t: Complex64) -> (Complex64, Complex64) {
        let mut p = ONE;
        let mut dp = ZERO;
        for &c in self.coeffs.iter().rev() {
            dp = dp * t + p;
            p = p * t + c;
        }
        (p, dp)
    }

    /// `max |a_k|`, the coefficient norm.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn dist(&self, other: &MonicPoly) -> f64 {
        if self.degree() != other.degree() {
            return f64::INFINITY;
        }
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `Σ |a_k| |t|^k` including the leading 1; scale for backward errors.
    fn abs_eval(&self, r: f64) -> f64 {
        self.coeffs.iter().rev().fold(1.0, |acc, c| acc * r + c.norm())
    }
}

/// Reduces `m` to upper Hessenberg form by Householder similarity.
pub fn hessenberg(m: &CMatrix) -> CMatrix {
    let n = m.dim();
    let mut h = m.clone();
    if h.is_upper_hessenberg() {
        return h;
    }
    for k in 0..n.saturating_sub(2) {
        let xnorm = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vnorm;
        }
        // H ← (I − 2vvᴴ) H
        for j in k..n {
            let s: Complex64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * h[(k + 1 + i, j)]).sum();
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, j)] -= vi * s * 2.0;
            }
        }
        // H ← H (I − 2vvᴴ)
        for i in 0..n {
            let s: Complex64 = v.iter().enumerate().map(|(j, vj)| h[(i, k + 1 + j)] * vj).sum();
            for (j, vj) in v.iter().enumerate() {
                h[(i, k + 1 + j)] -= s * vj.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

/// Diagonal scaling by powers of two that evens out row and column norms.
fn balance(m: &mut CMatrix) {
    let n = m.dim();
    let l1 = |z: Complex64| z.re.abs() + z.im.abs();
    for _ in 0..64 {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += l1(m[(j, i)]);
                    r += l1(m[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / 2.0;
            while c < g {
                f *= 2.0;
                c *= 4.0;
            }
            g = r * 2.0;
            while c > g {
                f /= 2.0;
                c /= 4.0;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let mean = (a + d) * 0.5;
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    (mean + disc, mean - disc)
}

/// Givens rotation `[[c̄, s̄], [−s, c]]` mapping `(a, b)` to `(r, 0)`.
fn givens(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if r == 0.0 {
        (ONE, ZERO)
    } else {
        (a / r, b / r)
    }
}

const ITER_PER_EIGENVALUE: usize = 60;

/// All eigenvalues of `m` as a sorted multiset.
///
/// Hessenberg reduction followed by single-shift complex QR with Wilkinson
/// shifts; the 1×1 and 2×2 cases are closed form.
pub fn eigenvalues(m: &CMatrix) -> Result<Spectrum> {
    if !m.is_finite() {
        return Err(Error::NonFinite("eigenvalue input"));
    }
    let n = m.dim();
    if n == 1 {
        return Ok(Spectrum::new(vec![m[(0, 0)]]));
    }
    if n == 2 {
        let (x, y) = eig2(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        return Ok(Spectrum::new(vec![x, y]));
    }
    let mut bal = m.clone();
    balance(&mut bal);
    let mut h = hessenberg(&bal);
    let hnorm = h.norm_fro();
    let mut eig = vec![ZERO; n];
    let mut hi = n - 1;
    let mut its = 0usize;
    let mut total = 0usize;
    let cap = ITER_PER_EIGENVALUE * n;
    loop {
        // locate the active block [lo, hi]
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut tst = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if tst == 0.0 {
                tst = hnorm;
            }
            if sub <= EPS * tst || sub <= f64::MIN_POSITIVE {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            its = 0;
            if hi == 0 {
                break;
            }
            hi -= 1;
            continue;
        }
        if lo + 1 == hi {
            let (x, y) = eig2(h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
            eig[lo] = x;
            eig[hi] = y;
            its = 0;
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            continue;
        }
        total += 1;
        its += 1;
        if total > cap {
            return Err(Error::NonConvergence {
                what: format!("QR iteration on a {n}×{n} matrix"),
                cap,
            });
        }
        let shift = if its % 11 == 0 {
            let prev = if hi >= lo + 2 { h[(hi - 1, hi - 2)].norm() } else { 0.0 };
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.5 * prev)
        } else {
            let (x, y) = eig2(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
            if (x - h[(hi, hi)]).norm() <= (y - h[(hi, hi)]).norm() {
                x
            } else {
                y
            }
        };
        for k in lo..=hi {
            h[(k, k)] -= shift;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = c.conj() * x + s.conj() * y;
                h[(k + 1, j)] = -s * x + c * y;
            }
            h[(k + 1, k)] = ZERO;
            rots.push((c, s));
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let k = lo + idx;
            for i in lo..=(k + 1).min(hi) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s;
                h[(i, k + 1)] = -x * s.conj() + y * c.conj();
            }
        }
        for k in lo..=hi {
            h[(k, k)] += shift;
        }
    }
    Ok(Spectrum::new(eig))
}

/// Coefficients of `det(tI − m)`, via Hessenberg reduction and the
/// determinant recurrence (no reduction if `m` is already Hessenberg).
pub fn char_poly(m: &CMatrix, cap: usize) -> Result<MonicPoly> {
    let n = m.dim();
    if n > cap {
        return Err(Error::CapExceeded { size: n, cap });
    }
    let h = hessenberg(m);
    // p[k] holds det(tI − H[..k, ..k]) low-to-high, including leading 1
    let mut p: Vec<Vec<Complex64>> = vec![vec![ONE]];
    for k in 0..n {
        let prev = &p[k];
        let mut next = vec![ZERO; k + 2];
        for (i, &c) in prev.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= h[(k, k)] * c;
        }
        let mut prod = ONE;
        for i in (0..k).rev() {
            prod *= h[(i + 1, i)];
            let coef = h[(i, k)] * prod;
            if coef != ZERO {
                for (j, &c) in p[i].iter().enumerate() {
                    next[j] -= coef * c;
                }
            }
        }
        p.push(next);
    }
    let mut c = p.pop().expect("n ≥ 1");
    c.pop();
    Ok(MonicPoly { coeffs: c })
}

const ABERTH_CAP: usize = 500;

/// All roots of `p` by Aberth–Ehrlich iteration from a jittered circle.
pub fn poly_roots(p: &MonicPoly, tol: f64) -> Result<Spectrum> {
    let n = p.degree();
    if n == 1 {
        return Ok(Spectrum::new(vec![-p.coeffs[0]]));
    }
    let center = -p.coeffs[n - 1] / n as f64;
    let radius = p
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, a)| a.norm().powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    let guess: Vec<Complex64> = (0..n)
        .map(|k| {
            let jitter = 0.05 * ((k as f64) * 1.7).sin();
            let th = 2.0 * PI * k as f64 / n as f64 + 0.4 + jitter;
            center + Complex64::from_polar(radius * (1.0 + 0.1 * jitter), th)
        })
        .collect();
    poly_roots_with_guess(p, &guess, tol)
}

/// Aberth–Ehrlich iteration from caller-supplied starting points.
pub fn poly_roots_with_guess(p: &MonicPoly, guess: &[Complex64], tol: f64) -> Result<Spectrum> {
    let n = p.degree();
    if guess.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: guess.len(),
        });
    }
    if n == 1 {
        return Ok(Spectrum::new(vec![-p.coeffs[0]]));
    }
    let mut z = guess.to_vec();
    // coincident starts break the repulsion term
    for i in 0..n {
        for j in 0..i {
            if z[i] == z[j] {
                let bump = Complex64::new(1e-9, 1e-9) * (1.0 + z[i].norm()) * (i as f64);
                z[i] += bump;
            }
        }
    }
    let mut done = vec![false; n];
    let mut hit_cap = true;
    for _ in 0..ABERTH_CAP {
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (pv, dp) = p.eval_with_derivative(z[i]);
            if pv == ZERO {
                done[i] = true;
                continue;
            }
            let ratio = pv / dp;
            let sum: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| ONE / (z[i] - z[j]))
                .sum();
            let w = ratio / (ONE - ratio * sum);
            if !crate::matrix::is_finite(w) {
                done[i] = true;
                continue;
            }
            z[i] -= w;
            if w.norm() <= 4.0 * EPS * (1.0 + z[i].norm())
                || pv.norm() <= EPS * p.abs_eval(z[i].norm())
            {
                done[i] = true;
            }
        }
        if done.iter().all(|&d| d) {
            hit_cap = false;
            break;
        }
    }
    if hit_cap {
        let scale = 1.0 + p.norm();
        let ok = z.iter().all(|&r| {
            let res = p.eval(r).norm();
            res <= tol * scale || res <= tol * p.abs_eval(r.norm())
        });
        if !ok {
            return Err(Error::NonConvergence {
                what: format!("Aberth iteration for a degree-{n} polynomial"),
                cap: ABERTH_CAP,
            });
        }
    }
    Ok(Spectrum::new(z))
}

/// Discriminant `γ(α)` of the convex path between `A = diag(λ₁, λ₂)` and the
/// matrix `B` with eigenvalues `μ₁, μ₂` and eigenvectors `(v₁, 1), (v₂, 1)`.
pub fn discriminant_path_2x2(
    lambda1: Complex64,
    lambda2: Complex64,
    mu1: Complex64,
    mu2: Complex64,
    v1: Complex64,
    v2: Complex64,
    alpha: f64,
) -> Result<Complex64> {
    if v1 == v2 {
        return Err(Error::Defective("B has a repeated eigenvector (v₁ = v₂)".into()));
    }
    let lam = lambda1 - lambda2;
    let mu = mu1 - mu2;
    if lam == ZERO || mu == ZERO {
        return Err(Error::invalid("eigenvalue differences must be nonzero"));
    }
    let k = (v1 + v2) / (v1 - v2);
    let b = 1.0 - alpha;
    Ok(lam * lam * (b * b) + mu * mu * (alpha * alpha) + k * lam * mu * (2.0 * b * alpha))
}

/// Eigenvector of `m` for the approximate eigenvalue `lambda`, by inverse
/// iteration; normalized to unit 2-norm.
pub fn eigenvector(m: &CMatrix, lambda: Complex64) -> Result<Vec<Complex64>> {
    let n = m.dim();
    let scale = 1.0 + m.norm_max();
    let mut shift = lambda + Complex64::new(scale * 1e-13, scale * 7e-14);
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.05 * (i as f64).sin()))
        .collect();
    for attempt in 0..3 {
        let a = m.add_scalar(-shift);
        if let Ok(mut x) = a.solve(&v) {
            for _ in 0..3 {
                let nrm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if !(nrm.is_finite() && nrm > 0.0) {
                    break;
                }
                v = x.iter().map(|z| z / nrm).collect();
                x = match a.solve(&v) {
                    Ok(x) => x,
                    Err(_) => break,
                };
            }
            let nrm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if nrm.is_finite() && nrm > 0.0 {
                return Ok(x.iter().map(|z| z / nrm).collect());
            }
        }
        shift += Complex64::new(scale * 1e-10, 0.0) * (attempt + 1) as f64;
    }
    Err(Error::Singular(f64::INFINITY))
}

/// Matrix of unit eigenvectors (as columns) for the given eigenvalues.
pub fn eigenvectors(m: &CMatrix, values: &[Complex64]) -> Result<CMatrix> {
    let n = m.dim();
    let mut x = CMatrix::zeros(n);
    for (j, &l) in values.iter().enumerate() {
        let v = eigenvector(m, l)?;
        for i in 0..n {
            x[(i, j)] = v[i];
        }
    }
    Ok(x)
}
