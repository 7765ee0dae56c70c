//! Matrix paths `α ↦ C(α)` on `[0, 1]` and the real scalar functions used by
//! combination paths.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::polypaths::{companion, PolyPath};

/// Anything that can be evaluated as a square matrix for `α ∈ [0, 1]`.
pub trait PathEval {
    fn dim(&self) -> usize;
    fn eval(&self, alpha: f64) -> Result<CMatrix>;
}

impl<P: PathEval + ?Sized> PathEval for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, alpha: f64) -> Result<CMatrix> {
        (**self).eval(alpha)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

/// Named real functions on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    /// `α`
    Linear,
    /// `1 − α`
    LinearDown,
    /// `(1 − cos πα) / 2`, rising from 0 to 1.
    CosRamp,
    /// `(1 + cos πα) / 2`, falling from 1 to 0.
    CosRampDown,
}

/// Real coefficient function used by [`MatrixPath::Combination`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RealFn {
    Named(Builtin),
    /// Monomial coefficients, low to high.
    Poly { poly: Vec<f64> },
    /// Sampled `(α, value)` pairs with linear interpolation.
    Table { table: Vec<(f64, f64)> },
}

impl RealFn {
    pub fn poly(coeffs: &[f64]) -> Self {
        RealFn::Poly {
            poly: coeffs.to_vec(),
        }
    }

    pub fn eval(&self, alpha: f64) -> f64 {
        match self {
            RealFn::Named(Builtin::Linear) => alpha,
            RealFn::Named(Builtin::LinearDown) => 1.0 - alpha,
            RealFn::Named(Builtin::CosRamp) => 0.5 * (1.0 - (PI * alpha).cos()),
            RealFn::Named(Builtin::CosRampDown) => 0.5 * (1.0 + (PI * alpha).cos()),
            RealFn::Poly { poly } => poly.iter().rev().fold(0.0, |acc, &c| acc * alpha + c),
            RealFn::Table { table } => interp_table(table, alpha),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            RealFn::Named(_) => Ok(()),
            RealFn::Poly { poly } => {
                if poly.is_empty() || !poly.iter().all(|c| c.is_finite()) {
                    return Err(Error::invalid("polynomial function needs finite coefficients"));
                }
                Ok(())
            }
            RealFn::Table { table } => {
                if table.len() < 2 {
                    return Err(Error::invalid("function table needs at least two rows"));
                }
                if table[0].0 != 0.0 || table[table.len() - 1].0 != 1.0 {
                    return Err(Error::invalid("function table must span [0, 1]"));
                }
                if table.windows(2).any(|w| !(w[0].0 < w[1].0)) || !table.iter().all(|r| r.1.is_finite()) {
                    return Err(Error::invalid("function table must be strictly increasing in α"));
                }
                Ok(())
            }
        }
    }
}

fn interp_table(table: &[(f64, f64)], alpha: f64) -> f64 {
    let k = table.partition_point(|r| r.0 <= alpha);
    if k == 0 {
        return table[0].1;
    }
    if k >= table.len() {
        return table[table.len() - 1].1;
    }
    let (a0, v0) = table[k - 1];
    let (a1, v1) = table[k];
    let t = (alpha - a0) / (a1 - a0);
    v0 * (1.0 - t) + v1 * t
}

/// Coefficient basis of a polynomial matrix path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// `Σ P_k α^k`
    #[default]
    Monomial,
    /// `Σ P_k C(d,k) α^k (1−α)^(d−k)`
    Bernstein,
}

/// A continuous matrix path on `[0, 1]`.
///
/// The first four variants are the structured forms; the remaining ones are
/// produced by the invariance transforms and keep those transforms exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatrixPath {
    /// `(1 − α) A + α B`
    Convex { a: CMatrix, b: CMatrix },
    /// `f(α) A + g(α) B`
    Combination {
        a: CMatrix,
        b: CMatrix,
        f: RealFn,
        g: RealFn,
    },
    /// Polynomial entries.
    Poly {
        coeffs: Vec<CMatrix>,
        #[serde(default)]
        basis: Basis,
    },
    /// Entrywise linear interpolation through `(grid[k], matrices[k])`.
    Sampled {
        grid: Vec<f64>,
        matrices: Vec<CMatrix>,
    },
    /// `S C(α) S⁻¹`
    Similarity {
        base: Box<MatrixPath>,
        s: CMatrix,
        s_inv: CMatrix,
    },
    /// `a C(α) + b I`
    Affine {
        base: Box<MatrixPath>,
        a: Complex64,
        b: Complex64,
    },
    /// `C(start + (end − start) α)`
    Reparam {
        base: Box<MatrixPath>,
        start: f64,
        end: f64,
    },
    /// `first` on `[0, 1/2]`, `second` on `[1/2, 1]`, each at double speed.
    Concat {
        first: Box<MatrixPath>,
        second: Box<MatrixPath>,
    },
    /// Block-diagonal direct sum.
    Block { blocks: Vec<MatrixPath> },
    /// Exchanges the diagonal entries `d[i]` and `d[j]`: rotation
    /// conjugation on `[0, 1/2]`, then two antipodal elliptic arcs of
    /// relative height `kappa` back to `diag(d)`.
    DiagonalSwap {
        d: Vec<Complex64>,
        i: usize,
        j: usize,
        kappa: f64,
    },
    /// Companion matrices of a polynomial path.
    Companion { path: Box<PolyPath> },
}

impl MatrixPath {
    pub fn convex(a: CMatrix, b: CMatrix) -> Self {
        MatrixPath::Convex { a, b }
    }

    pub fn constant(a: CMatrix) -> Self {
        MatrixPath::Convex { a: a.clone(), b: a }
    }

    /// Parses and validates a path from JSON.
    pub fn from_json(s: &str) -> Result<Self> {
        let p: MatrixPath = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix paths always serialize")
    }

    /// Checks the structural invariants of every variant.
    pub fn validate(&self) -> Result<()> {
        let same = |x: &CMatrix, y: &CMatrix| {
            if x.dim() == y.dim() {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    expected: x.dim(),
                    found: y.dim(),
                })
            }
        };
        match self {
            MatrixPath::Convex { a, b } => same(a, b),
            MatrixPath::Combination { a, b, f, g } => {
                same(a, b)?;
                f.validate()?;
                g.validate()
            }
            MatrixPath::Poly { coeffs, .. } => {
                let first = coeffs
                    .first()
                    .ok_or_else(|| Error::invalid("polynomial path needs coefficients"))?;
                coeffs.iter().try_for_each(|c| same(first, c))
            }
            MatrixPath::Sampled { grid, matrices } => {
                if grid.len() < 2 || grid.len() != matrices.len() {
                    return Err(Error::invalid("sampled path needs matching grid and matrices (≥ 2)"));
                }
                if grid[0] != 0.0 || grid[grid.len() - 1] != 1.0 {
                    return Err(Error::invalid("sampled grid must start at 0 and end at 1"));
                }
                if grid.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::invalid("sampled grid must be strictly increasing"));
                }
                matrices.iter().try_for_each(|m| same(&matrices[0], m))
            }
            MatrixPath::Similarity { base, s, s_inv } => {
                base.validate()?;
                same(s, s_inv)?;
                if s.dim() != base.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: base.dim(),
                        found: s.dim(),
                    });
                }
                Ok(())
            }
            MatrixPath::Affine { base, a, b } => {
                if !(crate::matrix::is_finite(*a) && crate::matrix::is_finite(*b)) {
                    return Err(Error::NonFinite("affine coefficients"));
                }
                base.validate()
            }
            MatrixPath::Reparam { base, start, end } => {
                check_alpha(*start)?;
                check_alpha(*end)?;
                if start == end {
                    return Err(Error::invalid("reparameterization interval is empty"));
                }
                base.validate()
            }
            MatrixPath::Concat { first, second } => {
                first.validate()?;
                second.validate()?;
                if first.dim() != second.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: first.dim(),
                        found: second.dim(),
                    });
                }
                Ok(())
            }
            MatrixPath::Block { blocks } => {
                if blocks.is_empty() {
                    return Err(Error::invalid("block path needs at least one block"));
                }
                blocks.iter().try_for_each(|b| b.validate())
            }
            MatrixPath::DiagonalSwap { d, i, j, kappa } => {
                if *i >= d.len() || *j >= d.len() || i == j {
                    return Err(Error::invalid("swap indices must be distinct and in range"));
                }
                if d[*i] == d[*j] {
                    return Err(Error::invalid("swapped entries must differ"));
                }
                if !(kappa.is_finite() && *kappa > 0.0) {
                    return Err(Error::invalid("arc height must be positive"));
                }
                if !d.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite("swap diagonal"));
                }
                Ok(())
            }
            MatrixPath::Companion { path } => path.validate(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            MatrixPath::Convex { a, .. } | MatrixPath::Combination { a, .. } => a.dim(),
            MatrixPath::Poly { coeffs, .. } => coeffs[0].dim(),
            MatrixPath::Sampled { matrices, .. } => matrices[0].dim(),
            MatrixPath::Similarity { s, .. } => s.dim(),
            MatrixPath::Affine { base, .. } | MatrixPath::Reparam { base, .. } => base.dim(),
            MatrixPath::Concat { first, .. } => first.dim(),
            MatrixPath::Block { blocks } => blocks.iter().map(|b| b.dim()).sum(),
            MatrixPath::DiagonalSwap { d, .. } => d.len(),
            MatrixPath::Companion { path } => path.degree(),
        }
    }

    /// Evaluates the path at `alpha ∈ [0, 1]`.
    pub fn evaluate(&self, alpha: f64) -> Result<CMatrix> {
        check_alpha(alpha)?;
        Ok(self.eval_unchecked(alpha))
    }

    fn eval_unchecked(&self, alpha: f64) -> CMatrix {
        match self {
            MatrixPath::Convex { a, b } => CMatrix::lincomb(1.0 - alpha, a, alpha, b),
            MatrixPath::Combination { a, b, f, g } => {
                CMatrix::lincomb(f.eval(alpha), a, g.eval(alpha), b)
            }
            MatrixPath::Poly { coeffs, basis } => match basis {
                Basis::Monomial => {
                    let mut acc = coeffs[coeffs.len() - 1].clone();
                    for c in coeffs.iter().rev().skip(1) {
                        acc = CMatrix::lincomb(alpha, &acc, 1.0, c);
                    }
                    acc
                }
                Basis::Bernstein => de_casteljau(coeffs, alpha),
            },
            MatrixPath::Sampled { grid, matrices } => {
                let k = grid.partition_point(|&g| g <= alpha);
                if k == 0 {
                    return matrices[0].clone();
                }
                if k >= grid.len() {
                    return matrices[grid.len() - 1].clone();
                }
                if grid[k - 1] == alpha {
                    return matrices[k - 1].clone();
                }
                let t = (alpha - grid[k - 1]) / (grid[k] - grid[k - 1]);
                CMatrix::lincomb(1.0 - t, &matrices[k - 1], t, &matrices[k])
            }
            MatrixPath::Similarity { base, s, s_inv } => {
                let c = base.eval_unchecked(alpha);
                &(s * &c) * s_inv
            }
            MatrixPath::Affine { base, a, b } => base.eval_unchecked(alpha).scale(*a).add_scalar(*b),
            MatrixPath::Reparam { base, start, end } => {
                let beta = if alpha == 0.0 {
                    *start
                } else if alpha == 1.0 {
                    *end
                } else {
                    (start + (end - start) * alpha).clamp(0.0, 1.0)
                };
                base.eval_unchecked(beta)
            }
            MatrixPath::Concat { first, second } => {
                if alpha <= 0.5 {
                    first.eval_unchecked((2.0 * alpha).min(1.0))
                } else {
                    second.eval_unchecked((2.0 * alpha - 1.0).clamp(0.0, 1.0))
                }
            }
            MatrixPath::Block { blocks } => {
                let parts: Vec<CMatrix> = blocks.iter().map(|b| b.eval_unchecked(alpha)).collect();
                CMatrix::block_diag(&parts)
            }
            MatrixPath::DiagonalSwap { d, i, j, kappa } => diagonal_swap(d, *i, *j, *kappa, alpha),
            MatrixPath::Companion { path } => companion(&path.eval(alpha).expect("validated polynomial path")),
        }
    }

    /// Start and end matrices.
    pub fn endpoints(&self) -> (CMatrix, CMatrix) {
        (self.eval_unchecked(0.0), self.eval_unchecked(1.0))
    }

    /// True when the path is a polynomial in α (so it needs no fitting).
    pub fn is_polynomial(&self) -> bool {
        match self {
            MatrixPath::Convex { .. } | MatrixPath::Poly { .. } => true,
            MatrixPath::Combination { f, g, .. } => {
                matches!(f, RealFn::Poly { .. } | RealFn::Named(Builtin::Linear | Builtin::LinearDown))
                    && matches!(g, RealFn::Poly { .. } | RealFn::Named(Builtin::Linear | Builtin::LinearDown))
            }
            MatrixPath::Similarity { base, .. }
            | MatrixPath::Affine { base, .. }
            | MatrixPath::Reparam { base, .. } => base.is_polynomial(),
            MatrixPath::Block { blocks } => blocks.iter().all(|b| b.is_polynomial()),
            MatrixPath::Sampled { .. }
            | MatrixPath::Concat { .. }
            | MatrixPath::DiagonalSwap { .. }
            | MatrixPath::Companion { .. } => false,
        }
    }
}

fn diagonal_swap(d: &[Complex64], i: usize, j: usize, kappa: f64, alpha: f64) -> CMatrix {
    let mut m = CMatrix::diag(d);
    let c = (d[i] + d[j]) * 0.5;
    let h = (d[i] - d[j]) * 0.5;
    if alpha <= 0.5 {
        let (s2, c2) = (2.0 * PI * alpha).sin_cos();
        m[(i, i)] = c + h * c2;
        m[(j, j)] = c - h * c2;
        m[(i, j)] = h * s2;
        m[(j, i)] = h * s2;
    } else {
        let (s, co) = (PI * (2.0 * alpha - 1.0)).sin_cos();
        let w = h * Complex64::new(co, kappa * s);
        m[(i, i)] = c - w;
        m[(j, j)] = c + w;
    }
    m
}

/// Bernstein evaluation by direct summation of the basis in log space;
/// `O(d)` per entry instead of de Casteljau's `O(d²)`.
fn bernstein_sum(coeffs: &[CMatrix], alpha: f64) -> CMatrix {
    let d = coeffs.len() - 1;
    if alpha <= 0.0 {
        return coeffs[0].clone();
    }
    if alpha >= 1.0 {
        return coeffs[d].clone();
    }
    let (lt, lu) = (alpha.ln(), (1.0 - alpha).ln());
    let n = coeffs[0].dim();
    let mut acc = vec![Complex64::new(0.0, 0.0); n * n];
    let mut lc = 0.0f64;
    for (k, c) in coeffs.iter().enumerate() {
        if k > 0 {
            lc += ((d - k + 1) as f64).ln() - (k as f64).ln();
        }
        let w = (lc + k as f64 * lt + (d - k) as f64 * lu).exp();
        if w > 0.0 {
            for (a, x) in acc.iter_mut().zip(c.as_slice()) {
                *a += x * w;
            }
        }
    }
    CMatrix::from_fn(n, |r, s| acc[r * n + s])
}

pub(crate) fn de_casteljau(coeffs: &[CMatrix], alpha: f64) -> CMatrix {
    if coeffs.len() > 32 {
        return bernstein_sum(coeffs, alpha);
    }
    let mut work: Vec<CMatrix> = coeffs.to_vec();
    let d = work.len();
    for r in 1..d {
        for k in 0..d - r {
            work[k] = CMatrix::lincomb(1.0 - alpha, &work[k], alpha, &work[k + 1]);
        }
    }
    work.swap_remove(0)
}

impl PathEval for MatrixPath {
    fn dim(&self) -> usize {
        MatrixPath::dim(self)
    }
    fn eval(&self, alpha: f64) -> Result<CMatrix> {
        self.evaluate(alpha)
    }
}

/// Evaluates `path` at `alpha`.
pub fn evaluate(path: &MatrixPath, alpha: f64) -> Result<CMatrix> {
    path.evaluate(alpha)
}

/// `max_k ‖p1(α_k) − p2(α_k)‖_max` over the supplied grid.
pub fn sup_distance<P: PathEval, Q: PathEval>(p1: &P, p2: &Q, grid: &[f64]) -> Result<f64> {
    if p1.dim() != p2.dim() {
        return Err(Error::DimensionMismatch {
            expected: p1.dim(),
            found: p2.dim(),
        });
    }
    let mut best = 0.0f64;
    for &a in grid {
        best = best.max(p1.eval(a)?.dist_max(&p2.eval(a)?));
    }
    Ok(best)
}

/// `m + 1` equally spaced points on `[0, 1]`, with exact endpoints.
pub fn uniform_grid(m: usize) -> Vec<f64> {
    let m = m.max(1);
    (0..=m).map(|k| k as f64 / m as f64).collect()
}
