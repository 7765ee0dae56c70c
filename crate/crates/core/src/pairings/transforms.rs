use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::path::{check_alpha, Basis, MatrixPath};

fn conj_by(m: &CMatrix, s: &CMatrix, s_inv: &CMatrix) -> CMatrix {
    &(s * m) * s_inv
}

/// `α ↦ S C(α) S⁻¹`.
pub fn apply_similarity(path: &MatrixPath, s: &CMatrix, cond_cap: f64) -> Result<MatrixPath> {
    if s.dim() != path.dim() {
        return Err(Error::DimensionMismatch {
            expected: path.dim(),
            found: s.dim(),
        });
    }
    let (s_inv, cond) = s.inverse_with_cond()?;
    if !(cond <= cond_cap) {
        return Err(Error::Singular(cond));
    }
    if *s == CMatrix::identity(s.dim()) {
        return Ok(path.clone());
    }
    let f = |m: &CMatrix| conj_by(m, s, &s_inv);
    Ok(match path {
        MatrixPath::Convex { a, b } => MatrixPath::Convex { a: f(a), b: f(b) },
        MatrixPath::Combination { a, b, f: ff, g } => MatrixPath::Combination {
            a: f(a),
            b: f(b),
            f: ff.clone(),
            g: g.clone(),
        },
        MatrixPath::Poly { coeffs, basis } => MatrixPath::Poly {
            coeffs: coeffs.iter().map(f).collect(),
            basis: *basis,
        },
        MatrixPath::Sampled { grid, matrices } => MatrixPath::Sampled {
            grid: grid.clone(),
            matrices: matrices.iter().map(f).collect(),
        },
        other => MatrixPath::Similarity {
            base: Box::new(other.clone()),
            s: s.clone(),
            s_inv,
        },
    })
}

/// `α ↦ a C(α) + b I`.
pub fn scale_shift(path: &MatrixPath, a: Complex64, b: Complex64) -> MatrixPath {
    if a == Complex64::new(1.0, 0.0) && b == Complex64::new(0.0, 0.0) {
        return path.clone();
    }
    let f = |m: &CMatrix| m.scale(a).add_scalar(b);
    match path {
        MatrixPath::Convex { a: x, b: y } => MatrixPath::Convex { a: f(x), b: f(y) },
        MatrixPath::Sampled { grid, matrices } => MatrixPath::Sampled {
            grid: grid.clone(),
            matrices: matrices.iter().map(f).collect(),
        },
        MatrixPath::Poly {
            coeffs,
            basis: Basis::Bernstein,
        } => MatrixPath::Poly {
            coeffs: coeffs.iter().map(f).collect(),
            basis: Basis::Bernstein,
        },
        MatrixPath::Poly {
            coeffs,
            basis: Basis::Monomial,
        } => MatrixPath::Poly {
            coeffs: coeffs
                .iter()
                .enumerate()
                .map(|(k, m)| if k == 0 { f(m) } else { m.scale(a) })
                .collect(),
            basis: Basis::Monomial,
        },
        other => MatrixPath::Affine {
            base: Box::new(other.clone()),
            a,
            b,
        },
    }
}

/// `β(α) = αc / (1 − α + αc)`, the reparameterization relating the convex
/// path of `(A, cB)` to that of `(A, B)` up to positive scaling.
pub fn convex_scale_shift_map(c: f64, alpha: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid("scale factor must be positive"));
    }
    check_alpha(alpha)?;
    Ok(alpha * c / (1.0 - alpha + alpha * c))
}

fn reparam(path: &MatrixPath, start: f64, end: f64) -> MatrixPath {
    if start == 0.0 && end == 1.0 {
        return path.clone();
    }
    if let MatrixPath::Reparam { base, start: s0, end: e0 } = path {
        let map = |t: f64| s0 + (e0 - s0) * t;
        let (ns, ne) = (map(start), map(end));
        if ns == 0.0 && ne == 1.0 {
            return (**base).clone();
        }
        return MatrixPath::Reparam {
            base: base.clone(),
            start: ns,
            end: ne,
        };
    }
    MatrixPath::Reparam {
        base: Box::new(path.clone()),
        start,
        end,
    }
}

/// `α ↦ C(1 − α)`.
pub fn reverse(path: &MatrixPath) -> MatrixPath {
    match path {
        MatrixPath::Convex { a, b } => MatrixPath::Convex { a: b.clone(), b: a.clone() },
        MatrixPath::Poly {
            coeffs,
            basis: Basis::Bernstein,
        } => MatrixPath::Poly {
            coeffs: coeffs.iter().rev().cloned().collect(),
            basis: Basis::Bernstein,
        },
        other => reparam(other, 1.0, 0.0),
    }
}

/// Restriction to `[a, b]`, rescaled to `[0, 1]`.
pub fn truncate(path: &MatrixPath, a: f64, b: f64) -> Result<MatrixPath> {
    check_alpha(a)?;
    check_alpha(b)?;
    if a == b {
        return Err(Error::invalid("truncation interval is empty"));
    }
    if a == 0.0 && b == 1.0 {
        return Ok(path.clone());
    }
    Ok(match path {
        MatrixPath::Convex { .. } => MatrixPath::Convex {
            a: path.evaluate(a)?,
            b: path.evaluate(b)?,
        },
        other => reparam(other, a, b),
    })
}

/// `p1` followed by `p2`; requires `p1(1) = p2(0)` within `tol` (max norm).
pub fn concatenate(p1: &MatrixPath, p2: &MatrixPath, tol: f64) -> Result<MatrixPath> {
    if p1.dim() != p2.dim() {
        return Err(Error::DimensionMismatch {
            expected: p1.dim(),
            found: p2.dim(),
        });
    }
    let gap = p1.evaluate(1.0)?.dist_max(&p2.evaluate(0.0)?);
    if gap > tol {
        return Err(Error::invalid(format!("endpoint mismatch {gap:e} exceeds {tol:e}")));
    }
    Ok(MatrixPath::Concat {
        first: Box::new(p1.clone()),
        second: Box::new(p2.clone()),
    })
}

/// Block-diagonal direct sum of paths.
pub fn block_combine(paths: &[MatrixPath]) -> Result<MatrixPath> {
    match paths {
        [] => Err(Error::invalid("block combination needs at least one path")),
        [single] => Ok(single.clone()),
        many => Ok(MatrixPath::Block {
            blocks: many.to_vec(),
        }),
    }
}
