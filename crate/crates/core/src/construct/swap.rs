use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::path::MatrixPath;

/// Path from diagonal `d` back to itself exchanging the eigenvalues `dᵢ` and
/// `dⱼ` and fixing the rest.
///
/// On `[0, 1/2]` the `(i, j)` block is rotated by `πα` (spectrum constant);
/// on `[1/2, 1]` the two entries return along antipodal arcs of the ellipse
/// through `dᵢ, dⱼ`, flattened while it contains another diagonal entry.
/// `‖C(α) − D‖₂ ≤ |dᵢ − dⱼ|`, with equality only at α = 1/2.
pub fn swap_path(d: &CMatrix, i: usize, j: usize) -> Result<MatrixPath> {
    if !d.is_diagonal() {
        return Err(Error::invalid("swap_path needs a diagonal matrix"));
    }
    let n = d.dim();
    if i >= n || j >= n || i == j {
        return Err(Error::invalid("swap indices must be distinct and in range"));
    }
    let diag: Vec<Complex64> = (0..n).map(|k| d[(k, k)]).collect();
    for x in 0..n {
        for y in x + 1..n {
            if diag[x] == diag[y] {
                return Err(Error::Defective("diagonal entries must be distinct".into()));
            }
        }
    }
    let c = (diag[i] + diag[j]) * 0.5;
    let h = (diag[i] - diag[j]) * 0.5;
    // foreign entries in coordinates where the arcs are c ± h(cos θ + iκ sin θ)
    let foreign: Vec<Complex64> = (0..n)
        .filter(|&k| k != i && k != j)
        .map(|k| (diag[k] - c) / h)
        .collect();
    if foreign.iter().any(|z| *z == Complex64::new(0.0, 0.0)) {
        return Err(Error::Construction {
            alpha: 0.75,
            reason: "a diagonal entry sits at the arc midpoint".into(),
        });
    }
    let mut kappa = 1.0f64;
    // entries on the segment itself are never touched by the arcs
    let inside = |z: &Complex64, k: f64| z.im != 0.0 && z.re * z.re + (z.im / k).powi(2) <= 1.0;
    let mut shrinks = 0;
    while foreign.iter().any(|z| inside(z, kappa)) {
        kappa *= 0.5;
        shrinks += 1;
        if shrinks > 200 {
            return Err(Error::Construction {
                alpha: 0.75,
                reason: "could not clear the swap disk".into(),
            });
        }
    }
    Ok(MatrixPath::DiagonalSwap { d: diag, i, j, kappa })
}
