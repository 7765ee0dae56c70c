#![allow(dead_code)]

use eigenpaths::{CMatrix, Complex64, MatrixPath};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Two real eigenvalues exchanging places through 0 at α = 1/2.
pub fn crossing() -> MatrixPath {
    MatrixPath::convex(CMatrix::diag_real(&[1.0, -1.0]), CMatrix::diag_real(&[-1.0, 1.0]))
}

/// `diag(1, −1)` to `i·[[0, 1], [1, 0]]`: the 2×2 instance admitting both pairings.
pub fn both_instance() -> MatrixPath {
    let b = CMatrix::from_rows(vec![vec![c(0.0, 0.0), c(0.0, 1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]]).unwrap();
    MatrixPath::convex(CMatrix::diag_real(&[1.0, -1.0]), b)
}

pub const TRIPLE_CENTER: Complex64 = Complex64::new(0.5, 0.25);

/// 3×3 convex path whose midpoint is `cI`, so all three eigenvalues meet there.
pub fn triple() -> MatrixPath {
    let m = CMatrix::from_rows(vec![
        vec![c(1.0, 0.0), c(0.3, 0.0), c(0.0, 0.0)],
        vec![c(0.2, 0.0), c(-0.5, 0.4), c(0.1, 0.0)],
        vec![c(0.0, 0.0), c(0.5, 0.0), c(-0.3, -0.6)],
    ])
    .unwrap();
    let a = m.add_scalar(TRIPLE_CENTER);
    let b = m.scale_real(-1.0).add_scalar(TRIPLE_CENTER);
    MatrixPath::convex(a, b)
}

pub fn fixtures() -> Vec<(&'static str, MatrixPath)> {
    vec![("crossing", crossing()), ("both", both_instance()), ("triple", triple())]
}

/// Entries uniform in the unit square of the complex plane, centered at 0.
pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Random matrix rescaled to Frobenius norm `r`.
pub fn random_with_norm(rng: &mut ChaCha8Rng, n: usize, r: f64) -> CMatrix {
    let m = random_matrix(rng, n);
    let f = m.norm_fro();
    m.scale_real(r / f)
}

pub fn random_real_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), 0.0))
}
