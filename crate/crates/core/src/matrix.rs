//! Dense square complex matrices.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex scalar; serialized as `[re, im]`.
pub type ComplexScalar = Complex64;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub(crate) fn is_finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Row-major square complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Complex64>>", into = "Vec<Vec<Complex64>>")]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl TryFrom<Vec<Vec<Complex64>>> for CMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        CMatrix::from_rows(rows)
    }
}

impl From<CMatrix> for Vec<Vec<Complex64>> {
    fn from(m: CMatrix) -> Self {
        m.rows()
    }
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be at least 1");
        CMatrix {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn scalar(n: usize, c: Complex64) -> Self {
        Self::identity(n).scale(c)
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let v: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diag(&v)
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("matrix must have at least one row"));
        }
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        if !data.iter().all(|&z| is_finite(z)) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(CMatrix { n, data })
    }

    /// Builds a matrix from real row-major data; panics on a non-square slice.
    pub fn from_real(n: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), n * n);
        CMatrix {
            n,
            data: values.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        CMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|&z| is_finite(z))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    /// `a * self + b * other`, the workhorse of every path evaluation.
    pub fn lincomb(a: f64, x: &CMatrix, b: f64, y: &CMatrix) -> CMatrix {
        debug_assert_eq!(x.n, y.n);
        CMatrix {
            n: x.n,
            data: x
                .data
                .iter()
                .zip(&y.data)
                .map(|(&p, &q)| p * a + q * b)
                .collect(),
        }
    }

    pub fn add_scalar(&self, c: Complex64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m[(i, i)] += c;
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    /// Spectral norm, the square root of the largest eigenvalue of `M* M`.
    pub fn norm2(&self) -> Result<f64> {
        let gram = &self.adjoint() * self;
        let top = crate::spectra::eigenvalues(&gram)?
            .values()
            .iter()
            .map(|z| z.re)
            .fold(0.0, f64::max);
        Ok(top.sqrt().min(self.norm_fro()))
    }

    /// Entrywise max-modulus norm `max |a_ij|`.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn dist_max(&self, other: &CMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self[(i, j)] == ZERO))
    }

    pub fn is_upper_hessenberg(&self) -> bool {
        (0..self.n).all(|i| (0..i.saturating_sub(1)).all(|j| self[(i, j)] == ZERO))
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// LU factorization with partial pivoting: returns the packed factors,
    /// row permutation and the pivot growth used to estimate conditioning.
    fn lu(&self) -> Option<(Vec<Complex64>, Vec<usize>)> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = self.norm_max().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[i * n + k].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax <= scale * 1e-300 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let piv = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / piv;
                a[i * n + k] = f;
                for j in k + 1..n {
                    let u = a[k * n + j];
                    a[i * n + j] -= f * u;
                }
            }
        }
        Some((a, perm))
    }

    fn lu_solve(lu: &[Complex64], perm: &[usize], n: usize, b: &[Complex64]) -> Vec<Complex64> {
        let mut x: Vec<Complex64> = perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = lu[i * n + j];
                x[i] = x[i] - l * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = lu[i * n + j];
                x[i] = x[i] - u * x[j];
            }
            x[i] /= lu[i * n + i];
        }
        x
    }

    /// Inverse with a condition estimate `‖A‖_max ‖A⁻¹‖_max · n`.
    pub fn inverse_with_cond(&self) -> Result<(CMatrix, f64)> {
        let n = self.n;
        let (lu, perm) = self.lu().ok_or(Error::Singular(f64::INFINITY))?;
        let mut inv = CMatrix::zeros(n);
        for j in 0..n {
            let mut e = vec![ZERO; n];
            e[j] = ONE;
            let col = Self::lu_solve(&lu, &perm, n, &e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        if !inv.is_finite() {
            return Err(Error::Singular(f64::INFINITY));
        }
        let cond = self.norm_max() * inv.norm_max() * n as f64;
        Ok((inv, cond))
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        self.inverse_with_cond().map(|(m, _)| m)
    }

    /// Solves `(self) x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let (lu, perm) = self.lu().ok_or(Error::Singular(f64::INFINITY))?;
        Ok(Self::lu_solve(&lu, &perm, self.n, b))
    }

    /// Direct sum of square blocks.
    pub fn block_diag(blocks: &[CMatrix]) -> CMatrix {
        let n: usize = blocks.iter().map(|b| b.n).sum();
        let mut m = CMatrix::zeros(n);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.n {
                for j in 0..b.n {
                    m[(off + i, off + j)] = b[(i, j)];
                }
            }
            off += b.n;
        }
        m
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        CMatrix::lincomb(1.0, self, 1.0, rhs)
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        CMatrix::lincomb(1.0, self, -1.0, rhs)
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inverse_recovers_identity() {
        let m = CMatrix::from_rows(vec![
            vec![c(2.0, 1.0), c(0.5, 0.0), c(0.0, -1.0)],
            vec![c(1.0, 0.0), c(3.0, 0.0), c(0.2, 0.3)],
            vec![c(0.0, 0.0), c(-1.0, 1.0), c(1.0, 0.0)],
        ])
        .unwrap();
        let inv = m.inverse().unwrap();
        let prod = &m * &inv;
        assert!(prod.dist_max(&CMatrix::identity(3)) < 1e-14);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = CMatrix::from_real(2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(m.inverse(), Err(Error::Singular(_))));
    }

    #[test]
    fn rejects_ragged_and_nonfinite_rows() {
        assert!(CMatrix::from_rows(vec![vec![ONE, ONE], vec![ONE]]).is_err());
        assert!(CMatrix::from_rows(vec![vec![c(f64::NAN, 0.0)]]).is_err());
    }

    #[test]
    fn norms() {
        let m = CMatrix::from_rows(vec![vec![c(3.0, 4.0), ZERO], vec![ZERO, c(0.0, -1.0)]]).unwrap();
        assert_eq!(m.norm_max(), 5.0);
        assert!((m.norm_fro() - 26f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn json_shape_is_array_of_pairs() {
        let m = CMatrix::from_rows(vec![vec![c(1.0, 2.0)]]).unwrap();
        assert_eq!(serde_json::to_string(&m).unwrap(), "[[[1.0,2.0]]]");
    }
}
