use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matrix::CMatrix;
use crate::path::PathEval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// `sin²`, vanishing at both window ends.
    Interior,
    /// Equal to 1 at α = 0, vanishing at the right end.
    Start,
    /// Equal to 1 at α = 1, vanishing at the left end.
    End,
}

#[derive(Debug, Clone)]
pub(crate) struct Bump {
    pub start: f64,
    pub end: f64,
    pub shape: Shape,
    pub e: CMatrix,
}

impl Bump {
    pub fn weight(&self, alpha: f64) -> f64 {
        if alpha <= self.start || alpha >= self.end {
            return match self.shape {
                Shape::Start if alpha <= self.start => 1.0,
                Shape::End if alpha >= self.end => 1.0,
                _ => 0.0,
            };
        }
        let t = (alpha - self.start) / (self.end - self.start);
        match self.shape {
            Shape::Interior => (PI * t).sin().powi(2),
            Shape::Start => (0.5 * PI * t).cos().powi(2),
            Shape::End => (0.5 * PI * t).sin().powi(2),
        }
    }
}

/// `C(α) + Σ wₖ(α) Eₖ`.
pub(crate) struct Bumped<'a, P> {
    pub base: &'a P,
    pub bumps: &'a [Bump],
}

impl<P: PathEval> PathEval for Bumped<'_, P> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn eval(&self, alpha: f64) -> Result<CMatrix> {
        let mut m = self.base.eval(alpha)?;
        for b in self.bumps {
            let w = b.weight(alpha);
            if w != 0.0 {
                m = CMatrix::lincomb(1.0, &m, w, &b.e);
            }
        }
        Ok(m)
    }
}

/// `[a, b]` of an inner path, rescaled to `[0, 1]`.
pub(crate) struct Window<'a, P> {
    pub inner: &'a P,
    pub a: f64,
    pub b: f64,
}

impl<P: PathEval> Window<'_, P> {
    pub fn alpha(&self, beta: f64) -> f64 {
        if beta >= 1.0 {
            self.b
        } else {
            (self.a + (self.b - self.a) * beta).clamp(self.a, self.b)
        }
    }
}

impl<P: PathEval> PathEval for Window<'_, P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, beta: f64) -> Result<CMatrix> {
        self.inner.eval(self.alpha(beta))
    }
}

/// Random complex matrix with Frobenius norm `r`.
pub(crate) fn random_matrix<R: Rng>(n: usize, r: f64, rng: &mut R) -> CMatrix {
    let m = CMatrix::from_fn(n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let f = m.norm_fro();
    if f == 0.0 {
        CMatrix::identity(n).scale_real(r / (n as f64).sqrt())
    } else {
        m.scale_real(r / f)
    }
}
