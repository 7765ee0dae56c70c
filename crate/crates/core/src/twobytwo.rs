//! Closed-form convex eigenpairings of 2×2 matrices.
//!
//! With `A = diag(λ₁, λ₂)` and `B` having eigenvectors `(v₁, 1), (v₂, 1)` for
//! `μ₁, μ₂`, the pairing `p: λⱼ ↦ μⱼ` or `q: λⱼ ↦ μ₃₋ⱼ` is decided by
//! comparing `|arg(μ/λ)|` with `θ = |arg(−w₊)|`, where `λ = λ₁ − λ₂`,
//! `μ = μ₁ − μ₂` and `w± = (v₁ + v₂ ± 2√(v₁v₂)) / (v₁ − v₂)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, ONE, ZERO};

/// Relative width of the `|arg(μ/λ)| = θ` band.
pub const EQ_TOL: f64 = 1e-8;
const AXIS_TOL: f64 = 1e-12;
const REPEAT_TOL: f64 = 1e-12;
const ROOT_IM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegenerateFlag {
    None,
    /// `B` has an eigenvector `(v, 0)`, shared with `A`'s first axis.
    SharedAxis,
    RepeatedEigenvalue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Canonical2x2 {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub mu1: Complex64,
    pub mu2: Complex64,
    /// First coordinates of `B`'s eigenvectors in `A`'s eigenbasis. For a
    /// shared axis the corresponding entry is 0 and `shared_mu` names it.
    pub v1: Complex64,
    pub v2: Complex64,
    pub degenerate_flag: DegenerateFlag,
    /// Index (1 or 2) of the `μ` whose eigenvector lies on `A`'s first axis.
    pub shared_mu: Option<u8>,
}

impl Canonical2x2 {
    pub fn lambda(&self) -> Complex64 {
        self.lambda1 - self.lambda2
    }

    pub fn mu(&self) -> Complex64 {
        self.mu1 - self.mu2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "P_only")]
    POnly,
    #[serde(rename = "Q_only")]
    QOnly,
    Both,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    /// Near-real zeros of the discriminant in `(0, 1)`.
    pub discriminant_roots: Vec<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingVerdict {
    pub verdict: Verdict,
    pub theta: f64,
    pub arg_ratio: f64,
    pub flags: DegenerateFlag,
    pub evidence: Evidence,
    pub canonical: Canonical2x2,
}

impl PairingVerdict {
    /// Value maps of the admitted pairings: `p` first when present.
    pub fn pairings(&self) -> Vec<[(Complex64, Complex64); 2]> {
        let c = &self.canonical;
        let p = [(c.lambda1, c.mu1), (c.lambda2, c.mu2)];
        let q = [(c.lambda1, c.mu2), (c.lambda2, c.mu1)];
        match self.verdict {
            Verdict::POnly => vec![p],
            Verdict::QOnly => vec![q],
            Verdict::Both => vec![p, q],
        }
    }
}

fn eig2_ordered(m: &CMatrix) -> (Complex64, Complex64) {
    if m.is_diagonal() {
        return (m[(0, 0)], m[(1, 1)]);
    }
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let mean = (a + d) * 0.5;
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    (mean + disc, mean - disc)
}

/// A nonzero solution of `(m − λI) x = 0`, the larger of the two row-based
/// candidates (`None` when `m = λI`).
fn kernel_vector(m: &CMatrix, lambda: Complex64) -> Option<[Complex64; 2]> {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let x = [b, lambda - a];
    let y = [lambda - d, c];
    let nx = x[0].norm() + x[1].norm();
    let ny = y[0].norm() + y[1].norm();
    if nx == 0.0 && ny == 0.0 {
        None
    } else if nx >= ny {
        Some(x)
    } else {
        Some(y)
    }
}

fn check_2x2(a: &CMatrix, b: &CMatrix) -> Result<()> {
    for m in [a, b] {
        if m.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: m.dim(),
            });
        }
    }
    Ok(())
}

/// Puts `(A, B)` into the canonical form with `A` diagonal.
pub fn reduce(a: &CMatrix, b: &CMatrix) -> Result<Canonical2x2> {
    check_2x2(a, b)?;
    let (l1, l2) = eig2_ordered(a);
    let (m1, m2) = eig2_ordered(b);
    let mut canon = Canonical2x2 {
        lambda1: l1,
        lambda2: l2,
        mu1: m1,
        mu2: m2,
        v1: ZERO,
        v2: ZERO,
        degenerate_flag: DegenerateFlag::None,
        shared_mu: None,
    };
    let rep = |x: Complex64, y: Complex64, m: &CMatrix| (x - y).norm() <= REPEAT_TOL * (1.0 + m.norm_max());
    if rep(l1, l2, a) || rep(m1, m2, b) {
        canon.degenerate_flag = DegenerateFlag::RepeatedEigenvalue;
        return Ok(canon);
    }
    // eigenbasis of A
    let x = if a.is_diagonal() {
        CMatrix::identity(2)
    } else {
        let e1 = kernel_vector(a, l1).expect("distinct eigenvalues");
        let e2 = kernel_vector(a, l2).expect("distinct eigenvalues");
        CMatrix::from_rows(vec![vec![e1[0], e2[0]], vec![e1[1], e2[1]]])?
    };
    let bb = &(&x.inverse()? * b) * &x;
    let mut vs = [ZERO; 2];
    for (i, &mu) in [m1, m2].iter().enumerate() {
        let w = kernel_vector(&bb, mu).expect("distinct eigenvalues");
        let norm = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
        if w[1].norm() < AXIS_TOL * norm {
            canon.degenerate_flag = DegenerateFlag::SharedAxis;
            canon.shared_mu = Some(i as u8 + 1);
            vs[i] = ZERO;
        } else {
            vs[i] = w[0] / w[1];
        }
    }
    canon.v1 = vs[0];
    canon.v2 = vs[1];
    Ok(canon)
}

/// `(w₊, w₋)` for the principal square root; `w₊ w₋ = 1`.
pub fn w_pair(v1: Complex64, v2: Complex64) -> Result<(Complex64, Complex64)> {
    if v1 == v2 {
        return Err(Error::Defective("v₁ = v₂".into()));
    }
    let s = (v1 * v2).sqrt() * 2.0;
    let d = v1 - v2;
    Ok(((v1 + v2 + s) / d, (v1 + v2 - s) / d))
}

/// `(arg(−w₊), arg(−w₋))`, each in `(−π, π]`.
pub fn theta_candidates(v1: Complex64, v2: Complex64) -> Result<(f64, f64)> {
    let (wp, wm) = w_pair(v1, v2)?;
    Ok((principal_arg(-wp), principal_arg(-wm)))
}

fn principal_arg(z: Complex64) -> f64 {
    let a = z.arg();
    if a <= -PI {
        PI
    } else {
        a
    }
}

/// `θ = |arg(−w₊)| ∈ [0, π]`.
pub fn theta(v1: Complex64, v2: Complex64) -> Result<f64> {
    Ok(theta_candidates(v1, v2)?.0.abs())
}

/// Zeros of the discriminant `γ(α)` that are real to `1e−6` and lie in `(0, 1)`.
pub fn discriminant_roots(canon: &Canonical2x2) -> Vec<f64> {
    let (lam, mu) = (canon.lambda(), canon.mu());
    if canon.v1 == canon.v2 {
        return Vec::new();
    }
    let k = (canon.v1 + canon.v2) / (canon.v1 - canon.v2);
    let c2 = lam * lam + mu * mu - k * lam * mu * 2.0;
    let c1 = -(lam * lam) * 2.0 + k * lam * mu * 2.0;
    let c0 = lam * lam;
    let roots: Vec<Complex64> = if c2.norm() <= 1e-14 * (c1.norm() + c0.norm()) {
        if c1 == ZERO {
            Vec::new()
        } else {
            vec![-c0 / c1]
        }
    } else {
        let disc = (c1 * c1 - c2 * c0 * 4.0).sqrt();
        let q = if (c1.conj() * disc).re >= 0.0 {
            -(c1 + disc) * 0.5
        } else {
            -(c1 - disc) * 0.5
        };
        let mut r = Vec::new();
        if q != ZERO {
            r.push(q / c2);
            r.push(c0 / q);
        } else {
            r.push(ZERO);
            r.push(ZERO);
        }
        r
    };
    let mut out: Vec<f64> = roots
        .into_iter()
        .filter(|z| z.im.abs() <= ROOT_IM_TOL && z.re > 0.0 && z.re < 1.0)
        .map(|z| z.re)
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    out
}

/// Decides which of `p`, `q` are convex eigenpairings of `(A, B)`.
pub fn classify(a: &CMatrix, b: &CMatrix) -> Result<PairingVerdict> {
    classify_with_tol(a, b, EQ_TOL)
}

pub fn classify_with_tol(a: &CMatrix, b: &CMatrix, eq_tol: f64) -> Result<PairingVerdict> {
    let canon = reduce(a, b)?;
    let mut evidence = Evidence::default();
    let ratio_of = |c: &Canonical2x2| {
        let l = c.lambda();
        if l == ZERO {
            ONE
        } else {
            c.mu() / l
        }
    };
    match canon.degenerate_flag {
        DegenerateFlag::RepeatedEigenvalue => {
            evidence.notes.push("repeated eigenvalue: every bijection is a pairing".into());
            Ok(PairingVerdict {
                verdict: Verdict::Both,
                theta: 0.0,
                arg_ratio: principal_arg(ratio_of(&canon)),
                flags: canon.degenerate_flag,
                evidence,
                canonical: canon,
            })
        }
        DegenerateFlag::SharedAxis => {
            let ratio = ratio_of(&canon);
            let arg = principal_arg(ratio);
            let band = eq_tol * PI;
            let negative = (arg.abs() - PI).abs() <= band;
            let positive = arg.abs() <= band;
            let verdict = match canon.shared_mu {
                Some(1) if negative => Verdict::Both,
                Some(1) => Verdict::POnly,
                _ if positive => Verdict::Both,
                _ => Verdict::QOnly,
            };
            if verdict == Verdict::Both {
                evidence.notes.push("straight-line eigenpaths cross".into());
            }
            Ok(PairingVerdict {
                verdict,
                theta: if canon.shared_mu == Some(1) { PI } else { 0.0 },
                arg_ratio: arg,
                flags: canon.degenerate_flag,
                evidence,
                canonical: canon,
            })
        }
        DegenerateFlag::None => {
            let th = theta(canon.v1, canon.v2)?;
            let arg = principal_arg(ratio_of(&canon));
            let diff = arg.abs() - th;
            let band = eq_tol * th.max(arg.abs()).max(1.0);
            let verdict = if diff.abs() <= band {
                Verdict::Both
            } else if diff < 0.0 {
                Verdict::POnly
            } else {
                Verdict::QOnly
            };
            if verdict == Verdict::Both {
                evidence.discriminant_roots = discriminant_roots(&canon);
                if (arg.abs() - PI).abs() <= band && (th - PI).abs() <= band {
                    evidence.notes.push("arg(μ/λ) = π = θ: both limits touch".into());
                }
            }
            Ok(PairingVerdict {
                verdict,
                theta: th,
                arg_ratio: arg,
                flags: canon.degenerate_flag,
                evidence,
                canonical: canon,
            })
        }
    }
}

/// A straight eigenpath segment `α ↦ (1 − α) start + α end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: Complex64,
    pub end: Complex64,
}

impl Segment {
    pub fn at(&self, alpha: f64) -> Complex64 {
        self.start * (1.0 - alpha) + self.end * alpha
    }
}

fn eigvecs(m: &CMatrix) -> Vec<(Complex64, [Complex64; 2])> {
    let (l1, l2) = eig2_ordered(m);
    let mut out = Vec::new();
    for l in [l1, l2] {
        match kernel_vector(m, l) {
            Some(v) => out.push((l, v)),
            None => {
                // scalar matrix: every vector is an eigenvector
                out.push((l, [ONE, ZERO]));
                out.push((l, [ZERO, ONE]));
                return out;
            }
        }
    }
    out
}

/// Both eigenpaths as straight lines when `A` and `B` share an eigenvector
/// (the second line follows from the trace).
pub fn straight_line_paths(a: &CMatrix, b: &CMatrix) -> Result<(Segment, Segment)> {
    check_2x2(a, b)?;
    let ea = eigvecs(a);
    let eb = eigvecs(b);
    let scalar_b = (eig2_ordered(b).0 - eig2_ordered(b).1).norm() == 0.0 && kernel_vector(b, eig2_ordered(b).0).is_none();
    for &(l, x) in &ea {
        for &(m, y) in &eb {
            let dot = x[0].conj() * y[0] + x[1].conj() * y[1];
            let nx = (x[0].norm_sqr() + x[1].norm_sqr()).sqrt();
            let ny = (y[0].norm_sqr() + y[1].norm_sqr()).sqrt();
            if scalar_b || dot.norm() >= (1.0 - 1e-10) * nx * ny {
                let first = Segment { start: l, end: m };
                let second = Segment {
                    start: a.trace() - l,
                    end: b.trace() - m,
                };
                return Ok((first, second));
            }
        }
    }
    Err(Error::invalid("A and B share no eigenvector"))
}
