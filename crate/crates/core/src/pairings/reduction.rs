use serde::{Deserialize, Serialize};

use super::{pairings_of, PAIRING_TOL};
use crate::config::TrackConfig;
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::path::{MatrixPath, RealFn};
use crate::tracker::track;
use crate::types::Eigenpairing;

const HYPOTHESIS_GRID: usize = 10_000;
const ENDPOINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub hypothesis_holds: bool,
    /// `min_α max(f(α), g(α))` over the hypothesis grid.
    pub min_f_or_g: f64,
    pub min_f: f64,
    pub min_g: f64,
    pub convex_pairings: usize,
    pub combination_pairings: usize,
    /// `None` when the hypothesis fails and nothing was asserted.
    pub contained: Option<bool>,
    pub missing: Vec<Eigenpairing>,
    /// Splice choice in the combination path realizing each convex pairing.
    pub witnesses: Vec<Vec<Vec<usize>>>,
    pub truncated: bool,
    pub notes: Vec<String>,
}

fn refine_root(h: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let neg_lo = h(lo) < 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (h(mid) < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `(min (f ∨ g), min f, min g)` over a 10,001-point grid plus the
/// bisection-refined sign changes of `f` and `g`.
pub fn hypothesis_min(f: &RealFn, g: &RealFn) -> (f64, f64, f64) {
    let mut pts: Vec<f64> = (0..=HYPOTHESIS_GRID).map(|k| k as f64 / HYPOTHESIS_GRID as f64).collect();
    let mut extra = Vec::new();
    for h in [f, g] {
        let eval = |t: f64| h.eval(t);
        for w in pts.windows(2) {
            if (eval(w[0]) < 0.0) != (eval(w[1]) < 0.0) {
                let r = refine_root(&eval, w[0], w[1]);
                extra.extend([r, r - 1e-12, r + 1e-12].into_iter().filter(|x| (0.0..=1.0).contains(x)));
            }
        }
    }
    pts.extend(extra);
    let mut m = f64::INFINITY;
    let mut mf = f64::INFINITY;
    let mut mg = f64::INFINITY;
    for t in pts {
        let (a, b) = (f.eval(t), g.eval(t));
        m = m.min(a.max(b));
        mf = mf.min(a);
        mg = mg.min(b);
    }
    (m, mf, mg)
}

/// Checks that every convex eigenpairing of `(A, B)` is an eigenpairing of
/// `f(α) A + g(α) B`, provided `max(f, g) ≥ 0` everywhere.
pub fn convex_reduction_check(
    a: &CMatrix,
    b: &CMatrix,
    f: &RealFn,
    g: &RealFn,
    cfg: &TrackConfig,
) -> Result<ReductionReport> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let ends = [f.eval(0.0) - 1.0, g.eval(1.0) - 1.0, f.eval(1.0), g.eval(0.0)];
    if ends.iter().any(|e| e.abs() > ENDPOINT_TOL) {
        return Err(Error::invalid("need f(0) = g(1) = 1 and f(1) = g(0) = 0"));
    }
    let (min_fg, min_f, min_g) = hypothesis_min(f, g);
    let mut report = ReductionReport {
        hypothesis_holds: min_fg >= 0.0,
        min_f_or_g: min_fg,
        min_f,
        min_g,
        convex_pairings: 0,
        combination_pairings: 0,
        contained: None,
        missing: Vec::new(),
        witnesses: Vec::new(),
        truncated: false,
        notes: Vec::new(),
    };
    if !report.hypothesis_holds {
        report.notes.push("hypothesis fails: max(f, g) is negative somewhere".into());
        return Ok(report);
    }
    let convex = MatrixPath::convex(a.clone(), b.clone());
    let combo = MatrixPath::Combination {
        a: a.clone(),
        b: b.clone(),
        f: f.clone(),
        g: g.clone(),
    };
    let tc = track(&convex, cfg)?;
    let tg = track(&combo, cfg)?;
    let pc = pairings_of(&tc, cfg.pairing_cap);
    let pg = pairings_of(&tg, cfg.pairing_cap);
    report.convex_pairings = pc.len();
    report.combination_pairings = pg.len();
    report.truncated = pc.truncated || pg.truncated;
    let tol = PAIRING_TOL * (1.0 + a.norm_max().max(b.norm_max()));
    for p in &pc.pairings {
        match pg.find(p, tol) {
            Some(k) => report.witnesses.push(pg.witnesses[k].clone()),
            None => report.missing.push(p.clone()),
        }
    }
    report.contained = Some(report.missing.is_empty());
    if min_f < 0.0 || min_g < 0.0 {
        report.notes.push("f or g dips below zero".into());
    }
    report.notes.extend(pc.notes.into_iter().map(|s| format!("convex: {s}")));
    report.notes.extend(pg.notes.into_iter().map(|s| format!("combination: {s}")));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::Builtin;

    #[test]
    fn convex_itself_is_contained() {
        let a = CMatrix::from_real(2, &[1.0, 2.0, 0.5, -1.0]);
        let b = CMatrix::from_real(2, &[0.0, 1.0, -3.0, 2.0]);
        let r = convex_reduction_check(
            &a,
            &b,
            &RealFn::Named(Builtin::LinearDown),
            &RealFn::Named(Builtin::Linear),
            &TrackConfig::default(),
        )
        .unwrap();
        assert!(r.hypothesis_holds);
        assert_eq!(r.contained, Some(true));
    }

    #[test]
    fn violated_hypothesis_is_reported() {
        let a = CMatrix::identity(2);
        // f = 1 − 3α + 2α² − … dips with g = α² − α·(…) also negative
        let f = RealFn::poly(&[1.0, -4.0, 3.0]);
        let g = RealFn::poly(&[0.0, -2.0, 3.0]);
        let r = convex_reduction_check(&a, &a, &f, &g, &TrackConfig::default()).unwrap();
        assert!(!r.hypothesis_holds);
        assert_eq!(r.contained, None);
    }

    #[test]
    fn endpoint_conditions_enforced() {
        let a = CMatrix::identity(2);
        let f = RealFn::poly(&[1.0]);
        assert!(convex_reduction_check(&a, &a, &f, &RealFn::Named(Builtin::Linear), &TrackConfig::default()).is_err());
    }
}
