//! Monic polynomial paths, their companion matrix paths and root tracking.
//!
//! Coefficients are stored low to high without the leading 1, so a degree-n
//! path carries n coefficients per polynomial. In JSON each coefficient may
//! be a real number or an `[re, im]` pair.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize};

use crate::config::TrackConfig;
use crate::construct::{rip_with, RipOptions, RipResult};
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::pairings::{convex_reduction_check, ReductionReport};
use crate::path::{check_alpha, uniform_grid, MatrixPath, PathEval, RealFn};
use crate::spectra::{char_poly, poly_roots, poly_roots_with_guess, MonicPoly};
use crate::tracker::experiment::permutations;
use crate::tracker::{bottleneck_assign, match_values, matched_max_distance, track, Tracked};
use crate::types::{argsort, EigenPathSet};

mod flex {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Coef {
        Real(f64),
        Pair([f64; 2]),
    }

    impl From<Coef> for Complex64 {
        fn from(c: Coef) -> Self {
            match c {
                Coef::Real(x) => Complex64::new(x, 0.0),
                Coef::Pair([re, im]) => Complex64::new(re, im),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<Complex64>>, D::Error> {
        let raw: Vec<Vec<Coef>> = Vec::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|row| row.into_iter().map(Complex64::from).collect())
            .collect())
    }
}

/// A monic polynomial of fixed degree for every `α ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolyPath {
    /// `(1 − α) Q + α R`; `coeffs = [Q, R]`.
    Convex {
        #[serde(deserialize_with = "flex::deserialize")]
        coeffs: Vec<Vec<Complex64>>,
    },
    /// `(f Q + g R) / (f + g)`, renormalized to stay monic; `coeffs = [Q, R]`.
    Combination {
        #[serde(deserialize_with = "flex::deserialize")]
        coeffs: Vec<Vec<Complex64>>,
        f: RealFn,
        g: RealFn,
    },
    /// Coefficientwise linear interpolation through `(grid[k], coeffs[k])`.
    Sampled {
        grid: Vec<f64>,
        #[serde(deserialize_with = "flex::deserialize")]
        coeffs: Vec<Vec<Complex64>>,
    },
}

impl PolyPath {
    pub fn convex(q: &MonicPoly, r: &MonicPoly) -> Self {
        PolyPath::Convex {
            coeffs: vec![q.coeffs.clone(), r.coeffs.clone()],
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: PolyPath = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("polynomial paths serialize")
    }

    fn rows(&self) -> &[Vec<Complex64>] {
        match self {
            PolyPath::Convex { coeffs } | PolyPath::Combination { coeffs, .. } | PolyPath::Sampled { coeffs, .. } => {
                coeffs
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.rows().first().map_or(0, |r| r.len())
    }

    pub fn validate(&self) -> Result<()> {
        let rows = self.rows();
        let n = self.degree();
        if n == 0 {
            return Err(Error::invalid("polynomial path needs degree at least 1"));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("all polynomials of a path must share one degree"));
        }
        if !rows.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("polynomial path coefficients"));
        }
        match self {
            PolyPath::Convex { coeffs } => {
                if coeffs.len() != 2 {
                    return Err(Error::invalid("convex polynomial path needs exactly two polynomials"));
                }
            }
            PolyPath::Combination { coeffs, f, g } => {
                if coeffs.len() != 2 {
                    return Err(Error::invalid("combination polynomial path needs exactly two polynomials"));
                }
                // validates f and g through the matrix form
                MatrixPath::Combination {
                    a: CMatrix::identity(1),
                    b: CMatrix::identity(1),
                    f: f.clone(),
                    g: g.clone(),
                }
                .validate()?;
                let grid = uniform_grid(1000);
                if let Some(&a) = grid.iter().find(|&&a| (f.eval(a) + g.eval(a)).abs() < 1e-12) {
                    return Err(Error::invalid(format!("f + g vanishes near alpha = {a}")));
                }
            }
            PolyPath::Sampled { grid, coeffs } => {
                if grid.len() < 2 || grid.len() != coeffs.len() {
                    return Err(Error::invalid("sampled polynomial path needs matching grid and coefficients"));
                }
                if grid[0] != 0.0 || grid[grid.len() - 1] != 1.0 || grid.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::invalid("sampled grid must increase strictly from 0 to 1"));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, alpha: f64) -> Result<MonicPoly> {
        check_alpha(alpha)?;
        let mix = |x: &[Complex64], y: &[Complex64], s: f64, t: f64| -> Vec<Complex64> {
            x.iter().zip(y).map(|(a, b)| a * s + b * t).collect()
        };
        let c = match self {
            PolyPath::Convex { coeffs } => mix(&coeffs[0], &coeffs[1], 1.0 - alpha, alpha),
            PolyPath::Combination { coeffs, f, g } => {
                let (fa, ga) = (f.eval(alpha), g.eval(alpha));
                let s = fa + ga;
                if s.abs() < 1e-300 {
                    return Err(Error::invalid(format!("f + g vanishes at alpha = {alpha}")));
                }
                mix(&coeffs[0], &coeffs[1], fa / s, ga / s)
            }
            PolyPath::Sampled { grid, coeffs } => {
                let k = grid.partition_point(|&g| g <= alpha);
                if k == 0 {
                    coeffs[0].clone()
                } else if k >= grid.len() {
                    coeffs[grid.len() - 1].clone()
                } else if grid[k - 1] == alpha {
                    coeffs[k - 1].clone()
                } else {
                    let t = (alpha - grid[k - 1]) / (grid[k] - grid[k - 1]);
                    mix(&coeffs[k - 1], &coeffs[k], 1.0 - t, t)
                }
            }
        };
        MonicPoly::new(c)
    }
}

/// Companion matrix: ones on the subdiagonal, last column `−a₀ … −a_{n−1}`.
pub fn companion(p: &MonicPoly) -> CMatrix {
    let n = p.degree();
    let mut m = CMatrix::zeros(n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for (i, &a) in p.coeffs.iter().enumerate() {
        m[(i, n - 1)] = -a;
    }
    m
}

/// `α ↦ companion(pp(α))`. Convex paths map to convex matrix paths since
/// the companion is affine in the coefficients.
pub fn companion_path(pp: &PolyPath) -> MatrixPath {
    match pp {
        PolyPath::Convex { coeffs } => MatrixPath::convex(
            companion(&MonicPoly { coeffs: coeffs[0].clone() }),
            companion(&MonicPoly { coeffs: coeffs[1].clone() }),
        ),
        other => MatrixPath::Companion {
            path: Box::new(other.clone()),
        },
    }
}

impl PathEval for PolyPath {
    fn dim(&self) -> usize {
        self.degree()
    }
    fn eval(&self, alpha: f64) -> Result<CMatrix> {
        Ok(companion(&PolyPath::eval(self, alpha)?))
    }
}

/// Root paths and collisions, by tracking the companion matrix path.
pub fn track_roots(pp: &PolyPath, cfg: &TrackConfig) -> Result<Tracked> {
    pp.validate()?;
    track(&companion_path(pp), cfg)
}

fn root_tol(p: &MonicPoly) -> f64 {
    1e-13 * (1.0 + p.norm())
}

/// Warm-started root step from `prev` at one α to `p`; reseeds from the
/// default circle once if the warm start fails.
fn continue_roots(p: &MonicPoly, prev: &[Complex64], alpha: f64) -> Result<Vec<Complex64>> {
    let fresh = match poly_roots_with_guess(p, prev, root_tol(p)) {
        Ok(s) => s,
        Err(_) => poly_roots(p, root_tol(p)).map_err(|_| Error::NonConvergence {
            what: format!("root continuation at alpha = {alpha}"),
            cap: 2,
        })?,
    };
    let v = fresh.into_vec();
    let pi = match_values(prev, &v)?;
    Ok(pi.iter().map(|&j| v[j]).collect())
}

/// Root paths by direct continuation, reported at the points of `grid`.
///
/// Steps between grid points are halved until no root moves more than
/// `eps_resolution` and the matching is unambiguous (each root's nearest new
/// value is more than twice as close as any other), down to a `2⁻⁴⁰` floor.
pub fn track_roots_direct_on(pp: &PolyPath, grid: &[f64], cfg: &TrackConfig) -> Result<EigenPathSet> {
    pp.validate()?;
    cfg.validate()?;
    if grid.first() != Some(&0.0) || grid.last() != Some(&1.0) || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("grid must increase strictly from 0 to 1"));
    }
    let p0 = pp.eval(0.0)?;
    let mut cur: Vec<Complex64> = poly_roots(&p0, root_tol(&p0))?.into_vec();
    let order = argsort(&cur);
    cur = order.iter().map(|&j| cur[j]).collect();
    let n = cur.len();
    let mut cols: Vec<Vec<Complex64>> = vec![cur.clone()];
    let mut at = 0.0f64;
    for &target in &grid[1..] {
        while at < target {
            let mut h = target - at;
            loop {
                let next_alpha = if h >= target - at { target } else { at + h };
                let p = pp.eval(next_alpha)?;
                let next = continue_roots(&p, &cur, next_alpha)?;
                let motion = cur.iter().zip(&next).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                let clear = (0..n).all(|j| {
                    let own = (next[j] - cur[j]).norm();
                    (0..n).filter(|&k| k != j).all(|k| (next[k] - cur[j]).norm() > 2.0 * own)
                });
                if (motion <= cfg.eps_resolution && clear) || h < (target - at) * 2f64.powi(-40) || h < 1e-15 {
                    cur = next;
                    at = next_alpha;
                    break;
                }
                h *= 0.5;
            }
        }
        cols.push(cur.clone());
    }
    let paths = (0..n).map(|j| cols.iter().map(|c| c[j]).collect()).collect();
    Ok(EigenPathSet {
        grid: grid.to_vec(),
        paths,
    })
}

/// [`track_roots_direct_on`] over a uniform grid of `grid_init` intervals.
pub fn track_roots_direct(pp: &PolyPath, cfg: &TrackConfig) -> Result<EigenPathSet> {
    track_roots_direct_on(pp, &uniform_grid(cfg.grid_init), cfg)
}

/// Largest matched distance between two root path sets, column by column on
/// the grid of `a` (`b` is interpolated).
pub fn max_matched_deviation(a: &EigenPathSet, b: &EigenPathSet) -> f64 {
    a.grid
        .iter()
        .enumerate()
        .map(|(k, &x)| matched_max_distance(&a.column(k), &b.at(x)))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyRipResult {
    pub new_path: PolyPath,
    /// Largest coefficient distance `max_α ‖P_α − P′_α‖`.
    pub coeff_dev: f64,
    /// Bound on the distance between the new root paths and the spliced
    /// reference root paths.
    pub root_dev: f64,
    /// Matrix-level eps handed to the ripping step.
    pub matrix_eps: f64,
}

/// Ambiguity-free `eps`-perturbation of a polynomial path.
///
/// The companion path is ripped at a matrix tolerance that starts at `eps`
/// and is quartered until the sampled characteristic polynomials meet the
/// coefficient and root-path budgets. Companion matrices are never
/// derogatory, so a tangential root collision can only be opened into some
/// of its splices; when the straight-through choice is out of reach the
/// other splice choices are tried in lexicographic order.
pub fn rip_poly(pp: &PolyPath, eps: f64, cfg: &TrackConfig, seed: u64) -> Result<PolyRipResult> {
    let base = track_roots(pp, cfg)?;
    let sizes: Vec<usize> = base.report.clusters.iter().map(|c| c.members.len()).collect();
    let mut choices: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for &m in &sizes {
        let perms = permutations(m);
        choices = choices
            .into_iter()
            .flat_map(|c| {
                perms.iter().map(move |p| {
                    let mut c = c.clone();
                    c.push(p.clone());
                    c
                })
            })
            .take(SPLICE_CHOICES)
            .collect();
    }
    let mut last = None;
    for splices in choices {
        match rip_poly_with(pp, eps, cfg, seed, Some(splices)) {
            Ok(r) => return Ok(r),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one splice choice"))
}

const SPLICE_CHOICES: usize = 24;

/// [`rip_poly`] towards the given splice choice (one member permutation per
/// root collision, in α order); `None` keeps the tracked paths.
pub fn rip_poly_with(
    pp: &PolyPath,
    eps: f64,
    cfg: &TrackConfig,
    seed: u64,
    splices: Option<Vec<Vec<usize>>>,
) -> Result<PolyRipResult> {
    pp.validate()?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid("eps must be positive"));
    }
    let base = track_roots(pp, cfg)?;
    if base.report.is_empty() {
        return Ok(PolyRipResult {
            new_path: pp.clone(),
            coeff_dev: 0.0,
            root_dev: 0.0,
            matrix_eps: eps,
        });
    }
    let cpath = companion_path(pp);
    let mut meps = eps;
    let mut last = String::new();
    for round in 0..8 {
        let opts = RipOptions {
            seed: seed.wrapping_add(round),
            splices: splices.clone(),
            ..RipOptions::default()
        };
        let ripped = match rip_with(&cpath, meps, cfg, &opts) {
            Ok(r) => r,
            Err(e) => {
                last = e.to_string();
                meps *= 0.25;
                continue;
            }
        };
        let MatrixPath::Sampled { grid, matrices } = &ripped.new_path else {
            return Err(Error::Construction {
                alpha: 0.0,
                reason: "ripping returned an unsampled path for an ambiguous input".into(),
            });
        };
        let coeffs = matrices
            .iter()
            .map(|m| char_poly(m, cfg.char_poly_cap).map(|p| p.coeffs))
            .collect::<Result<Vec<_>>>()?;
        let new_path = PolyPath::Sampled {
            grid: grid.clone(),
            coeffs,
        };
        match verify_poly(pp, &new_path, &ripped, eps, cfg)? {
            Ok((coeff_dev, root_dev)) => {
                return Ok(PolyRipResult {
                    new_path,
                    coeff_dev,
                    root_dev,
                    matrix_eps: meps,
                })
            }
            Err(why) => last = why,
        }
        meps *= 0.25;
    }
    Err(Error::Construction {
        alpha: base.report.clusters[0].ambiguity.alpha,
        reason: format!("coefficient budget not met after tightening: {last}"),
    })
}

/// Coefficient deviation and a bound on the root-path deviation: the ripped
/// matrix path is within `path_dev` of the reference, and the new root paths
/// are compared with its eigenpaths directly.
#[allow(clippy::type_complexity)]
fn verify_poly(
    pp: &PolyPath,
    new_path: &PolyPath,
    ripped: &RipResult,
    eps: f64,
    cfg: &TrackConfig,
) -> Result<std::result::Result<(f64, f64), String>> {
    let nt = track_roots(new_path, cfg)?;
    if !nt.report.is_empty() {
        return Ok(Err(format!("{} root collisions remain", nt.report.len())));
    }
    let mt = track(&ripped.new_path, cfg)?;
    let mut check = uniform_grid(10_000);
    if let PolyPath::Sampled { grid, .. } = new_path {
        check.extend(grid.iter().copied());
    }
    check.sort_by(f64::total_cmp);
    check.dedup();
    let mut coeff_dev = 0.0f64;
    let n = nt.paths.n();
    let mut d = vec![vec![0.0f64; n]; n];
    for &x in &check {
        coeff_dev = coeff_dev.max(pp.eval(x)?.dist(&new_path.eval(x)?));
        let r = mt.paths.at(x);
        let s = nt.paths.at(x);
        for (j, row) in d.iter_mut().enumerate() {
            for (q, e) in row.iter_mut().enumerate() {
                *e = e.max((r[j] - s[q]).norm());
            }
        }
    }
    let root_dev = ripped.path_dev + bottleneck_assign(&d).0;
    if coeff_dev >= eps {
        return Ok(Err(format!("coefficient deviation {coeff_dev:.3e}")));
    }
    if root_dev >= eps {
        return Ok(Err(format!("root path deviation {root_dev:.3e}")));
    }
    Ok(Ok((coeff_dev, root_dev)))
}

/// Convex reduction check on the companion matrices of `q` and `r`.
///
/// The combination path checked is `f C_Q + g C_R`, whose subdiagonal is
/// `f + g`; pairings are reported as root pairings of the endpoints.
pub fn convex_reduction_poly(
    q: &MonicPoly,
    r: &MonicPoly,
    f: &RealFn,
    g: &RealFn,
    cfg: &TrackConfig,
) -> Result<ReductionReport> {
    if q.degree() != r.degree() {
        return Err(Error::DimensionMismatch {
            expected: q.degree(),
            found: r.degree(),
        });
    }
    let mut rep = convex_reduction_check(&companion(q), &companion(r), f, g, cfg)?;
    rep.notes
        .push("eigenpairings of companion matrices are root pairings of Q and R".into());
    Ok(rep)
}
