use crate::config::TrackConfig;
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::path::MatrixPath;
use crate::spectra::eigenvalues;

use super::rip::perturb_any;

/// Path from `a` to `b`, within `eps` of the segment, whose eigenvalues never
/// collide. Collisions of the segment are located by tracking and removed with
/// random bumps; without collisions the segment itself is returned.
pub fn detour(a: &CMatrix, b: &CMatrix, eps: f64, cfg: &TrackConfig, seed: u64) -> Result<MatrixPath> {
    for (m, name) in [(a, "A"), (b, "B")] {
        if eigenvalues(m)?.min_gap() <= cfg.collision_tol {
            return Err(Error::Defective(format!("{name} has repeated eigenvalues")));
        }
    }
    let path = MatrixPath::convex(a.clone(), b.clone());
    path.validate()?;
    Ok(perturb_any(&path, eps, cfg, seed)?.new_path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{sup_distance, uniform_grid, PathEval};
    use crate::tracker::track;

    #[test]
    fn crossing_segment_is_detoured() {
        let a = CMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]);
        let b = CMatrix::from_real(2, &[-1.0, 0.0, 0.0, 1.0]);
        let cfg = TrackConfig::default();
        let p = detour(&a, &b, 0.1, &cfg, 3).unwrap();
        assert!(track(&p, &cfg).unwrap().report.is_empty());
        assert!(p.eval(0.0).unwrap().dist_max(&a) < 1e-12);
        assert!(p.eval(1.0).unwrap().dist_max(&b) < 1e-12);
        assert!(sup_distance(&p, &MatrixPath::convex(a, b), &uniform_grid(2000)).unwrap() < 0.1);
    }

    #[test]
    fn repeated_endpoint_is_rejected() {
        let cfg = TrackConfig::default();
        let a = CMatrix::identity(2);
        let b = CMatrix::from_real(2, &[1.0, 0.0, 0.0, 2.0]);
        assert!(matches!(detour(&a, &b, 0.1, &cfg, 0), Err(Error::Defective(_))));
    }
}
