use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tracking parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackConfig {
    /// Largest accepted per-step motion of a tracked path.
    pub eps_resolution: f64,
    /// Eigenvalues closer than this are one collision cluster.
    pub collision_tol: f64,
    /// Bisection depth cap below the initial grid.
    pub max_depth: usize,
    /// Number of intervals in the initial uniform grid.
    pub grid_init: usize,
    /// Relative eigenvalue tolerance; absolute tolerance is `tol_eig_rel (1 + ‖C‖₂)`.
    pub tol_eig_rel: f64,
    /// Fraction of the local cluster separation allowed as midpoint prediction error.
    pub prediction_ratio: f64,
    /// Radius used to classify ambiguities; `None` means ten times the final local step.
    pub probe_radius: Option<f64>,
    /// Upper bound on enumerated pairings.
    pub pairing_cap: usize,
    /// Dimension cap for characteristic polynomials.
    pub char_poly_cap: usize,
    /// Condition number cap for similarity transforms and window diagonalization.
    pub cond_cap: f64,
}

impl Default for TrackConfig {
    fn default() -> Self {
        TrackConfig {
            eps_resolution: 0.02,
            collision_tol: 1e-7,
            max_depth: 48,
            grid_init: 64,
            tol_eig_rel: 1e-9,
            prediction_ratio: 0.25,
            probe_radius: None,
            pairing_cap: 10_000,
            char_poly_cap: 64,
            cond_cap: 1e10,
        }
    }
}

impl TrackConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_resolution > 0.0 && self.eps_resolution.is_finite()) {
            return Err(Error::invalid("eps_resolution must be positive"));
        }
        if !(self.collision_tol > 0.0 && self.collision_tol.is_finite()) {
            return Err(Error::invalid("collision_tol must be positive"));
        }
        if self.grid_init == 0 {
            return Err(Error::invalid("grid_init must be at least 1"));
        }
        if !(self.tol_eig_rel > 0.0) {
            return Err(Error::invalid("tol_eig_rel must be positive"));
        }
        if !(self.prediction_ratio > 0.0 && self.prediction_ratio < 1.0) {
            return Err(Error::invalid("prediction_ratio must lie in (0, 1)"));
        }
        if let Some(r) = self.probe_radius {
            if !(r > 0.0) {
                return Err(Error::invalid("probe_radius must be positive"));
            }
        }
        Ok(())
    }

    /// Applies a JSON object of overrides on top of `self`.
    pub fn with_overrides(&self, json: &serde_json::Value) -> Result<Self> {
        let mut base = serde_json::to_value(self).expect("config serializes");
        let (Some(obj), Some(over)) = (base.as_object_mut(), json.as_object()) else {
            return Err(Error::Parse("config overrides must be a JSON object".into()));
        };
        for (k, v) in over {
            obj.insert(k.clone(), v.clone());
        }
        let cfg: TrackConfig = serde_json::from_value(base)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn tol_eig(&self, scale: f64) -> f64 {
        self.tol_eig_rel * (1.0 + scale)
    }
}
