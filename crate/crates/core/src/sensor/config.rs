use std::f64::consts::FRAC_PI_2;

use crate::error::{Result, TunnelError};
use crate::geometry::TunnelConstants;
use crate::offset::ProjectionConfig;

/// Cone-range sensor and estimator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorConfig {
    /// Largest cone half-angle the sensor can look at.
    pub alpha_s: f64,
    /// Cone half-angle used by the direction estimator.
    pub alpha_e: f64,
    pub n_phi: usize,
    pub max_range: f64,
    pub ray_march_step: f64,
    pub root_tol: f64,
    pub patch_radius_eta: f64,
    /// Fail on anything but exactly two profile maxima.
    pub strict: bool,
    /// Scans with a larger share of missing rays are rejected.
    pub max_missing_fraction: f64,
    pub projection: ProjectionConfig,
}

impl SensorConfig {
    /// Defaults derived from audited constants.
    pub fn for_constants(c: &TunnelConstants) -> Self {
        Self {
            alpha_s: 0.4,
            alpha_e: 0.1,
            n_phi: 256,
            max_range: 4.0 * c.d_plus,
            ray_march_step: (c.d_minus / 5.0).min(0.01),
            root_tol: 1e-12,
            patch_radius_eta: c.patch_radius,
            strict: true,
            max_missing_fraction: 0.1,
            projection: ProjectionConfig {
                delta_s: Some(c.delta_s),
                ..ProjectionConfig::default()
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(TunnelError::InvalidConfig(m.to_string()));
        if !(0.0 < self.alpha_e && self.alpha_e <= self.alpha_s && self.alpha_s < FRAC_PI_2) {
            return bad("sensor needs 0 < alpha_e <= alpha_s < pi/2");
        }
        if self.n_phi < 16 {
            return bad("sensor needs n_phi >= 16");
        }
        if !(self.max_range > 0.0
            && self.ray_march_step > 0.0
            && self.root_tol > 0.0
            && self.patch_radius_eta > 0.0)
        {
            return bad("sensor ranges and tolerances must be positive");
        }
        if !(0.0..=1.0).contains(&self.max_missing_fraction) {
            return bad("max_missing_fraction must lie in [0, 1]");
        }
        Ok(())
    }

    /// Copy with a different estimator angle.
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha_e = alpha;
        if alpha > self.alpha_s {
            self.alpha_s = alpha;
        }
        self
    }
}
