//! Cone scans around the direction to the nearest wall point.

use std::f64::consts::TAU;

use rayon::prelude::*;

use super::config::SensorConfig;
use super::ray::march;
use crate::error::{Result, TunnelError};
use crate::geometry::{surface_frame, ParametricTunnel, ShapeFrame, Vec3};
use crate::offset::{project, ProjectionResult};

/// Distances `d(α, φ)` sampled on a uniform `φ` grid.
#[derive(Debug, Clone)]
pub struct RayScan {
    pub alpha: f64,
    pub origin: Vec3,
    pub phis: Vec<f64>,
    /// `None` where the ray found no wall within range.
    pub distances: Vec<Option<f64>>,
    pub center: ProjectionResult,
    pub frame: ShapeFrame,
}

impl RayScan {
    /// Clearance `d` of the scan origin.
    pub fn clearance(&self) -> f64 {
        self.center.distance
    }

    /// Unit direction of the ray through `c + d·e(φ)·tan α`.
    pub fn ray_direction(&self, phi: f64) -> Vec3 {
        ray_direction(&self.frame, self.alpha, phi)
    }

    /// Casts a single extra ray of this scan.
    pub fn cast(
        &self,
        tunnel: &ParametricTunnel,
        phi: f64,
        cfg: &SensorConfig,
    ) -> Result<Option<f64>> {
        cast(tunnel, &self.origin, &self.frame, self.alpha, phi, cfg)
    }

    pub fn missing(&self) -> usize {
        self.distances.iter().filter(|d| d.is_none()).count()
    }
}

pub(crate) fn ray_direction(frame: &ShapeFrame, alpha: f64, phi: f64) -> Vec3 {
    (frame.principal_direction(phi) * alpha.tan() - frame.normal).normalize()
}

fn cast(
    tunnel: &ParametricTunnel,
    origin: &Vec3,
    frame: &ShapeFrame,
    alpha: f64,
    phi: f64,
    cfg: &SensorConfig,
) -> Result<Option<f64>> {
    match march(
        tunnel,
        origin,
        &ray_direction(frame, alpha, phi),
        &frame.uv,
        cfg,
    ) {
        Ok(t) => Ok(Some(t)),
        Err(TunnelError::NoHit { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Projects `r` and scans the cone of half-angle `alpha` around the
/// direction to the foot.
pub fn scan(
    tunnel: &ParametricTunnel,
    r: &Vec3,
    alpha: f64,
    cfg: &SensorConfig,
) -> Result<RayScan> {
    let center = project(tunnel, r, &cfg.projection)?;
    scan_at(tunnel, r, center, alpha, cfg)
}

/// Scan for a point whose projection is already known.
pub fn scan_at(
    tunnel: &ParametricTunnel,
    r: &Vec3,
    center: ProjectionResult,
    alpha: f64,
    cfg: &SensorConfig,
) -> Result<RayScan> {
    if !(alpha > 0.0 && alpha <= cfg.alpha_s) {
        return Err(TunnelError::InvalidConfig(format!(
            "scan angle {alpha} outside (0, {}]",
            cfg.alpha_s
        )));
    }
    let frame = surface_frame(tunnel, &center.foot_uv)?;
    let n = cfg.n_phi;
    let phis: Vec<f64> = (0..n).map(|k| TAU * k as f64 / n as f64).collect();
    let distances = phis
        .par_iter()
        .map(|&phi| cast(tunnel, r, &frame, alpha, phi, cfg))
        .collect::<Result<Vec<_>>>()?;
    let missing = distances.iter().filter(|d| d.is_none()).count();
    if missing as f64 > cfg.max_missing_fraction * n as f64 {
        return Err(TunnelError::ScanRejected { missing, total: n });
    }
    Ok(RayScan {
        alpha,
        origin: *r,
        phis,
        distances,
        center,
        frame,
    })
}

/// One sample of the scaled depth profile.
#[derive(Debug, Clone, Copy)]
pub struct DepthSample {
    pub phi: f64,
    /// `NaN` for missing rays.
    pub x: f64,
    /// Whether the hit lies over the tangent disk of radius `η`.
    pub in_patch: bool,
}

/// `x = (d(α,φ)·cos α − d) / sin²α`.
pub fn scaled_depth(d: f64, alpha: f64, distance: f64) -> f64 {
    (distance * alpha.cos() - d) / alpha.sin().powi(2)
}

/// Admissible range of the scaled depth for hits over the patch disk.
pub fn depth_interval(d: f64, alpha: f64, eta: f64) -> (f64, f64) {
    let s2 = alpha.sin().powi(2);
    let w = eta * alpha.cos() / (s2 * alpha.sin());
    (-w - d / s2, w - d / s2)
}

pub fn scaled_depth_profile(scan: &RayScan, eta: f64) -> Vec<DepthSample> {
    let d = scan.clearance();
    let (lo, hi) = depth_interval(d, scan.alpha, eta);
    scan.phis
        .iter()
        .zip(&scan.distances)
        .map(|(&phi, dist)| match dist {
            Some(t) => {
                let x = scaled_depth(d, scan.alpha, *t);
                DepthSample {
                    phi,
                    x,
                    in_patch: x >= lo && x <= hi,
                }
            }
            None => DepthSample {
                phi,
                x: f64::NAN,
                in_patch: false,
            },
        })
        .collect()
}

/// Small-angle limit `−d²(κ₋cos²φ + κ₊sin²φ)/2` of the scaled depth.
pub fn limit_depth(frame: &ShapeFrame, d: f64, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    -d * d * (frame.kappa_minus * c * c + frame.kappa_plus * s * s) / 2.0
}
