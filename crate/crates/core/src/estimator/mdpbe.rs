//! Direction estimate from the most distant points of a cone scan.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use super::maxima::periodic_maxima;
use crate::error::{Result, TunnelError};
use crate::geometry::{surface_frame, ParametricTunnel, ShapeFrame, Vec3};
use crate::offset::{project, ProjectionResult};
use crate::sensor::{scan_at, RayScan, SensorConfig};

#[derive(Debug, Clone)]
pub struct DirectionEstimate {
    /// Refined maxima of the distance profile, in `[0, 2π)`.
    pub maxima_phis: Vec<f64>,
    /// Maximum nearest to `0` (in `(−π, π]`) when well posed.
    pub phi_zero: Option<f64>,
    /// The other maximum (in `[0, 2π)`) when well posed.
    pub phi_pi: Option<f64>,
    /// Mean wrapped angle, in `(−π/2, π/2]`.
    pub phi_star: f64,
    /// Unit direction of the estimated line, tangent at the foot.
    pub line_dir: Vec3,
    /// Exactly two maxima were found.
    pub well_posed: bool,
    /// Wrapped maxima straddle the `±π/2` seam, so the mean is unreliable.
    pub wrap_ambiguous: bool,
    pub alpha: f64,
    pub foot: ProjectionResult,
    pub frame: ShapeFrame,
}

/// Shifts an angle by a multiple of `π` into `(−π/2, π/2]`.
pub fn wrap_half_open(phi: f64) -> f64 {
    let w = (phi + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2;
    if w <= -FRAC_PI_2 {
        w + PI
    } else {
        w
    }
}

/// Maxima of the scan's distance profile, refined by re-casting rays.
pub fn find_local_maxima(
    tunnel: &ParametricTunnel,
    scan: &RayScan,
    cfg: &SensorConfig,
) -> Result<Vec<f64>> {
    periodic_maxima(
        &scan.phis,
        &scan.distances,
        |phi| scan.cast(tunnel, phi, cfg).ok().flatten(),
        cfg.root_tol,
    )
}

/// Projects `r` and runs the estimator at angle `cfg.alpha_e`.
pub fn mdpbe(tunnel: &ParametricTunnel, r: &Vec3, cfg: &SensorConfig) -> Result<DirectionEstimate> {
    let foot = match project(tunnel, r, &cfg.projection) {
        Err(TunnelError::ProjectionOnBoundary { .. }) => {
            return Err(TunnelError::ActiveZoneViolation)
        }
        other => other?,
    };
    mdpbe_at(tunnel, r, foot, cfg)
}

/// Estimator for a point whose projection is already known.
pub fn mdpbe_at(
    tunnel: &ParametricTunnel,
    r: &Vec3,
    foot: ProjectionResult,
    cfg: &SensorConfig,
) -> Result<DirectionEstimate> {
    let scan = scan_at(tunnel, r, foot, cfg.alpha_e, cfg)?;
    let maxima = find_local_maxima(tunnel, &scan, cfg)?;
    let count = maxima.len();
    let well_posed = count == 2;
    if count == 0 || (cfg.strict && !well_posed) {
        return Err(TunnelError::WellPosednessViolation { count });
    }

    let wrapped: Vec<f64> = maxima.iter().map(|&p| wrap_half_open(p)).collect();
    let mean = wrapped.iter().sum::<f64>() / count as f64;
    let spread = wrapped.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - wrapped.iter().cloned().fold(f64::INFINITY, f64::min);
    let wrap_ambiguous = spread > FRAC_PI_2;
    let phi_star = wrap_half_open(mean);

    let (phi_zero, phi_pi) = if well_posed {
        let signed = |p: f64| crate::geometry::wrap_pi(p);
        let (a, b) = (maxima[0], maxima[1]);
        if signed(a).abs() <= signed(b).abs() {
            (Some(signed(a)), Some(b.rem_euclid(TAU)))
        } else {
            (Some(signed(b)), Some(a.rem_euclid(TAU)))
        }
    } else {
        (None, None)
    };

    let line_dir = scan.frame.principal_direction(phi_star);
    Ok(DirectionEstimate {
        maxima_phis: maxima,
        phi_zero,
        phi_pi,
        phi_star,
        line_dir,
        well_posed,
        wrap_ambiguous,
        alpha: scan.alpha,
        foot: scan.center,
        frame: scan.frame,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactnessReport {
    /// Angle between the estimated line and the minimal principal line.
    pub angle: f64,
    pub alpha_e: f64,
    /// Whether the angle stays below the principal-line/meridian floor.
    pub useful: Option<bool>,
}

/// Angle between two lines, in `[0, π/2]`.
pub fn line_angle(a: &Vec3, b: &Vec3) -> f64 {
    let c = (a.dot(b) / (a.norm() * b.norm())).abs().min(1.0);
    // acos loses precision near 1; use the cross product there.
    let s = (a.cross(b).norm() / (a.norm() * b.norm())).min(1.0);
    s.atan2(c)
}

/// Compares the estimate with the minimal principal direction at its foot.
/// `floor` is the audited lower bound on the principal-line/meridian angle.
pub fn exactness(
    tunnel: &ParametricTunnel,
    est: &DirectionEstimate,
    floor: Option<f64>,
) -> Result<ExactnessReport> {
    let frame = surface_frame(tunnel, &est.foot.foot_uv)?;
    let angle = line_angle(&est.line_dir, &frame.e_minus);
    Ok(ExactnessReport {
        angle,
        alpha_e: est.alpha,
        useful: floor.map(|f| angle < f),
    })
}
