//! Regularity and Lipschitz certificates sampled over a chart grid.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use super::frame::{surface_frame_continuous, FrameContinuity, ShapeFrame};
use super::tunnel::{ParametricTunnel, Uv, Vec3};
use crate::error::{Result, TunnelError};

/// Clearance band the robot is supposed to stay in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationalZone {
    pub d_minus: f64,
    pub d_plus: f64,
    pub d_star: f64,
    /// Width of the boundary vicinity on open tunnels.
    pub delta_s: f64,
}

impl OperationalZone {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.d_minus && self.d_minus < self.d_star && self.d_star < self.d_plus) {
            return Err(TunnelError::InvalidConfig(format!(
                "operational zone needs 0 < d_minus < d_star < d_plus, got {} / {} / {}",
                self.d_minus, self.d_star, self.d_plus
            )));
        }
        if !(self.delta_s >= 0.0) {
            return Err(TunnelError::InvalidConfig(
                "delta_s must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// Lower end of the offset range used for audits (`-d_minus / 2`).
    pub fn epsilon(&self) -> f64 {
        0.5 * self.d_minus
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditConfig {
    /// Samples per chart axis.
    pub grid: usize,
    pub zone: OperationalZone,
    /// Inflation applied to sampled difference quotients.
    pub safety: f64,
}

impl AuditConfig {
    pub fn new(grid: usize, zone: OperationalZone) -> Self {
        Self {
            grid,
            zone,
            safety: 1.25,
        }
    }
}

/// Sampled constants of a tunnel, in the units of its chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunnelConstants {
    pub delta_tau: f64,
    pub delta_kappa: f64,
    pub theta_min: f64,
    pub l_n: f64,
    pub l_kappa: f64,
    pub l_e: f64,
    pub l_b: f64,
    pub delta_b_minus: f64,
    pub delta_b_plus: f64,
    pub l_tau: f64,
    pub d_minus: f64,
    pub d_plus: f64,
    pub d_star: f64,
    pub delta_s: f64,
    /// Radius of the tangent-plane disk on which the surface is a graph.
    pub patch_radius: f64,
}

impl TunnelConstants {
    pub fn zone(&self) -> OperationalZone {
        OperationalZone {
            d_minus: self.d_minus,
            d_plus: self.d_plus,
            d_star: self.d_star,
            delta_s: self.delta_s,
        }
    }

    /// Lower bound on the angle between the minimal principal line and the
    /// meridian: `asin √(Δτ / 2L_N)`.
    pub fn discrepancy_floor(&self) -> f64 {
        (self.delta_tau / (2.0 * self.l_n))
            .clamp(0.0, 1.0)
            .sqrt()
            .asin()
    }

    /// Ordered `(name, value)` pairs for reports.
    pub fn entries(&self) -> [(&'static str, f64); 15] {
        [
            ("delta_tau", self.delta_tau),
            ("delta_kappa", self.delta_kappa),
            ("theta_min", self.theta_min),
            ("L_N", self.l_n),
            ("L_kappa", self.l_kappa),
            ("L_E", self.l_e),
            ("L_B", self.l_b),
            ("delta_B_minus", self.delta_b_minus),
            ("delta_B_plus", self.delta_b_plus),
            ("L_tau", self.l_tau),
            ("d_minus", self.d_minus),
            ("d_plus", self.d_plus),
            ("d_star", self.d_star),
            ("delta_s", self.delta_s),
            ("eta", self.patch_radius),
        ]
    }
}

/// Per-point quantities recorded by the audit.
#[derive(Debug, Clone)]
pub struct AuditSample {
    pub uv: Uv,
    pub point: Vec3,
    pub kappa_minus: f64,
    pub kappa_plus: f64,
    /// `II(τ, τ)`.
    pub meridian_curvature: f64,
    /// Angle between the minimal principal line and the meridian.
    pub theta: f64,
    pub shape_norm: f64,
}

#[derive(Debug, Clone)]
pub struct AuditReport {
    pub constants: TunnelConstants,
    pub samples: Vec<AuditSample>,
    /// Human-readable descriptions of violated conditions; empty on success.
    pub failures: Vec<String>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Chart points of an `n × n` audit grid; `u` and periodic `v` exclude the
/// right endpoint, interval and line bases include both ends.
pub fn audit_grid(tunnel: &ParametricTunnel, n: usize) -> (Vec<Uv>, usize, usize) {
    let nu = n.max(2);
    let nv = n.max(2);
    let (v0, v1) = tunnel.v_range();
    let periodic = tunnel.v_periodic();
    let mut pts = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = TAU * i as f64 / nu as f64;
        for j in 0..nv {
            let t = if periodic {
                j as f64 / nv as f64
            } else {
                j as f64 / (nv - 1) as f64
            };
            pts.push(Uv::new(u, v0 + (v1 - v0) * t));
        }
    }
    (pts, nu, nv)
}

fn offset_tangent(frame: &ShapeFrame, d: f64) -> Vec3 {
    (frame.tau - frame.apply_shape(&frame.tau) * d).normalize()
}

/// Samples the tunnel on a grid and estimates the regularity constants.
///
/// Lipschitz constants are maximal difference quotients between grid
/// neighbours, inflated by `cfg.safety`; they are estimates from below
/// before that inflation.
pub fn regularity_audit(tunnel: &ParametricTunnel, cfg: &AuditConfig) -> AuditReport {
    let zone = cfg.zone;
    let mut failures = Vec::new();
    if let Err(e) = zone.validate() {
        failures.push(e.to_string());
    }

    let (grid, nu, nv) = audit_grid(tunnel, cfg.grid);
    let periodic_v = tunnel.v_periodic();

    // Frames with signs kept continuous along each u-row.
    let mut frames: Vec<Option<ShapeFrame>> = Vec::with_capacity(grid.len());
    let mut ctx = FrameContinuity::new();
    for (k, uv) in grid.iter().enumerate() {
        if k % nv == 0 {
            ctx.reset();
        }
        match surface_frame_continuous(tunnel, uv, &mut ctx) {
            Ok(f) => frames.push(Some(f)),
            Err(e) => {
                failures.push(format!("frame failed: {e}"));
                frames.push(None);
            }
        }
    }

    let mut delta_tau = f64::INFINITY;
    let mut delta_kappa = f64::INFINITY;
    let mut theta_min = FRAC_PI_2;
    let mut max_kappa: f64 = 0.0;
    let mut db_min = f64::INFINITY;
    let mut db_max: f64 = 0.0;
    let mut samples = Vec::with_capacity(grid.len());

    for f in frames.iter().flatten() {
        let kt = f.second_form(&f.tau, &f.tau);
        let gap = kt - f.kappa_minus;
        if gap < delta_tau {
            delta_tau = gap;
        }
        if gap <= 0.0 {
            failures.push(format!(
                "meridian curvature gap violated at (u,v)=({}, {}): II(tau,tau) - kappa_minus = {gap:e}",
                f.uv.x, f.uv.y
            ));
        }
        let margin = 1.0 - zone.d_plus * f.kappa_plus;
        delta_kappa = delta_kappa.min(margin);
        if margin <= 0.0 {
            failures.push(format!(
                "offset curvature margin violated at (u,v)=({}, {}): 1 - d_plus*kappa_plus = {margin:e}",
                f.uv.x, f.uv.y
            ));
        }
        let theta = f.e_minus.dot(&f.tau).abs().min(1.0).acos();
        theta_min = theta_min.min(theta);
        let shape_norm = f.kappa_minus.abs().max(f.kappa_plus.abs());
        max_kappa = max_kappa.max(shape_norm);
        let gb = f.grad_b.norm();
        db_min = db_min.min(gb);
        db_max = db_max.max(gb);
        samples.push(AuditSample {
            uv: f.uv,
            point: f.point,
            kappa_minus: f.kappa_minus,
            kappa_plus: f.kappa_plus,
            meridian_curvature: kt,
            theta,
            shape_norm,
        });
    }

    // Difference quotients over grid-neighbour pairs.
    let (mut q_n, mut q_k, mut q_e, mut q_b, mut q_t): (f64, f64, f64, f64, f64) =
        (0.0, 0.0, 0.0, 0.0, 0.0);
    let idx = |i: usize, j: usize| i * nv + j;
    let mut pairs = Vec::new();
    for i in 0..nu {
        for j in 0..nv {
            pairs.push((idx(i, j), idx((i + 1) % nu, j)));
            if j + 1 < nv {
                pairs.push((idx(i, j), idx(i, j + 1)));
            } else if periodic_v {
                pairs.push((idx(i, j), idx(i, 0)));
            }
        }
    }
    for (a, b) in pairs {
        let (Some(fa), Some(fb)) = (&frames[a], &frames[b]) else {
            continue;
        };
        let dist = (fa.point - fb.point).norm();
        if !(dist > 1e-14) {
            continue;
        }
        let flip = |x: &Vec3, y: &Vec3| if x.dot(y) < 0.0 { -y } else { *y };
        q_n = q_n.max((fa.normal - fb.normal).norm() / dist);
        q_k = q_k.max(
            (fa.kappa_minus - fb.kappa_minus)
                .abs()
                .max((fa.kappa_plus - fb.kappa_plus).abs())
                / dist,
        );
        q_e = q_e.max(
            (fa.e_minus - flip(&fa.e_minus, &fb.e_minus))
                .norm()
                .max((fa.e_plus - flip(&fa.e_plus, &fb.e_plus)).norm())
                / dist,
        );
        q_b = q_b.max((fa.grad_b - fb.grad_b).norm() / dist);
        let ta = offset_tangent(fa, zone.d_star);
        let tb = offset_tangent(fb, zone.d_star);
        let pa = fa.point + fa.normal * zone.d_star;
        let pb = fb.point + fb.normal * zone.d_star;
        let od = (pa - pb).norm();
        if od > 1e-14 {
            q_t = q_t.max((ta - flip(&ta, &tb)).norm() / od);
        }
    }

    let s = cfg.safety;
    // The normal's Lipschitz constant bounds the shape operator norm too, so
    // it may not be smaller than the largest sampled curvature.
    let l_n = s * q_n.max(max_kappa);
    if samples.is_empty() {
        failures.push("no valid audit samples".into());
    }
    if delta_tau.is_finite() && delta_tau > 2.0 * l_n {
        failures.push(format!(
            "meridian curvature gap {delta_tau} exceeds 2 L_N = {}",
            2.0 * l_n
        ));
    }
    let feature = tunnel.feature_size();
    let patch_radius = 0.5 * (1.0 / l_n.max(f64::MIN_POSITIVE)).min(feature);

    AuditReport {
        constants: TunnelConstants {
            delta_tau,
            delta_kappa,
            theta_min,
            l_n,
            l_kappa: s * q_k,
            l_e: s * q_e,
            l_b: s * q_b,
            delta_b_minus: db_min,
            delta_b_plus: db_max,
            l_tau: s * q_t,
            d_minus: zone.d_minus,
            d_plus: zone.d_plus,
            d_star: zone.d_star,
            delta_s: zone.delta_s,
            patch_radius,
        },
        samples,
        failures,
    }
}
