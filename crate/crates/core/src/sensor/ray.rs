//! First-hit ray casting against a chart surface.

use super::config::SensorConfig;
use crate::error::{Result, TunnelError};
use crate::geometry::{ParametricTunnel, Uv, Vec3};
use crate::offset::{project, project_local, ProjectionConfig};

/// Distance along `dir` from an interior `origin` to the first wall hit.
pub fn ray_distance(
    tunnel: &ParametricTunnel,
    origin: &Vec3,
    dir: &Vec3,
    cfg: &SensorConfig,
) -> Result<f64> {
    let pcfg = ProjectionConfig {
        delta_s: None,
        ..cfg.projection
    };
    let foot = match project(tunnel, origin, &pcfg) {
        Ok(p) => p.foot_uv,
        // Any foot will do as a warm start on a tie.
        Err(TunnelError::NonUniqueProjection { .. }) => {
            crate::offset::dense_scan(tunnel, origin, pcfg.grid).0
        }
        Err(e) => return Err(e),
    };
    march(tunnel, origin, &dir.normalize(), &foot, cfg)
}

/// Marches along the ray with a fixed stride on the inside/outside sign,
/// then bisects the bracketing step down to `root_tol`.
pub(crate) fn march(
    tunnel: &ParametricTunnel,
    origin: &Vec3,
    dir: &Vec3,
    uv0: &Uv,
    cfg: &SensorConfig,
) -> Result<f64> {
    let start = project_local(tunnel, origin, uv0)?;
    if !(start.signed_distance > 0.0) {
        return Err(TunnelError::PointOnSurface);
    }
    let h = cfg.ray_march_step;
    let mut t_lo = 0.0;
    let mut f_lo = start.signed_distance;
    let mut uv_lo = start.uv;
    loop {
        let t_hi = t_lo + h;
        if t_lo > cfg.max_range {
            return Err(TunnelError::NoHit {
                max_range: cfg.max_range,
            });
        }
        let hi = project_local(tunnel, &(origin + dir * t_hi), &uv_lo)?;
        if hi.signed_distance <= 0.0 {
            return Ok(bisect(
                tunnel,
                origin,
                dir,
                (t_lo, f_lo, uv_lo),
                (t_hi, hi.signed_distance),
                cfg.root_tol,
            ));
        }
        t_lo = t_hi;
        f_lo = hi.signed_distance;
        uv_lo = hi.uv;
    }
}

fn bisect(
    tunnel: &ParametricTunnel,
    origin: &Vec3,
    dir: &Vec3,
    lo: (f64, f64, Uv),
    hi: (f64, f64),
    tol: f64,
) -> f64 {
    let (mut a, mut fa, mut uv) = lo;
    let (mut b, mut fb) = hi;
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        let Ok(foot) = project_local(tunnel, &(origin + dir * m), &uv) else {
            break;
        };
        if foot.signed_distance > 0.0 {
            a = m;
            fa = foot.signed_distance;
            uv = foot.uv;
        } else {
            b = m;
            fb = foot.signed_distance;
        }
    }
    if fa - fb > 0.0 {
        a + fa / (fa - fb) * (b - a)
    } else {
        0.5 * (a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::OperationalZone;
    use crate::geometry::{regularity_audit, AuditConfig};

    fn cfg(tunnel: &ParametricTunnel) -> SensorConfig {
        let zone = OperationalZone {
            d_minus: 0.1,
            d_plus: 0.8,
            d_star: 0.4,
            delta_s: 0.0,
        };
        SensorConfig::for_constants(&regularity_audit(tunnel, &AuditConfig::new(8, zone)).constants)
    }

    #[test]
    fn cylinder_rays() {
        let cyl = ParametricTunnel::cylinder(1.0, None).unwrap();
        let c = cfg(&cyl);
        let o = Vec3::new(0.5, 0.0, 0.0);
        let t = ray_distance(&cyl, &o, &Vec3::new(1.0, 0.0, 0.0), &c).unwrap();
        assert!((t - 0.5).abs() < 1e-11);
        let a: f64 = 0.2;
        let t = ray_distance(&cyl, &o, &Vec3::new(a.cos(), a.sin(), 0.0), &c).unwrap();
        // t² + t cos α − 0.75 = 0
        let exact = 0.5 * (-a.cos() + (a.cos().powi(2) + 3.0).sqrt());
        assert!((t - exact).abs() < 1e-11);
        assert!((t - 0.505021).abs() < 1e-6);
        assert!(matches!(
            ray_distance(&cyl, &o, &Vec3::new(0.0, 0.0, 1.0), &c),
            Err(TunnelError::NoHit { .. })
        ));
    }

    #[test]
    fn ray_from_outside_is_rejected() {
        let cyl = ParametricTunnel::cylinder(1.0, None).unwrap();
        let c = cfg(&cyl);
        assert!(ray_distance(
            &cyl,
            &Vec3::new(1.5, 0.0, 0.0),
            &Vec3::new(-1.0, 0.0, 0.0),
            &c
        )
        .is_err());
    }
}
