//! The normal offset map and the offset surface at the desired clearance.

use crate::error::{Result, TunnelError};
use crate::geometry::{
    audit_grid, surface_frame, OperationalZone, ParametricTunnel, ShapeFrame, Uv, Vec3,
};

/// `s + d·N(s)`, for `d` in `(-ε, d_plus)` with `ε = d_minus / 2`.
pub fn offset_point(
    tunnel: &ParametricTunnel,
    zone: &OperationalZone,
    d: f64,
    uv: &Uv,
) -> Result<Vec3> {
    let min = -zone.epsilon();
    if !(d > min && d < zone.d_plus) {
        return Err(TunnelError::OffsetOutOfRange {
            d,
            min,
            max: zone.d_plus,
        });
    }
    let jet = tunnel.jet(uv);
    let n = tunnel
        .inward_normal(&jet)
        .ok_or(TunnelError::DegenerateChart { uv: *uv })?;
    Ok(jet.point + n * d)
}

/// Frame of the offset surface at the image of a base chart point.
#[derive(Debug, Clone)]
pub struct OffsetFrame {
    pub uv: Uv,
    pub point: Vec3,
    /// Unit normal; equals the base normal and points away from the wall.
    pub normal: Vec3,
    /// Unit tangent to the offset meridian.
    pub tau: Vec3,
    /// Images of the chart tangents under the offset map.
    pub tangent_basis: [Vec3; 2],
    pub base: ShapeFrame,
}

/// The offset surface `J(S)`, `J(s) = s + d*·N(s)`.
#[derive(Debug, Clone, Copy)]
pub struct OffsetSurface<'a> {
    pub base: &'a ParametricTunnel,
    pub d_star: f64,
}

/// Norms `‖J′‖` and `‖(J′)⁻¹‖` of `J′ = Id − d·S` at a base frame.
pub fn jacobian_norms(frame: &ShapeFrame, d: f64) -> (f64, f64) {
    let a = 1.0 - d * frame.kappa_minus;
    let b = 1.0 - d * frame.kappa_plus;
    (a.abs().max(b.abs()), 1.0 / a.abs().min(b.abs()))
}

/// Result of checking the offset map over an audit grid.
#[derive(Debug, Clone)]
pub struct OffsetCertificate {
    /// Smallest distance between images of distinct grid points.
    pub min_separation: f64,
    pub max_jacobian_norm: f64,
    pub max_inverse_norm: f64,
    /// Least eigenvalue of `Id − d·S` over the grid and `d ∈ [0, d_plus]`.
    pub least_eigenvalue: f64,
    /// Largest `|⟨τ*, N*⟩|`.
    pub tangency_residual: f64,
}

impl<'a> OffsetSurface<'a> {
    pub fn new(base: &'a ParametricTunnel, d_star: f64) -> Result<Self> {
        if !(d_star > 0.0) {
            return Err(TunnelError::InvalidConfig(format!(
                "offset clearance must be positive, got {d_star}"
            )));
        }
        Ok(Self { base, d_star })
    }

    pub fn point(&self, uv: &Uv) -> Result<Vec3> {
        let jet = self.base.jet(uv);
        let n = self
            .base
            .inward_normal(&jet)
            .ok_or(TunnelError::DegenerateChart { uv: *uv })?;
        Ok(jet.point + n * self.d_star)
    }

    pub fn frame(&self, uv: &Uv) -> Result<OffsetFrame> {
        let base = surface_frame(self.base, uv)?;
        Ok(self.frame_from(base))
    }

    pub fn frame_from(&self, base: ShapeFrame) -> OffsetFrame {
        let d = self.d_star;
        let jmap = |v: &Vec3| v - base.apply_shape(v) * d;
        let ju = jmap(&base.du);
        let jv = jmap(&base.dv);
        let tau = jmap(&base.tau).normalize();
        OffsetFrame {
            uv: base.uv,
            point: base.point + base.normal * d,
            normal: base.normal,
            tau,
            tangent_basis: [ju, jv],
            base,
        }
    }

    /// Chart velocity `(u̇, v̇)` whose offset image is the tangent vector `v`.
    fn chart_velocity(&self, frame: &OffsetFrame, v: &Vec3) -> Result<Uv> {
        let [a, b] = &frame.tangent_basis;
        let g = nalgebra::Matrix2::new(a.dot(a), a.dot(b), a.dot(b), b.dot(b));
        g.lu()
            .solve(&Uv::new(a.dot(v), b.dot(v)))
            .ok_or(TunnelError::DegenerateChart { uv: frame.uv })
    }

    /// Covariant derivative `∇_v W` on the offset surface by central
    /// differences along the chart line with velocity `v`; `step` is in arc
    /// length.
    pub fn covariant_derivative<F>(&self, field: F, uv: &Uv, v: &Vec3, step: f64) -> Result<Vec3>
    where
        F: Fn(&Uv) -> Result<Vec3>,
    {
        if !(step >= 1e-12) {
            return Err(TunnelError::StepUnderflow(step));
        }
        let speed = v.norm();
        if speed == 0.0 {
            return Ok(Vec3::zeros());
        }
        let frame = self.frame(uv)?;
        let vel = self.chart_velocity(&frame, v)?;
        let h = step / speed;
        let plus = field(&(uv + vel * h))?;
        let minus = field(&(uv - vel * h))?;
        let d = (plus - minus) / (2.0 * h);
        Ok(d - frame.normal * d.dot(&frame.normal))
    }

    /// Discrepancy between the two sides of the angle-rate identity for
    /// fields `V`, `W` along a chart motion, both sides by finite
    /// differences with the given step.
    pub fn angle_rate_residual<M, FV, FW>(
        &self,
        motion: M,
        field_v: FV,
        field_w: FW,
        t: f64,
        step: f64,
    ) -> Result<f64>
    where
        M: Fn(f64) -> Uv,
        FV: Fn(&Uv) -> Result<Vec3>,
        FW: Fn(&Uv) -> Result<Vec3>,
    {
        if !(step >= 1e-12) {
            return Err(TunnelError::StepUnderflow(step));
        }
        let angle = |s: f64| -> Result<f64> {
            let uv = motion(s);
            let n = self.frame(&uv)?.normal;
            let a = field_v(&uv)?;
            let b = field_w(&uv)?;
            Ok(n.dot(&a.cross(&b)).atan2(a.dot(&b)))
        };
        let uv = motion(t);
        let frame = self.frame(&uv)?;
        let n = frame.normal;
        let vv = field_v(&uv)?;
        let ww = field_w(&uv)?;
        let (lv, lw) = (vv.norm(), ww.norm());
        if lv < 1e-12 || lw < 1e-12 {
            return Err(TunnelError::VanishingField);
        }
        let phi = angle(t)?;
        let dphi = crate::geometry::wrap_pi(angle(t + step)? - angle(t - step)?) / (2.0 * step);
        let lhs = dphi * phi.cos();

        let rdot = (self.point(&motion(t + step))? - self.point(&motion(t - step))?) / (2.0 * step);
        let dv = self.covariant_derivative(&field_v, &uv, &rdot, step * rdot.norm().max(1e-300))?;
        let dw = self.covariant_derivative(&field_w, &uv, &rdot, step * rdot.norm().max(1e-300))?;
        let perp = |d: Vec3, x: &Vec3| d - x * (d.dot(x) / x.norm_squared());
        let rot_w = ww.cross(&n);
        let rot_v = vv.cross(&n);
        let rhs = (perp(dv, &vv).dot(&rot_w) - perp(dw, &ww).dot(&rot_v)) / (lv * lw);
        Ok((lhs - rhs).abs())
    }

    /// Checks injectivity and the operator-norm bounds of the offset map on
    /// an `n × n` audit grid.
    pub fn certify(&self, n: usize, d_plus: f64) -> Result<OffsetCertificate> {
        let (grid, _, _) = audit_grid(self.base, n);
        let mut images = Vec::with_capacity(grid.len());
        let mut max_j: f64 = 0.0;
        let mut max_inv: f64 = 0.0;
        let mut least = f64::INFINITY;
        let mut tang: f64 = 0.0;
        for uv in &grid {
            let f = self.frame(uv)?;
            let (jn, inv) = jacobian_norms(&f.base, self.d_star);
            max_j = max_j.max(jn);
            max_inv = max_inv.max(inv);
            // Eigenvalues of Id − d·S are affine in d; check the endpoints.
            for d in [0.0, d_plus] {
                least = least
                    .min(1.0 - d * f.base.kappa_minus)
                    .min(1.0 - d * f.base.kappa_plus);
            }
            tang = tang.max(f.tau.dot(&f.normal).abs());
            images.push(f.point);
        }
        let mut sep = f64::INFINITY;
        for i in 0..images.len() {
            for j in (i + 1)..images.len() {
                sep = sep.min((images[i] - images[j]).norm());
            }
        }
        Ok(OffsetCertificate {
            min_separation: sep,
            max_jacobian_norm: max_j,
            max_inverse_norm: max_inv,
            least_eigenvalue: least,
            tangency_residual: tang,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn zone() -> OperationalZone {
        OperationalZone {
            d_minus: 0.1,
            d_plus: 0.4,
            d_star: 0.25,
            delta_s: 0.0,
        }
    }

    #[test]
    fn offset_points() {
        let cyl = ParametricTunnel::cylinder(1.0, None).unwrap();
        let p = offset_point(&cyl, &zone(), 0.25, &Uv::new(0.0, 0.0)).unwrap();
        assert!((p - Vec3::new(0.75, 0.0, 0.0)).norm() < 1e-15);
        let torus = ParametricTunnel::torus(2.0, 0.5).unwrap();
        let p = offset_point(&torus, &zone(), 0.3, &Uv::new(0.0, 0.0)).unwrap();
        assert!((p - Vec3::new(2.2, 0.0, 0.0)).norm() < 1e-15);
        assert!(matches!(
            offset_point(&torus, &zone(), 0.4, &Uv::new(0.0, 0.0)),
            Err(TunnelError::OffsetOutOfRange { .. })
        ));
    }

    #[test]
    fn torus_offset_tangent_stretch() {
        let torus = ParametricTunnel::torus(2.0, 0.5).unwrap();
        let os = OffsetSurface::new(&torus, 0.3).unwrap();
        let f = os.frame(&Uv::new(0.0, 0.0)).unwrap();
        let stretched = f.base.tau - f.base.apply_shape(&f.base.tau) * 0.3;
        assert!((stretched.norm() - 0.4).abs() < 1e-12);
        assert!(f.tau.dot(&f.base.tau).abs() > 1.0 - 1e-12);
        assert!(f.tau.dot(&f.normal).abs() < 1e-12);
    }

    #[test]
    fn cylinder_circles_are_geodesics() {
        let cyl = ParametricTunnel::cylinder(1.0, None).unwrap();
        let os = OffsetSurface::new(&cyl, 0.25).unwrap();
        let uv = Uv::new(0.7, 0.3);
        let tau = |uv: &Uv| Ok(os.frame(uv)?.tau);
        let t = tau(&uv).unwrap();
        let d = os.covariant_derivative(tau, &uv, &t, 1e-5).unwrap();
        assert!(d.norm() < 1e-8);
        assert!(matches!(
            os.covariant_derivative(|_: &Uv| Ok(Vec3::zeros()), &uv, &t, 1e-13),
            Err(TunnelError::StepUnderflow(_))
        ));
    }

    #[test]
    fn angle_rate_trivial_cases() {
        let torus = ParametricTunnel::torus(2.0, 0.5).unwrap();
        let os = OffsetSurface::new(&torus, 0.25).unwrap();
        let motion = |t: f64| Uv::new(0.3 + 0.7 * t, 1.0 - 0.4 * t);
        let tau = |uv: &Uv| Ok(os.frame(uv)?.tau);
        let res = os.angle_rate_residual(motion, tau, tau, 0.2, 1e-5).unwrap();
        assert!(res < 1e-6);
        let rot = |uv: &Uv| {
            let f = os.frame(uv)?;
            Ok(f.normal.cross(&f.tau))
        };
        let res = os.angle_rate_residual(motion, tau, rot, 0.2, 1e-5).unwrap();
        assert!(res < 1e-4);
        let _ = FRAC_PI_2;
    }

    #[test]
    fn torus_certificate() {
        let torus = ParametricTunnel::torus(2.0, 0.5).unwrap();
        let os = OffsetSurface::new(&torus, 0.25).unwrap();
        let c = os.certify(16, 0.4).unwrap();
        assert!(c.min_separation > 1e-9);
        assert!((c.least_eigenvalue - 0.2).abs() < 1e-12);
        assert!(c.max_jacobian_norm <= 1.0 + 0.25 * 2.5);
        assert!(c.max_inverse_norm <= 1.0 / 0.2);
        assert!(c.tangency_residual < 1e-12);
    }
}
