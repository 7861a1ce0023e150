//! Shape operator, principal frame and related pointwise quantities.

use nalgebra::{Matrix2, Vector2};

use super::tunnel::{ParametricTunnel, Uv, Vec3};
use crate::error::{Result, TunnelError};
use crate::linalg::sym2_eigen;

/// Principal curvature gap below which a point counts as umbilic.
pub const UMBILIC_GAP: f64 = 1e-8;

const SIGN_TOL: f64 = 1e-10;

/// Pointwise geometry of the tunnel surface at one chart point.
///
/// Tangent vectors are handled either as 3-D vectors or as coordinates in
/// the orthonormal tangent basis `(e1, e2)`, with `e1 × e2 = normal`.
#[derive(Debug, Clone)]
pub struct ShapeFrame {
    pub uv: Uv,
    pub point: Vec3,
    pub du: Vec3,
    pub dv: Vec3,
    /// Orthonormal tangent basis, `e1 = ∂u / |∂u|`.
    pub basis: [Vec3; 2],
    /// Unit normal pointing into the tunnel.
    pub normal: Vec3,
    /// Shape operator in the `(e1, e2)` basis (symmetric).
    pub shape: Matrix2<f64>,
    pub kappa_minus: f64,
    pub kappa_plus: f64,
    pub e_minus: Vec3,
    pub e_plus: Vec3,
    /// Unit tangent to the meridian through this point.
    pub tau: Vec3,
    /// Surface gradient of the basic coordinate.
    pub grad_b: Vec3,
}

/// Remembers the last principal directions so that successive queries keep
/// a consistent sign instead of the canonical one.
#[derive(Debug, Clone, Default)]
pub struct FrameContinuity {
    e_minus: Option<Vec3>,
    e_plus: Option<Vec3>,
    tau: Option<Vec3>,
}

impl FrameContinuity {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }
}

/// Flips `v` so that its first significant component is positive.
pub fn canonical_sign(v: Vec3) -> Vec3 {
    let scale = v.amax().max(f64::MIN_POSITIVE);
    for c in v.iter() {
        if c.abs() > SIGN_TOL * scale {
            return if *c < 0.0 { -v } else { v };
        }
    }
    v
}

fn align(v: Vec3, prev: Option<Vec3>) -> Vec3 {
    match prev {
        Some(p) if v.dot(&p) < 0.0 => -v,
        Some(_) => v,
        None => canonical_sign(v),
    }
}

impl ShapeFrame {
    /// Coordinates of a 3-D vector in the tangent basis (normal part dropped).
    pub fn to_local(&self, v: &Vec3) -> Vector2<f64> {
        Vector2::new(v.dot(&self.basis[0]), v.dot(&self.basis[1]))
    }

    pub fn from_local(&self, c: &Vector2<f64>) -> Vec3 {
        self.basis[0] * c.x + self.basis[1] * c.y
    }

    /// Removes the normal component.
    pub fn project_tangent(&self, v: &Vec3) -> Vec3 {
        v - self.normal * v.dot(&self.normal)
    }

    /// Shape operator applied to the tangential part of `v`.
    pub fn apply_shape(&self, v: &Vec3) -> Vec3 {
        self.from_local(&(self.shape * self.to_local(v)))
    }

    /// `II(v, w)` for tangent vectors given as 3-D vectors.
    pub fn second_form(&self, v: &Vec3, w: &Vec3) -> f64 {
        self.to_local(v).dot(&(self.shape * self.to_local(w)))
    }

    /// Normal curvature extended to all of space:
    /// `κ₋⟨v, E₋⟩² + κ₊⟨v, E₊⟩²`.
    pub fn curvature_form(&self, v: &Vec3) -> f64 {
        let a = v.dot(&self.e_minus);
        let b = v.dot(&self.e_plus);
        self.kappa_minus * a * a + self.kappa_plus * b * b
    }

    /// Unit tangent `cos φ E₋ + sin φ E₊`.
    pub fn principal_direction(&self, phi: f64) -> Vec3 {
        let (s, c) = phi.sin_cos();
        self.e_minus * c + self.e_plus * s
    }

    fn check_tangent(&self, v: &Vec3) -> Result<()> {
        let nc = v.dot(&self.normal);
        if nc.abs() > 1e-9 * v.norm().max(1.0) {
            return Err(TunnelError::NotTangent {
                normal_component: nc,
            });
        }
        Ok(())
    }
}

/// Principal frame at `uv`, with canonical signs for the directions.
pub fn surface_frame(tunnel: &ParametricTunnel, uv: &Uv) -> Result<ShapeFrame> {
    build_frame(tunnel, uv, None)
}

/// Principal frame whose direction signs follow the previous call on the
/// same context.
pub fn surface_frame_continuous(
    tunnel: &ParametricTunnel,
    uv: &Uv,
    ctx: &mut FrameContinuity,
) -> Result<ShapeFrame> {
    build_frame(tunnel, uv, Some(ctx))
}

fn build_frame(
    tunnel: &ParametricTunnel,
    uv: &Uv,
    ctx: Option<&mut FrameContinuity>,
) -> Result<ShapeFrame> {
    let jet = tunnel.jet(uv);
    let normal = tunnel
        .inward_normal(&jet)
        .ok_or(TunnelError::DegenerateChart { uv: *uv })?;

    let e1 = jet.du.normalize();
    let e2 = normal.cross(&e1);

    // Second fundamental form in chart coordinates.
    let h = Matrix2::new(
        jet.duu.dot(&normal),
        jet.duv.dot(&normal),
        jet.duv.dot(&normal),
        jet.dvv.dot(&normal),
    );
    let g = Matrix2::new(
        jet.du.dot(&jet.du),
        jet.du.dot(&jet.dv),
        jet.du.dot(&jet.dv),
        jet.dv.dot(&jet.dv),
    );
    let g_inv = g
        .try_inverse()
        .ok_or(TunnelError::DegenerateChart { uv: *uv })?;
    // Chart coordinates of e1, e2: c = g⁻¹ [⟨∂u, e⟩, ⟨∂v, e⟩].
    let coords = |e: &Vec3| g_inv * Vector2::new(jet.du.dot(e), jet.dv.dot(e));
    let c = Matrix2::from_columns(&[coords(&e1), coords(&e2)]);
    let mut shape = c.transpose() * h * c;
    let off = 0.5 * (shape[(0, 1)] + shape[(1, 0)]);
    shape[(0, 1)] = off;
    shape[(1, 0)] = off;

    let (k_minus, k_plus, v_minus, v_plus) = sym2_eigen(shape[(0, 0)], off, shape[(1, 1)]);
    if k_plus - k_minus < UMBILIC_GAP {
        return Err(TunnelError::UmbilicPoint {
            uv: *uv,
            gap: k_plus - k_minus,
        });
    }
    let raw_minus = e1 * v_minus.x + e2 * v_minus.y;
    let raw_plus = e1 * v_plus.x + e2 * v_plus.y;

    // B = v, so its gradient is g^{vu} ∂u + g^{vv} ∂v.
    let grad_b = jet.du * g_inv[(1, 0)] + jet.dv * g_inv[(1, 1)];
    if grad_b.norm() < 1e-12 {
        return Err(TunnelError::DegenerateProjection { uv: *uv });
    }

    let (e_minus, e_plus, tau) = match ctx {
        Some(ctx) => {
            let em = align(raw_minus, ctx.e_minus);
            let ep = align(raw_plus, ctx.e_plus);
            let t = align(e1, ctx.tau);
            ctx.e_minus = Some(em);
            ctx.e_plus = Some(ep);
            ctx.tau = Some(t);
            (em, ep, t)
        }
        None => (
            canonical_sign(raw_minus),
            canonical_sign(raw_plus),
            canonical_sign(e1),
        ),
    };

    Ok(ShapeFrame {
        uv: *uv,
        point: jet.point,
        du: jet.du,
        dv: jet.dv,
        basis: [e1, e2],
        normal,
        shape,
        kappa_minus: k_minus,
        kappa_plus: k_plus,
        e_minus,
        e_plus,
        tau,
        grad_b,
    })
}

/// `II(v, w)`; both vectors must be tangent at the frame point.
pub fn second_fundamental_form(frame: &ShapeFrame, v: &Vec3, w: &Vec3) -> Result<f64> {
    frame.check_tangent(v)?;
    frame.check_tangent(w)?;
    Ok(frame.second_form(v, w))
}

/// Unit meridian tangent; the sign follows `ctx` when given.
pub fn meridian_tangent(
    tunnel: &ParametricTunnel,
    uv: &Uv,
    ctx: Option<&mut FrameContinuity>,
) -> Result<Vec3> {
    Ok(build_frame(tunnel, uv, ctx)?.tau)
}

/// Ratio `sin∠(Qa, Qb) / sin∠(a, b)` for a symmetric positive-definite map
/// `q` of the tangent plane, with vectors given in the orthonormal basis.
pub fn sine_angle_scaling(q: &Matrix2<f64>, a: &Vector2<f64>, b: &Vector2<f64>) -> Result<f64> {
    let (least, _, _, _) = sym2_eigen(q[(0, 0)], 0.5 * (q[(0, 1)] + q[(1, 0)]), q[(1, 1)]);
    if !(least > 0.0) || (q[(0, 1)] - q[(1, 0)]).abs() > 1e-12 * q.norm() {
        return Err(TunnelError::NotPositiveDefinite { least });
    }
    let sine = |x: &Vector2<f64>, y: &Vector2<f64>| (x.x * y.y - x.y * y.x) / (x.norm() * y.norm());
    let s0 = sine(a, b);
    if !(s0.abs() > 1e-12) {
        return Err(TunnelError::CollinearInput { sine: s0 });
    }
    Ok(sine(&(q * a), &(q * b)) / s0)
}

/// Same as [`sine_angle_scaling`] for tangent 3-vectors at `frame`, with the
/// sine signed by the inward normal.
pub fn sine_angle_scaling_at(
    frame: &ShapeFrame,
    q: &Matrix2<f64>,
    a: &Vec3,
    b: &Vec3,
) -> Result<f64> {
    frame.check_tangent(a)?;
    frame.check_tangent(b)?;
    sine_angle_scaling(q, &frame.to_local(a), &frame.to_local(b))
}

/// Smallest and largest singular values of a 2×2 matrix.
pub fn singular_values(q: &Matrix2<f64>) -> (f64, f64) {
    let qtq = q.transpose() * q;
    let (lmin, lmax, _, _) = sym2_eigen(qtq[(0, 0)], qtq[(0, 1)], qtq[(1, 1)]);
    (lmin.max(0.0).sqrt(), lmax.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tunnel::PolynomialWarp;
    use std::f64::consts::PI;

    #[test]
    fn cylinder_frame() {
        let cyl = ParametricTunnel::cylinder(1.0, None).unwrap();
        let f = surface_frame(&cyl, &Uv::new(0.0, 0.0)).unwrap();
        assert!(f.kappa_minus.abs() < 1e-15);
        assert!((f.kappa_plus - 1.0).abs() < 1e-15);
        assert!((f.e_minus - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-15);
        assert!((f.e_plus - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
        assert!((f.tau - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
        assert!((f.grad_b - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn torus_curvatures_match_closed_form() {
        let (big, small) = (2.0, 0.5);
        let torus = ParametricTunnel::torus(big, small).unwrap();
        for &(u, v) in &[(0.0, 0.0), (1.0, 0.3), (PI, 2.0), (2.5, 5.0)] {
            let f = surface_frame(&torus, &Uv::new(u, v)).unwrap();
            let k_meridian = 1.0 / small;
            let k_parallel = u.cos() / (big + small * u.cos());
            assert!((f.kappa_plus - k_meridian).abs() < 1e-12);
            assert!((f.kappa_minus - k_parallel).abs() < 1e-12);
            // E₊ is the meridian direction.
            assert!(f.e_plus.dot(&f.tau).abs() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn continuity_keeps_signs() {
        let torus = ParametricTunnel::torus(2.0, 0.5).unwrap();
        let mut ctx = FrameContinuity::new();
        let mut prev: Option<ShapeFrame> = None;
        for k in 0..200 {
            let uv = Uv::new(0.03 * k as f64, 0.02 * k as f64);
            let f = surface_frame_continuous(&torus, &uv, &mut ctx).unwrap();
            if let Some(p) = &prev {
                assert!(f.e_minus.dot(&p.e_minus) > 0.9);
                assert!(f.e_plus.dot(&p.e_plus) > 0.9);
            }
            prev = Some(f);
        }
    }

    #[test]
    fn sff_rejects_normal_vectors() {
        let cyl = ParametricTunnel::cylinder(1.0, None).unwrap();
        let f = surface_frame(&cyl, &Uv::new(0.0, 0.0)).unwrap();
        assert!(matches!(
            second_fundamental_form(&f, &f.normal, &f.tau),
            Err(TunnelError::NotTangent { .. })
        ));
        assert!((second_fundamental_form(&f, &f.tau, &f.tau).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_like_revolution_is_umbilic() {
        // ρ(v) = sqrt(1 - v²) is not polynomial, but ρ = 1 - v²/2 at v = 0
        // has κ_meridian = 1 = κ_parallel.
        let rev = ParametricTunnel::revolution(vec![1.0, 0.0, -0.5], -0.5, 0.5).unwrap();
        assert!(matches!(
            surface_frame(&rev, &Uv::new(0.3, 0.0)),
            Err(TunnelError::UmbilicPoint { .. })
        ));
    }

    #[test]
    fn warped_frame_is_consistent() {
        let mut quad = [[[0.0; 3]; 3]; 3];
        quad[0][2][2] = 0.02;
        let w = PolynomialWarp::new([[0.05, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]], quad);
        let t =
            ParametricTunnel::warped(ParametricTunnel::cylinder(1.0, None).unwrap(), w).unwrap();
        let f = surface_frame(&t, &Uv::new(0.7, 0.4)).unwrap();
        assert!(f.e_minus.dot(&f.e_plus).abs() < 1e-14);
        assert!(f.e_minus.dot(&f.normal).abs() < 1e-14);
        assert!(f.tau.dot(&f.grad_b).abs() < 1e-14);
        // Shape operator reproduces the principal curvatures.
        assert!((f.second_form(&f.e_minus, &f.e_minus) - f.kappa_minus).abs() < 1e-12);
    }

    #[test]
    fn sine_scaling_worked_example() {
        let q = Matrix2::new(1.0, 0.0, 0.0, 3.0);
        let a = Vector2::new(1.0, 0.0);
        let b = Vector2::new(1.0, 1.0) / 2f64.sqrt();
        let ratio = sine_angle_scaling(&q, &a, &b).unwrap();
        let expected = (3.0 / 10f64.sqrt()) / (1.0 / 2f64.sqrt());
        assert!((ratio - expected).abs() < 1e-14);
        assert!((ratio - 1.34164).abs() < 1e-5);
        assert!((sine_angle_scaling(&Matrix2::identity(), &a, &b).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            sine_angle_scaling(&q, &a, &(a * 2.0)),
            Err(TunnelError::CollinearInput { .. })
        ));
        assert!(matches!(
            sine_angle_scaling(&Matrix2::new(1.0, 0.0, 0.0, -1.0), &a, &b),
            Err(TunnelError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn sine_scaling_on_frame() {
        let torus = ParametricTunnel::torus(2.0, 0.5).unwrap();
        let f = surface_frame(&torus, &Uv::new(0.0, 0.0)).unwrap();
        let q = Matrix2::new(2.0, 0.3, 0.3, 1.0);
        let r = sine_angle_scaling_at(&f, &q, &f.e_minus, &f.e_plus).unwrap();
        assert!(r > 0.0);
        assert!(sine_angle_scaling_at(&f, &q, &f.normal, &f.e_plus).is_err());
    }
}
