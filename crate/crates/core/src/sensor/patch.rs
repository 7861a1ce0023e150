//! The surface near a foot point as a graph over its tangent plane.

use nalgebra::Vector2;

use crate::error::{Result, TunnelError};
use crate::geometry::{surface_frame, ParametricTunnel, ShapeFrame, Uv, Vec3};
use crate::offset::project_local;

/// Height `g` such that `p + g·N(c)` lies on the surface, for `p` in the
/// tangent plane at the frame point with `‖p − c‖ ≤ η`.
///
/// The root closest to the plane is taken; positive heights point along the
/// inward normal.
pub fn patch_height_at(
    tunnel: &ParametricTunnel,
    frame: &ShapeFrame,
    p: &Vec3,
    eta: f64,
) -> Result<f64> {
    let radial = frame.project_tangent(&(p - frame.point)).norm();
    if radial > eta * (1.0 + 1e-9) {
        return Err(TunnelError::PatchEscape { eta });
    }
    let n = frame.normal;
    let indicator = |t: f64, uv: &Uv| -> Result<(f64, Uv)> {
        let foot = project_local(tunnel, &(p + n * t), uv)?;
        Ok((foot.signed_distance, foot.uv))
    };
    let (f0, uv0) = indicator(0.0, &frame.uv)?;
    if f0 == 0.0 {
        return Ok(0.0);
    }
    const STEPS: usize = 64;
    let h = eta / STEPS as f64;
    let mut up = (0.0, f0, uv0);
    let mut down = (0.0, f0, uv0);
    for k in 1..=STEPS {
        let t = h * k as f64;
        for (side, sign) in [(&mut up, 1.0), (&mut down, -1.0)] {
            let (f, uv) = indicator(sign * t, &side.2)?;
            if (f > 0.0) != (side.1 > 0.0) {
                let (a, fa, uva) = *side;
                return refine_root(&indicator, (a, fa, uva), (sign * t, f));
            }
            *side = (sign * t, f, uv);
        }
    }
    Err(TunnelError::PatchEscape { eta })
}

fn refine_root<F>(indicator: &F, a: (f64, f64, Uv), b: (f64, f64)) -> Result<f64>
where
    F: Fn(f64, &Uv) -> Result<(f64, Uv)>,
{
    let (mut ta, mut fa, mut uv) = a;
    let (mut tb, mut fb) = b;
    for _ in 0..200 {
        if (tb - ta).abs() <= 1e-15 * (1.0 + ta.abs()) {
            break;
        }
        let m = 0.5 * (ta + tb);
        if m == ta || m == tb {
            break;
        }
        let (fm, uvm) = indicator(m, &uv)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm > 0.0) == (fa > 0.0) {
            ta = m;
            fa = fm;
            uv = uvm;
        } else {
            tb = m;
            fb = fm;
        }
    }
    Ok(if fa != fb {
        ta + fa / (fa - fb) * (tb - ta)
    } else {
        0.5 * (ta + tb)
    })
}

/// [`patch_height_at`] for a chart point.
pub fn patch_height(tunnel: &ParametricTunnel, c_uv: &Uv, p: &Vec3, eta: f64) -> Result<f64> {
    patch_height_at(tunnel, &surface_frame(tunnel, c_uv)?, p, eta)
}

/// Surface point `p + g(p)·N(c)` over the tangent point `p`.
pub fn patch_point(
    tunnel: &ParametricTunnel,
    frame: &ShapeFrame,
    p: &Vec3,
    eta: f64,
) -> Result<Vec3> {
    Ok(p + frame.normal * patch_height_at(tunnel, frame, p, eta)?)
}

/// Tangent-plane gradient of the height, by central differences with step
/// `h`, in the frame's orthonormal tangent basis.
pub fn patch_gradient(
    tunnel: &ParametricTunnel,
    frame: &ShapeFrame,
    p: &Vec3,
    eta: f64,
    h: f64,
) -> Result<Vector2<f64>> {
    let slack = eta + 2.0 * h;
    let mut g = Vector2::zeros();
    for k in 0..2 {
        let e = frame.basis[k] * h;
        let plus = patch_height_at(tunnel, frame, &(p + e), slack)?;
        let minus = patch_height_at(tunnel, frame, &(p - e), slack)?;
        g[k] = (plus - minus) / (2.0 * h);
    }
    Ok(g)
}

/// Remainder `g(p) − ½·II(p − c, p − c)` of the quadratic approximation.
pub fn quadratic_remainder(
    tunnel: &ParametricTunnel,
    c_uv: &Uv,
    p: &Vec3,
    eta: f64,
) -> Result<f64> {
    let frame = surface_frame(tunnel, c_uv)?;
    let g = patch_height_at(tunnel, &frame, p, eta)?;
    let dp = frame.project_tangent(&(p - frame.point));
    Ok(g - 0.5 * frame.second_form(&dp, &dp))
}

/// Solves `x = −g(c + (d + x sin²α)·tan α·e(φ)) / sin²α` by fixed-point
/// iteration from `x0`; iterates are kept inside the patch interval.
#[allow(clippy::too_many_arguments)]
pub fn solve_scaled_depth(
    tunnel: &ParametricTunnel,
    frame: &ShapeFrame,
    d: f64,
    alpha: f64,
    phi: f64,
    x0: f64,
    eta: f64,
    tol: f64,
) -> Result<f64> {
    let (lo, hi) = super::scan::depth_interval(d, alpha, eta);
    let s2 = alpha.sin().powi(2);
    let e = frame.principal_direction(phi);
    let lambda = |x: f64| -> Result<f64> {
        let p = frame.point + e * ((d + x * s2) * alpha.tan());
        Ok(-patch_height_at(tunnel, frame, &p, eta)? / s2)
    };
    let mut x = x0.clamp(lo, hi);
    for _ in 0..500 {
        let next = lambda(x)?.clamp(lo, hi);
        if (next - x).abs() <= tol * (1.0 + x.abs()) {
            return Ok(next);
        }
        x = next;
    }
    Err(TunnelError::NoConvergence("scaled depth fixed point"))
}
