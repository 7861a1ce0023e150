//! Analytic tunnel charts.
//!
//! Every built-in tunnel is parametrized so that `u` runs around the
//! meridians (always `2π`-periodic) and `v` is the basic coordinate: the
//! basis projection is `B(u, v) = v`, so meridians are the `u`-curves.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TunnelError};

pub type Vec3 = Vector3<f64>;
pub type Uv = Vector2<f64>;

/// The basis a tunnel projects onto.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisType {
    Line,
    Circle,
    Interval { lo: f64, hi: f64 },
}

/// Point and first/second partial derivatives of a chart.
#[derive(Debug, Clone, Copy)]
pub struct ChartJet {
    pub point: Vec3,
    pub du: Vec3,
    pub dv: Vec3,
    pub duu: Vec3,
    pub duv: Vec3,
    pub dvv: Vec3,
}

/// Quadratic polynomial map `W(x) = x + A x + (xᵀQ₀x, xᵀQ₁x, xᵀQ₂x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialWarp {
    linear: Matrix3<f64>,
    quadratic: [Matrix3<f64>; 3],
}

impl PolynomialWarp {
    pub fn identity() -> Self {
        Self {
            linear: Matrix3::zeros(),
            quadratic: [Matrix3::zeros(); 3],
        }
    }

    /// `linear[i][j]` is the coefficient of `x_j` in component `i`;
    /// `quadratic[i][j][k]` the coefficient of `x_j x_k` (symmetrized).
    pub fn new(linear: [[f64; 3]; 3], quadratic: [[[f64; 3]; 3]; 3]) -> Self {
        let lin = Matrix3::from_fn(|i, j| linear[i][j]);
        let quad = std::array::from_fn(|i| {
            let q = Matrix3::from_fn(|j, k| quadratic[i][j][k]);
            (q + q.transpose()) * 0.5
        });
        Self {
            linear: lin,
            quadratic: quad,
        }
    }

    pub fn linear(&self) -> [[f64; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.linear[(i, j)]))
    }

    pub fn quadratic(&self) -> [[[f64; 3]; 3]; 3] {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| std::array::from_fn(|k| self.quadratic[i][(j, k)]))
        })
    }

    pub fn apply(&self, x: &Vec3) -> Vec3 {
        let q = Vec3::from_fn(|i, _| x.dot(&(self.quadratic[i] * x)));
        x + self.linear * x + q
    }

    pub fn jacobian(&self, x: &Vec3) -> Matrix3<f64> {
        let mut jac = Matrix3::identity() + self.linear;
        for i in 0..3 {
            let row = (self.quadratic[i] * x) * 2.0;
            for j in 0..3 {
                jac[(i, j)] += row[j];
            }
        }
        jac
    }

    /// Second derivative `D²W[a, b]`.
    pub fn hessian_apply(&self, a: &Vec3, b: &Vec3) -> Vec3 {
        Vec3::from_fn(|i, _| 2.0 * a.dot(&(self.quadratic[i] * b)))
    }

    /// Approximate inverse by Newton iteration started at `y`.
    pub fn inverse(&self, y: &Vec3) -> Vec3 {
        let mut x = *y;
        for _ in 0..30 {
            let res = self.apply(&x) - y;
            if res.norm() < 1e-14 * (1.0 + y.norm()) {
                break;
            }
            match self.jacobian(&x).lu().solve(&res) {
                Some(dx) => x -= dx,
                None => break,
            }
        }
        x
    }
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)] // few instances; warps stay inline
pub enum TunnelKind {
    /// Right circular cylinder around the z axis; `length: None` is the
    /// infinite (line-basis) tunnel, otherwise `v ∈ [0, length]`.
    Cylinder { radius: f64, length: Option<f64> },
    /// Torus `((R + r cos u) cos v, (R + r cos u) sin v, r sin u)`.
    Torus { major: f64, minor: f64 },
    /// Surface of revolution about the z axis with polynomial radius
    /// profile `ρ(v) = Σ cₖ vᵏ`, `v ∈ [lo, hi]`.
    Revolution { profile: Vec<f64>, lo: f64, hi: f64 },
    /// A base tunnel pushed through a polynomial diffeomorphism.
    Warped {
        base: Box<ParametricTunnel>,
        warp: PolynomialWarp,
    },
}

/// A tunnel surface given by an analytic chart over `(u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricTunnel {
    kind: TunnelKind,
    /// `+1` when `∂u × ∂v` already points inside the tunnel.
    orientation: f64,
    /// Sampling window for the basic coordinate of line-basis tunnels.
    line_window: (f64, f64),
}

fn poly(c: &[f64], x: f64) -> (f64, f64, f64) {
    let (mut p, mut dp, mut ddp) = (0.0, 0.0, 0.0);
    for &a in c.iter().rev() {
        ddp = ddp * x + 2.0 * dp;
        dp = dp * x + p;
        p = p * x + a;
    }
    (p, dp, ddp)
}

impl ParametricTunnel {
    pub fn cylinder(radius: f64, length: Option<f64>) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(TunnelError::InvalidTunnel(format!(
                "cylinder radius must be positive, got {radius}"
            )));
        }
        if let Some(len) = length {
            if !(len > 0.0) {
                return Err(TunnelError::InvalidTunnel(format!(
                    "cylinder length must be positive, got {len}"
                )));
            }
        }
        Ok(Self {
            kind: TunnelKind::Cylinder { radius, length },
            orientation: -1.0,
            line_window: (-2.0 * radius, 2.0 * radius),
        })
    }

    pub fn torus(major: f64, minor: f64) -> Result<Self> {
        if !(minor > 0.0 && major > minor) {
            return Err(TunnelError::InvalidTunnel(format!(
                "torus needs R > r > 0, got R={major}, r={minor}"
            )));
        }
        Ok(Self {
            kind: TunnelKind::Torus { major, minor },
            orientation: 1.0,
            line_window: (0.0, TAU),
        })
    }

    pub fn revolution(profile: Vec<f64>, lo: f64, hi: f64) -> Result<Self> {
        if profile.is_empty() || !(hi > lo) {
            return Err(TunnelError::InvalidTunnel(
                "surface of revolution needs a profile and lo < hi".into(),
            ));
        }
        for k in 0..=256 {
            let v = lo + (hi - lo) * k as f64 / 256.0;
            let (rho, _, _) = poly(&profile, v);
            if !(rho > 0.0) {
                return Err(TunnelError::InvalidTunnel(format!(
                    "profile radius {rho} is not positive at v={v}"
                )));
            }
        }
        Ok(Self {
            kind: TunnelKind::Revolution { profile, lo, hi },
            orientation: -1.0,
            line_window: (lo, hi),
        })
    }

    pub fn warped(base: ParametricTunnel, warp: PolynomialWarp) -> Result<Self> {
        let orientation = base.orientation;
        let line_window = base.line_window;
        let tunnel = Self {
            kind: TunnelKind::Warped {
                base: Box::new(base),
                warp,
            },
            orientation,
            line_window,
        };
        // The warp has to preserve orientation on the sampled surface.
        if let TunnelKind::Warped { base, warp } = &tunnel.kind {
            let (v0, v1) = base.v_range();
            for i in 0..32 {
                for j in 0..=32 {
                    let uv = Uv::new(TAU * i as f64 / 32.0, v0 + (v1 - v0) * j as f64 / 32.0);
                    let det = warp.jacobian(&base.chart(&uv)).determinant();
                    if !(det > 0.0) {
                        return Err(TunnelError::InvalidTunnel(format!(
                            "warp Jacobian determinant {det} is not positive at (u,v)=({}, {})",
                            uv.x, uv.y
                        )));
                    }
                }
            }
        }
        Ok(tunnel)
    }

    /// Overrides the sampling window used for line-basis tunnels.
    pub fn with_line_window(mut self, lo: f64, hi: f64) -> Self {
        self.line_window = (lo, hi);
        if let TunnelKind::Warped { base, .. } = &mut self.kind {
            base.line_window = (lo, hi);
        }
        self
    }

    pub fn kind(&self) -> &TunnelKind {
        &self.kind
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    pub fn line_window(&self) -> (f64, f64) {
        self.line_window
    }

    pub fn basis(&self) -> BasisType {
        match &self.kind {
            TunnelKind::Cylinder { length: None, .. } => BasisType::Line,
            TunnelKind::Cylinder {
                length: Some(len), ..
            } => BasisType::Interval { lo: 0.0, hi: *len },
            TunnelKind::Torus { .. } => BasisType::Circle,
            TunnelKind::Revolution { lo, hi, .. } => BasisType::Interval { lo: *lo, hi: *hi },
            TunnelKind::Warped { base, .. } => base.basis(),
        }
    }

    pub fn is_open(&self) -> bool {
        matches!(self.basis(), BasisType::Interval { .. })
    }

    pub fn v_periodic(&self) -> bool {
        matches!(self.basis(), BasisType::Circle)
    }

    /// Domain of `v` used for sampling (audits, grid scans).
    pub fn v_range(&self) -> (f64, f64) {
        match self.basis() {
            BasisType::Line => self.line_window,
            BasisType::Circle => (0.0, TAU),
            BasisType::Interval { lo, hi } => (lo, hi),
        }
    }

    /// Basis projection in chart coordinates.
    pub fn basic_coordinate(&self, uv: &Uv) -> f64 {
        uv.y
    }

    /// Rough guess of the basic coordinate of the point nearest to `r`, used
    /// to centre grid scans on line-basis tunnels.
    pub fn v_hint(&self, r: &Vec3) -> f64 {
        match &self.kind {
            TunnelKind::Cylinder { .. } | TunnelKind::Revolution { .. } => r.z,
            TunnelKind::Torus { .. } => r.y.atan2(r.x).rem_euclid(TAU),
            TunnelKind::Warped { base, warp } => base.v_hint(&warp.inverse(r)),
        }
    }

    /// Smallest cross-section radius; sets the natural length scale.
    pub fn feature_size(&self) -> f64 {
        match &self.kind {
            TunnelKind::Cylinder { radius, .. } => *radius,
            TunnelKind::Torus { minor, .. } => *minor,
            TunnelKind::Revolution { profile, lo, hi } => (0..=256)
                .map(|k| poly(profile, lo + (hi - lo) * k as f64 / 256.0).0)
                .fold(f64::INFINITY, f64::min),
            TunnelKind::Warped { base, warp } => {
                let (v0, v1) = base.v_range();
                let mut sigma = f64::INFINITY;
                for i in 0..16 {
                    for j in 0..=16 {
                        let uv = Uv::new(TAU * i as f64 / 16.0, v0 + (v1 - v0) * j as f64 / 16.0);
                        let svd = warp.jacobian(&base.chart(&uv)).svd(false, false);
                        sigma = sigma.min(svd.singular_values.min());
                    }
                }
                base.feature_size() * sigma
            }
        }
    }

    /// Wraps periodic coordinates into their canonical ranges and clamps
    /// `v` on open tunnels.
    pub fn normalize_uv(&self, uv: &Uv) -> Uv {
        let u = uv.x.rem_euclid(TAU);
        let v = match self.basis() {
            BasisType::Circle => uv.y.rem_euclid(TAU),
            BasisType::Interval { lo, hi } => uv.y.clamp(lo, hi),
            BasisType::Line => uv.y,
        };
        Uv::new(u, v)
    }

    pub fn chart(&self, uv: &Uv) -> Vec3 {
        let (u, v) = (uv.x, uv.y);
        match &self.kind {
            TunnelKind::Cylinder { radius, .. } => Vec3::new(radius * u.cos(), radius * u.sin(), v),
            TunnelKind::Torus { major, minor } => {
                let w = major + minor * u.cos();
                Vec3::new(w * v.cos(), w * v.sin(), minor * u.sin())
            }
            TunnelKind::Revolution { profile, .. } => {
                let rho = poly(profile, v).0;
                Vec3::new(rho * u.cos(), rho * u.sin(), v)
            }
            TunnelKind::Warped { base, warp } => warp.apply(&base.chart(uv)),
        }
    }

    pub fn jet(&self, uv: &Uv) -> ChartJet {
        let (u, v) = (uv.x, uv.y);
        match &self.kind {
            TunnelKind::Cylinder { radius: r, .. } => {
                let (s, c) = u.sin_cos();
                ChartJet {
                    point: Vec3::new(r * c, r * s, v),
                    du: Vec3::new(-r * s, r * c, 0.0),
                    dv: Vec3::new(0.0, 0.0, 1.0),
                    duu: Vec3::new(-r * c, -r * s, 0.0),
                    duv: Vec3::zeros(),
                    dvv: Vec3::zeros(),
                }
            }
            TunnelKind::Torus { major, minor: r } => {
                let (su, cu) = u.sin_cos();
                let (sv, cv) = v.sin_cos();
                let w = major + r * cu;
                ChartJet {
                    point: Vec3::new(w * cv, w * sv, r * su),
                    du: Vec3::new(-r * su * cv, -r * su * sv, r * cu),
                    dv: Vec3::new(-w * sv, w * cv, 0.0),
                    duu: Vec3::new(-r * cu * cv, -r * cu * sv, -r * su),
                    duv: Vec3::new(r * su * sv, -r * su * cv, 0.0),
                    dvv: Vec3::new(-w * cv, -w * sv, 0.0),
                }
            }
            TunnelKind::Revolution { profile, .. } => {
                let (rho, drho, ddrho) = poly(profile, v);
                let (s, c) = u.sin_cos();
                ChartJet {
                    point: Vec3::new(rho * c, rho * s, v),
                    du: Vec3::new(-rho * s, rho * c, 0.0),
                    dv: Vec3::new(drho * c, drho * s, 1.0),
                    duu: Vec3::new(-rho * c, -rho * s, 0.0),
                    duv: Vec3::new(-drho * s, drho * c, 0.0),
                    dvv: Vec3::new(ddrho * c, ddrho * s, 0.0),
                }
            }
            TunnelKind::Warped { base, warp } => {
                let b = base.jet(uv);
                let jac = warp.jacobian(&b.point);
                ChartJet {
                    point: warp.apply(&b.point),
                    du: jac * b.du,
                    dv: jac * b.dv,
                    duu: jac * b.duu + warp.hessian_apply(&b.du, &b.du),
                    duv: jac * b.duv + warp.hessian_apply(&b.du, &b.dv),
                    dvv: jac * b.dvv + warp.hessian_apply(&b.dv, &b.dv),
                }
            }
        }
    }

    /// Unit normal pointing into the tunnel, or `None` on a degenerate chart.
    pub fn inward_normal(&self, jet: &ChartJet) -> Option<Vec3> {
        let n = jet.du.cross(&jet.dv);
        let len = n.norm();
        let scale = jet.du.norm() * jet.dv.norm();
        if !(len > 1e-12 * scale) || scale == 0.0 {
            return None;
        }
        Some(n * (self.orientation / len))
    }

    /// Boundary meridian values of an open tunnel.
    pub fn boundary_values(&self) -> Option<(f64, f64)> {
        match self.basis() {
            BasisType::Interval { lo, hi } => Some((lo, hi)),
            _ => None,
        }
    }

    /// Euclidean distance from a surface point to the edge `∂S`
    /// (`None` for closed tunnels).
    pub fn boundary_distance(&self, point: &Vec3) -> Option<f64> {
        let (lo, hi) = self.boundary_values()?;
        let to_meridian = |b: f64| {
            let f = |u: f64| (self.chart(&Uv::new(u, b)) - point).norm();
            let n = 64;
            let (mut best_u, mut best) = (0.0, f64::INFINITY);
            for k in 0..n {
                let u = TAU * k as f64 / n as f64;
                let val = f(u);
                if val < best {
                    best = val;
                    best_u = u;
                }
            }
            let h = TAU / n as f64;
            let (u, val) = crate::linalg::golden_section_min(f, best_u - h, best_u + h, 1e-10);
            let _ = u;
            val.min(best)
        };
        Some(to_meridian(lo).min(to_meridian(hi)))
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_pi(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(t: &ParametricTunnel, uv: Uv) {
        let h = 1e-5;
        let j = t.jet(&uv);
        let eu = Uv::new(h, 0.0);
        let ev = Uv::new(0.0, h);
        let du = (t.chart(&(uv + eu)) - t.chart(&(uv - eu))) / (2.0 * h);
        let dv = (t.chart(&(uv + ev)) - t.chart(&(uv - ev))) / (2.0 * h);
        assert!((du - j.du).norm() < 1e-8, "du mismatch");
        assert!((dv - j.dv).norm() < 1e-8, "dv mismatch");
        let duu = (t.jet(&(uv + eu)).du - t.jet(&(uv - eu)).du) / (2.0 * h);
        let duv = (t.jet(&(uv + ev)).du - t.jet(&(uv - ev)).du) / (2.0 * h);
        let dvv = (t.jet(&(uv + ev)).dv - t.jet(&(uv - ev)).dv) / (2.0 * h);
        assert!((duu - j.duu).norm() < 1e-7, "duu mismatch");
        assert!((duv - j.duv).norm() < 1e-7, "duv mismatch");
        assert!((dvv - j.dvv).norm() < 1e-7, "dvv mismatch");
    }

    fn sample_warp() -> PolynomialWarp {
        let mut quad = [[[0.0; 3]; 3]; 3];
        quad[0][2][2] = 0.02;
        quad[1][0][2] = 0.03;
        PolynomialWarp::new(
            [[0.05, 0.0, 0.01], [0.0, -0.03, 0.0], [0.02, 0.0, 0.0]],
            quad,
        )
    }

    #[test]
    fn jets_match_finite_differences() {
        let tunnels = [
            ParametricTunnel::cylinder(1.0, None).unwrap(),
            ParametricTunnel::torus(2.0, 0.5).unwrap(),
            ParametricTunnel::revolution(vec![1.0, 0.1, -0.02], -2.0, 2.0).unwrap(),
            ParametricTunnel::warped(
                ParametricTunnel::cylinder(1.0, Some(4.0)).unwrap(),
                sample_warp(),
            )
            .unwrap(),
        ];
        for t in &tunnels {
            for &(u, v) in &[(0.3, 0.7), (2.0, 1.1), (4.5, 0.2)] {
                fd_check(t, Uv::new(u, v));
            }
        }
    }

    #[test]
    fn inward_normals() {
        let cyl = ParametricTunnel::cylinder(1.0, None).unwrap();
        let n = cyl.inward_normal(&cyl.jet(&Uv::new(0.0, 0.0))).unwrap();
        assert!((n - Vec3::new(-1.0, 0.0, 0.0)).norm() < 1e-15);

        let torus = ParametricTunnel::torus(2.0, 0.5).unwrap();
        let n = torus.inward_normal(&torus.jet(&Uv::new(0.0, 0.0))).unwrap();
        assert!((n - Vec3::new(-1.0, 0.0, 0.0)).norm() < 1e-15);
        let n = torus.inward_normal(&torus.jet(&Uv::new(PI, 0.0))).unwrap();
        assert!((n - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-15);

        let rev = ParametricTunnel::revolution(vec![1.0], 0.0, 1.0).unwrap();
        let n = rev.inward_normal(&rev.jet(&Uv::new(0.0, 0.5))).unwrap();
        assert!((n - Vec3::new(-1.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn identity_warp_is_transparent() {
        let cyl = ParametricTunnel::cylinder(1.0, None).unwrap();
        let w = ParametricTunnel::warped(cyl.clone(), PolynomialWarp::identity()).unwrap();
        let uv = Uv::new(0.4, 1.3);
        assert!((w.chart(&uv) - cyl.chart(&uv)).norm() < 1e-15);
        assert_eq!(w.basis(), BasisType::Line);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(ParametricTunnel::torus(0.5, 1.0).is_err());
        assert!(ParametricTunnel::cylinder(-1.0, None).is_err());
        assert!(ParametricTunnel::revolution(vec![0.5, -1.0], 0.0, 1.0).is_err());
        let mut quad = [[[0.0; 3]; 3]; 3];
        quad[0][0][0] = -3.0;
        let folding = PolynomialWarp::new([[0.0; 3]; 3], quad);
        assert!(ParametricTunnel::warped(
            ParametricTunnel::cylinder(1.0, Some(1.0)).unwrap(),
            folding
        )
        .is_err());
    }

    #[test]
    fn warp_inverse_roundtrip() {
        let w = sample_warp();
        let x = Vec3::new(0.7, -0.4, 1.2);
        assert!((w.inverse(&w.apply(&x)) - x).norm() < 1e-12);
    }

    #[test]
    fn open_cylinder_boundary_distance() {
        let cyl = ParametricTunnel::cylinder(1.0, Some(10.0)).unwrap();
        let p = cyl.chart(&Uv::new(0.3, 9.85));
        assert!((cyl.boundary_distance(&p).unwrap() - 0.15).abs() < 1e-9);
        assert!(ParametricTunnel::torus(2.0, 0.5)
            .unwrap()
            .boundary_distance(&p)
            .is_none());
    }

    #[test]
    fn wrap_pi_range() {
        assert!((wrap_pi(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_pi(-PI) - PI).abs() < 1e-12);
        assert!((wrap_pi(0.5) - 0.5).abs() < 1e-15);
    }
}
