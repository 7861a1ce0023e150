use std::f64::consts::TAU;

use nalgebra::{Matrix2, Vector2};
use proptest::prelude::*;
use tunnelnav_core::geometry::{sine_angle_scaling_at, surface_frame_continuous};
use tunnelnav_core::offset::{offset_point, project_local};
use tunnelnav_core::*;

fn warped_torus() -> ParametricTunnel {
    let mut lin = [[0.0; 3]; 3];
    lin[2][0] = 0.06;
    let mut quad = [[[0.0; 3]; 3]; 3];
    quad[0][2][2] = 0.08;
    quad[2][0][1] = 0.02;
    ParametricTunnel::warped(
        ParametricTunnel::torus(2.0, 0.5).unwrap(),
        PolynomialWarp::new(lin, quad),
    )
    .unwrap()
}

fn fixtures() -> Vec<(&'static str, ParametricTunnel)> {
    vec![
        ("cylinder", ParametricTunnel::cylinder(1.0, None).unwrap()),
        ("torus", ParametricTunnel::torus(2.0, 0.5).unwrap()),
        (
            "revolution",
            ParametricTunnel::revolution(vec![1.0, 0.0, 0.05], -2.0, 2.0).unwrap(),
        ),
        ("warped torus", warped_torus()),
    ]
}

fn inner_v(t: &ParametricTunnel, s: f64) -> f64 {
    let (lo, hi) = t.v_range();
    let m = if t.is_open() || !t.v_periodic() {
        0.2 * (hi - lo)
    } else {
        0.0
    };
    lo + m + s * (hi - lo - 2.0 * m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The shape operator agrees with the finite-difference derivative of
    /// the inward normal: `S v = −D_v N`.
    #[test]
    fn shape_operator_matches_normal_derivative(
        idx in 0usize..4, u in 0.0..TAU, s in 0.0..1.0f64, a in -1.0..1.0f64, b in -1.0..1.0f64,
    ) {
        prop_assume!(a.abs() + b.abs() > 0.1);
        let (_, t) = &fixtures()[idx];
        let uv = Uv::new(u, inner_v(t, s));
        let f = surface_frame(t, &uv).unwrap();
        let w = Uv::new(a, b);
        let v = f.du * a + f.dv * b;
        let h = 1e-5;
        let n = |p: Uv| t.inward_normal(&t.jet(&p)).unwrap();
        let dn = (n(uv + w * h) - n(uv - w * h)) / (2.0 * h);
        let err = (f.apply_shape(&v) + dn).norm();
        prop_assert!(err <= 1e-6 * (1.0 + v.norm()), "err {err}");
    }

    /// Principal pairs are eigenpairs of an orthonormal tangent frame.
    #[test]
    fn principal_frame_is_an_eigenbasis(idx in 0usize..4, u in 0.0..TAU, s in 0.0..1.0f64) {
        let (_, t) = &fixtures()[idx];
        let f = surface_frame(t, &Uv::new(u, inner_v(t, s))).unwrap();
        prop_assert!(f.kappa_minus < f.kappa_plus);
        for (k, e) in [(f.kappa_minus, f.e_minus), (f.kappa_plus, f.e_plus)] {
            prop_assert!((e.norm() - 1.0).abs() < 1e-12);
            prop_assert!(e.dot(&f.normal).abs() < 1e-12);
            prop_assert!((f.apply_shape(&e) - e * k).norm() < 1e-10);
        }
        prop_assert!(f.e_minus.dot(&f.e_plus).abs() < 1e-12);
        // Normal curvatures stay between the principal values.
        let c = f.curvature_form(&(f.e_minus + f.e_plus * 0.3));
        prop_assert!(c >= f.kappa_minus - 1e-12 && c <= f.kappa_plus + 1e-12);
    }

    /// Sign-continuous frames never flip between nearby queries.
    #[test]
    fn continuous_frames_do_not_flip(idx in 0usize..4, u in 0.0..TAU, s in 0.0..1.0f64, du in -1e-3..1e-3f64) {
        let (_, t) = &fixtures()[idx];
        let mut ctx = FrameContinuity::new();
        let v = inner_v(t, s);
        let mut prev = surface_frame_continuous(t, &Uv::new(u, v), &mut ctx).unwrap();
        for k in 1..20 {
            let f = surface_frame_continuous(t, &Uv::new(u + du * k as f64, v), &mut ctx).unwrap();
            prop_assert!(f.e_minus.dot(&prev.e_minus) > 0.9);
            prop_assert!(f.tau.dot(&prev.tau) > 0.9);
            prev = f;
        }
    }

    /// Sine scaling of a symmetric positive operator stays within the ratio
    /// of its singular values and is exactly 1 on its eigenbasis.
    #[test]
    fn sine_scaling_bounds(q1 in 0.1..10.0f64, q2 in 0.1..10.0f64, rot in 0.0..TAU, a in 0.0..TAU, b in 0.0..TAU) {
        let (s, c) = rot.sin_cos();
        let r = Matrix2::new(c, -s, s, c);
        let q = r * Matrix2::new(q1, 0.0, 0.0, q2) * r.transpose();
        let va = Vector2::new(a.cos(), a.sin());
        let vb = Vector2::new(b.cos(), b.sin());
        prop_assume!((va.x * vb.y - va.y * vb.x).abs() > 1e-6);
        let z = sine_angle_scaling(&q, &va, &vb).unwrap();
        let (lo, hi) = (q1.min(q2), q1.max(q2));
        prop_assert!(z >= lo / hi - 1e-9 && z <= hi / lo + 1e-9);
        let e1 = r.column(0).into_owned();
        let e2 = r.column(1).into_owned();
        prop_assert!((sine_angle_scaling(&q, &e1, &e2).unwrap() - 1.0).abs() < 1e-12);
    }

    /// Offset points project back to their generating foot.
    #[test]
    fn offset_roundtrip(idx in 0usize..4, u in 0.0..TAU, s in 0.0..1.0f64, frac in 0.01..0.95f64) {
        let (_, t) = &fixtures()[idx];
        let zone = OperationalZone { d_minus: 0.05, d_plus: 0.35, d_star: 0.2, delta_s: 0.0 };
        let uv = Uv::new(u, inner_v(t, s));
        let d = frac * zone.d_plus;
        let r = offset_point(t, &zone, d, &uv).unwrap();
        let f = project(t, &r, &ProjectionConfig::default()).unwrap();
        prop_assert!((f.distance - d).abs() < 1e-8);
        prop_assert!((f.foot_point - t.chart(&uv)).norm() < 1e-7);
        let local = project_local(t, &r, &(uv + Uv::new(0.01, 0.01))).unwrap();
        prop_assert!((local.signed_distance - d).abs() < 1e-8);
    }
}

#[test]
fn projection_matches_dense_oracle() {
    let oracle = ProjectionConfig {
        oracle: true,
        ..ProjectionConfig::default()
    };
    for (name, t) in fixtures() {
        for k in 0..12 {
            let uv = Uv::new(
                0.37 + TAU * k as f64 / 12.0,
                inner_v(&t, (k as f64 * 0.29) % 1.0),
            );
            let f = surface_frame(&t, &uv).unwrap();
            let r = f.point + f.normal * 0.3 + f.e_minus * 0.01;
            let fast = project(&t, &r, &ProjectionConfig::default()).unwrap();
            let slow = project(&t, &r, &oracle).unwrap();
            assert!((fast.distance - slow.distance).abs() < 1e-9, "{name}");
            assert!((fast.foot_point - slow.foot_point).norm() < 1e-7, "{name}");
        }
    }
}

#[test]
fn sine_scaling_in_tangent_coordinates() {
    let t = ParametricTunnel::torus(2.0, 0.5).unwrap();
    let f = surface_frame(&t, &Uv::new(0.4, 1.0)).unwrap();
    let q = Matrix2::new(1.0, 0.0, 0.0, 2.0);
    let a = f.basis[0];
    let b = f.basis[0] + f.basis[1];
    let z = sine_angle_scaling_at(&f, &q, &a, &b).unwrap();
    assert!((z - 2.0 / 5f64.sqrt() * 2f64.sqrt()).abs() < 1e-12, "{z}");
}

#[test]
fn narrow_band_fails_the_audit() {
    let t = ParametricTunnel::torus(2.0, 0.5).unwrap();
    let zone = OperationalZone {
        d_minus: 0.1,
        d_plus: 0.6,
        d_star: 0.25,
        delta_s: 0.0,
    };
    let rep = regularity_audit(&t, &AuditConfig::new(16, zone));
    assert!(!rep.passed());
    assert!(rep.failures.iter().all(|m| !m.is_empty()));
}
