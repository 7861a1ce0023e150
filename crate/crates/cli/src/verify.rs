//! Seeded property suites run by `tunnelnav verify`.
//!
//! Each suite samples its cases from its own ChaCha stream, so results do
//! not depend on which other suites run or on thread scheduling.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use tunnelnav_core::offset::{offset_point, ProjectionConfig};
use tunnelnav_core::sensor::{
    depth_interval, limit_depth, patch_gradient, patch_height_at, patch_point, quadratic_remainder,
    scaled_depth_profile, scan_at, solve_scaled_depth,
};
use tunnelnav_core::{
    project, sine_angle_scaling, surface_frame, OffsetSurface, ParametricTunnel, Uv, Vec3,
};

use crate::scenario::Prepared;

pub const SUITES: &[&str] = &[
    "audit",
    "curvature",
    "lemma1",
    "lemma2",
    "lemma3",
    "lemma4",
    "lemma5",
    "lemma6",
    "corollary1",
    "remainder",
    "roots",
    "limit",
];

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
    /// Failures count whole suites, not individual cases.
    pub aggregate: bool,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn line(&self) -> String {
        match &self.first_failure {
            None => format!("{}: PASS ({} cases)", self.name, self.cases),
            Some(msg) if self.aggregate => {
                format!("{}: FAIL ({} cases): {}", self.name, self.cases, msg)
            }
            Some(msg) => format!(
                "{}: FAIL ({} of {} cases): {}",
                self.name, self.failures, self.cases, msg
            ),
        }
    }
}

fn outcome(name: &'static str, results: Vec<Option<String>>) -> SuiteOutcome {
    let cases = results.len();
    let failures = results.iter().filter(|r| r.is_some()).count();
    SuiteOutcome {
        name,
        cases,
        failures,
        first_failure: results.into_iter().flatten().next(),
        aggregate: false,
    }
}

/// One pass/fail verdict computed from `cases` samples.
fn aggregate(name: &'static str, cases: usize, failure: Option<String>) -> SuiteOutcome {
    SuiteOutcome {
        cases,
        aggregate: true,
        ..outcome(name, vec![failure])
    }
}

/// Independent per-case stream: the suite seed mixed with the case index.
fn case_rng(seed: u64, salt: u64, case: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt.rotate_left(17));
    rng.set_stream(case as u64);
    rng
}

/// Uniform chart sample, kept off the ends of open tunnels.
fn random_uv(tunnel: &ParametricTunnel, rng: &mut ChaCha8Rng) -> Uv {
    let (v0, v1) = tunnel.v_range();
    let margin = if tunnel.is_open() {
        0.1 * (v1 - v0)
    } else {
        0.0
    };
    Uv::new(
        rng.random_range(0.0..TAU),
        rng.random_range((v0 + margin)..(v1 - margin)),
    )
}

fn at(uv: &Uv) -> String {
    format!("(u,v)=({:.6}, {:.6})", uv.x, uv.y)
}

pub fn run_suite(name: &str, prep: &Prepared, seed: u64) -> Option<SuiteOutcome> {
    Some(match name {
        "audit" => audit(prep),
        "curvature" => curvature(prep),
        "lemma1" => offset_roundtrip(prep, seed, 1000),
        "lemma2" => sine_scaling(seed, 100_000),
        "lemma3" => angle_rate(prep, seed, 100),
        "lemma4" => principal_angle(prep),
        "lemma5" => tangent_rate(prep, seed, 1000),
        "lemma6" => patch_bounds(prep, seed, 1000),
        "corollary1" => offset_norms(prep),
        "remainder" => remainder_decay(prep, seed, 200),
        "roots" => root_uniqueness(prep, seed, 100),
        "limit" => small_angle_limit(prep, seed, 4),
        _ => return None,
    })
}

fn audit(prep: &Prepared) -> SuiteOutcome {
    let results = prep
        .audit
        .samples
        .iter()
        .map(|_| None)
        .chain(prep.audit.failures.iter().map(|f| Some(f.clone())))
        .collect();
    outcome("audit", results)
}

fn curvature(prep: &Prepared) -> SuiteOutcome {
    let l_n = prep.constants().l_n;
    let results = prep
        .audit
        .samples
        .iter()
        .map(|s| {
            let worst = s
                .kappa_minus
                .abs()
                .max(s.kappa_plus.abs())
                .max(s.shape_norm);
            (worst > l_n + 1e-9).then(|| {
                format!(
                    "curvature bound |kappa| <= L_N violated at {}: {worst} > {l_n}",
                    at(&s.uv)
                )
            })
        })
        .collect();
    outcome("curvature", results)
}

fn offset_roundtrip(prep: &Prepared, seed: u64, n: usize) -> SuiteOutcome {
    let t = &prep.tunnel;
    let zone = prep.scenario.zone;
    let cfg = ProjectionConfig::default();
    let results = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = case_rng(seed, 1, k);
            let uv = random_uv(t, &mut rng);
            let d = rng.random_range(0.0..zone.d_plus).max(1e-3 * zone.d_plus);
            let r = match offset_point(t, &zone, d, &uv) {
                Ok(r) => r,
                Err(e) => return Some(format!("offset point failed at {}: {e}", at(&uv))),
            };
            match project(t, &r, &cfg) {
                Ok(f) => {
                    let foot_err = (f.foot_point - t.chart(&uv)).norm();
                    let d_err = (f.distance - d).abs();
                    (foot_err > 1e-6 || d_err > 1e-6).then(|| {
                        format!(
                            "offset inverse violated at {} d={d}: distance error {d_err}, foot error {foot_err}",
                            at(&uv)
                        )
                    })
                }
                Err(e) => Some(format!("projection failed at {} d={d}: {e}", at(&uv))),
            }
        })
        .collect();
    outcome("lemma1", results)
}

fn sine_scaling(seed: u64, n: usize) -> SuiteOutcome {
    let results = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = case_rng(seed, 2, k);
            let rot = rng.random_range(0.0..PI);
            let (s, c) = rot.sin_cos();
            let q1: f64 = rng.random_range(0.1..10.0);
            let q2: f64 = rng.random_range(0.1..10.0);
            let r = Matrix2::new(c, -s, s, c);
            let q = r * Matrix2::new(q1, 0.0, 0.0, q2) * r.transpose();
            let (lo, hi) = (q1.min(q2), q1.max(q2));
            let mut dir = || {
                let t = rng.random_range(0.0..TAU);
                Vector2::new(t.cos(), t.sin())
            };
            let a = dir();
            let mut b = dir();
            while (a.x * b.y - a.y * b.x).abs() < 1e-6 {
                b = dir();
            }
            match sine_angle_scaling(&q, &a, &b) {
                Ok(z) if z >= lo / hi - 1e-9 && z <= hi / lo + 1e-9 => None,
                Ok(z) => Some(format!(
                    "sine scaling bound violated: zeta {z} outside [{}, {}]",
                    lo / hi,
                    hi / lo
                )),
                Err(e) => Some(format!("sine scaling failed: {e}")),
            }
        })
        .collect();
    outcome("lemma2", results)
}

/// Unit tangent field of the offset surface along a fixed chart direction.
fn chart_field(
    surface: &OffsetSurface<'_>,
    uv: &Uv,
    w: &Vector2<f64>,
) -> tunnelnav_core::Result<Vec3> {
    let f = surface.frame(uv)?;
    Ok((f.tangent_basis[0] * w.x + f.tangent_basis[1] * w.y).normalize())
}

fn angle_rate(prep: &Prepared, seed: u64, n: usize) -> SuiteOutcome {
    let t = &prep.tunnel;
    let surface = match OffsetSurface::new(t, prep.scenario.zone.d_star) {
        Ok(s) => s,
        Err(e) => return outcome("lemma3", vec![Some(e.to_string())]),
    };
    let results = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = case_rng(seed, 3, k);
            let uv0 = random_uv(t, &mut rng);
            let mut dir = || {
                let a = rng.random_range(0.0..TAU);
                Vector2::new(a.cos(), a.sin())
            };
            let vel = dir();
            let w = dir();
            let motion = |s: f64| uv0 + vel * s;
            let field_v = |uv: &Uv| Ok(surface.frame(uv)?.tau);
            let field_w = |uv: &Uv| chart_field(&surface, uv, &w);
            match surface.angle_rate_residual(motion, field_v, field_w, 0.0, 1e-5) {
                Ok(r) if r <= 1e-4 => None,
                Ok(r) => Some(format!(
                    "angle rate identity violated at {}: residual {r}",
                    at(&uv0)
                )),
                Err(e) => Some(format!("angle rate failed at {}: {e}", at(&uv0))),
            }
        })
        .collect();
    outcome("lemma3", results)
}

fn principal_angle(prep: &Prepared) -> SuiteOutcome {
    let floor = prep.constants().discrepancy_floor();
    let results = prep
        .audit
        .samples
        .iter()
        .map(|s| {
            (s.theta < floor - 1e-12).then(|| {
                format!(
                    "principal line to meridian angle below its floor at {}: {} < {floor}",
                    at(&s.uv),
                    s.theta
                )
            })
        })
        .collect();
    outcome("lemma4", results)
}

/// Largest sampled `‖∇_V τ*‖/‖V‖` over `n` seeded points.
pub fn sampled_tangent_rate(
    tunnel: &ParametricTunnel,
    d_star: f64,
    seed: u64,
    n: usize,
) -> tunnelnav_core::Result<f64> {
    let surface = OffsetSurface::new(tunnel, d_star)?;
    let rates: Vec<tunnelnav_core::Result<f64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = case_rng(seed, 5, k);
            let uv = random_uv(tunnel, &mut rng);
            let a = rng.random_range(0.0..TAU);
            let v = chart_field(&surface, &uv, &Vector2::new(a.cos(), a.sin()))?;
            let dtau =
                surface.covariant_derivative(|p: &Uv| Ok(surface.frame(p)?.tau), &uv, &v, 1e-5)?;
            Ok(dtau.norm())
        })
        .collect();
    rates.into_iter().try_fold(0.0f64, |m, r| Ok(m.max(r?)))
}

/// Below this the sampled rate is finite-difference noise (parallel
/// tangent fields, as on a cylinder).
const RATE_FLOOR: f64 = 1e-8;

fn tangent_rate(prep: &Prepared, seed: u64, n: usize) -> SuiteOutcome {
    let d_star = prep.scenario.zone.d_star;
    let coarse = sampled_tangent_rate(&prep.tunnel, d_star, seed, n);
    let fine = sampled_tangent_rate(&prep.tunnel, d_star, seed.wrapping_add(1), 4 * n);
    let result = match (coarse, fine) {
        (Ok(a), Ok(b)) if a.is_finite() && b.is_finite() && b <= 1.1 * a + RATE_FLOOR => None,
        (Ok(a), Ok(b)) => Some(format!(
            "tangent rate estimate unstable: max {a} at {n} points, {b} at {} points",
            4 * n
        )),
        (Err(e), _) | (_, Err(e)) => Some(format!("tangent rate sampling failed: {e}")),
    };
    aggregate("lemma5", 5 * n, result)
}

fn patch_bounds(prep: &Prepared, seed: u64, n: usize) -> SuiteOutcome {
    let t = &prep.tunnel;
    let c = prep.constants();
    let (l_n, eta) = (c.l_n, c.patch_radius);
    let results = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = case_rng(seed, 6, k);
            let uv = random_uv(t, &mut rng);
            let frame = match surface_frame(t, &uv) {
                Ok(f) => f,
                Err(e) => return Some(e.to_string()),
            };
            let psi = rng.random_range(0.0..TAU);
            let rho = rng.random_range(0.0..eta).max(1e-3 * eta);
            let p = frame.point + frame.from_local(&Vector2::new(psi.cos(), psi.sin())) * rho;
            let check = || -> tunnelnav_core::Result<Option<String>> {
                let g = patch_height_at(t, &frame, &p, eta)?;
                let grad = patch_gradient(t, &frame, &p, eta, 1e-6)?.norm();
                let lift = (patch_point(t, &frame, &p, eta)? - frame.point).norm();
                let place = at(&uv);
                Ok(if g.abs() > l_n * rho * rho + 1e-12 {
                    Some(format!(
                        "patch height bound violated at {place} rho={rho}: |g| = {}",
                        g.abs()
                    ))
                } else if grad > 2.0 * l_n * rho + 1e-7 {
                    Some(format!(
                        "patch gradient bound violated at {place} rho={rho}: |grad g| = {grad}"
                    ))
                } else if lift > rho + l_n * rho * rho + 1e-12 {
                    Some(format!(
                        "patch lift bound violated at {place} rho={rho}: distance {lift}"
                    ))
                } else {
                    None
                })
            };
            check().unwrap_or_else(|e| Some(format!("patch evaluation failed at {}: {e}", at(&uv))))
        })
        .collect();
    outcome("lemma6", results)
}

fn offset_norms(prep: &Prepared) -> SuiteOutcome {
    let c = prep.constants();
    let result = OffsetSurface::new(&prep.tunnel, c.d_star)
        .and_then(|s| s.certify(prep.scenario.audit_grid, c.d_plus));
    let cases = prep.audit.samples.len();
    let msg = match result {
        Err(e) => Some(format!("offset certificate failed: {e}")),
        Ok(cert) => {
            let j_bound = 1.0 + c.d_star * c.l_n;
            let inv_bound = 1.0 / c.delta_kappa;
            if cert.max_jacobian_norm > j_bound + 1e-6 {
                Some(format!(
                    "offset differential norm bound violated: {} > {j_bound}",
                    cert.max_jacobian_norm
                ))
            } else if cert.max_inverse_norm > inv_bound + 1e-6 {
                Some(format!(
                    "offset inverse norm bound violated: {} > {inv_bound}",
                    cert.max_inverse_norm
                ))
            } else if cert.least_eigenvalue.is_nan() || cert.least_eigenvalue <= 0.0 {
                Some(format!(
                    "offset map degenerates: least eigenvalue {}",
                    cert.least_eigenvalue
                ))
            } else {
                None
            }
        }
    };
    aggregate("corollary1", cases, msg)
}

/// Largest `|ω|/ρ²` over seeded `(c, direction)` pairs at radius `rho`.
pub fn remainder_ratio(
    tunnel: &ParametricTunnel,
    eta: f64,
    rho: f64,
    seed: u64,
    n: usize,
) -> tunnelnav_core::Result<f64> {
    let ratios: Vec<tunnelnav_core::Result<f64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = case_rng(seed, 7, k);
            let uv = random_uv(tunnel, &mut rng);
            let psi = rng.random_range(0.0..TAU);
            let frame = surface_frame(tunnel, &uv)?;
            let p = frame.point + frame.from_local(&Vector2::new(psi.cos(), psi.sin())) * rho;
            Ok(quadratic_remainder(tunnel, &uv, &p, eta)?.abs() / (rho * rho))
        })
        .collect();
    ratios.into_iter().try_fold(0.0f64, |m, r| Ok(m.max(r?)))
}

fn remainder_decay(prep: &Prepared, seed: u64, n: usize) -> SuiteOutcome {
    let c = prep.constants();
    let eta = c.patch_radius;
    let ratios: tunnelnav_core::Result<Vec<f64>> = [0.2, 0.1, 0.05]
        .iter()
        .map(|f| remainder_ratio(&prep.tunnel, eta, f * eta, seed, n))
        .collect();
    let msg = match ratios {
        Err(e) => Some(format!("remainder evaluation failed: {e}")),
        Ok(r) if r.windows(2).all(|w| w[1] <= w[0]) && r[2] <= 0.1 * c.l_n => None,
        Ok(r) => Some(format!(
            "quadratic remainder does not decay: max |omega|/rho^2 = {:?} for rho = 0.2, 0.1, 0.05 eta",
            r
        )),
    };
    aggregate("remainder", 3 * n, msg)
}

fn root_uniqueness(prep: &Prepared, seed: u64, n: usize) -> SuiteOutcome {
    let t = &prep.tunnel;
    let c = prep.constants();
    let cfg = &prep.sensor;
    let (alpha, eta, tol) = (cfg.alpha_e, cfg.patch_radius_eta, cfg.root_tol);
    let results = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = case_rng(seed, 8, k);
            let uv = random_uv(t, &mut rng);
            let d = rng.random_range(c.d_minus..c.d_plus);
            let phi = rng.random_range(0.0..TAU);
            let frame = match surface_frame(t, &uv) {
                Ok(f) => f,
                Err(e) => return Some(e.to_string()),
            };
            let (lo, hi) = depth_interval(d, alpha, eta);
            let roots: tunnelnav_core::Result<Vec<f64>> = (0..8)
                .map(|j| {
                    let x0 = lo + (hi - lo) * j as f64 / 7.0;
                    solve_scaled_depth(t, &frame, d, alpha, phi, x0, eta, tol)
                })
                .collect();
            match roots {
                Err(e) => Some(format!("depth equation failed at {}: {e}", at(&uv))),
                Ok(r) => {
                    let spread = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                        - r.iter().cloned().fold(f64::INFINITY, f64::min);
                    let scale = 1.0 + r[0].abs();
                    (spread > 10.0 * tol * scale).then(|| {
                        format!(
                            "depth equation root not unique at {} phi={phi}: spread {spread}",
                            at(&uv)
                        )
                    })
                }
            }
        })
        .collect();
    outcome("roots", results)
}

/// Halving cone angles from 0.4 down to 0.0125.
pub const LIMIT_ALPHAS: [f64; 6] = [0.4, 0.2, 0.1, 0.05, 0.025, 0.0125];

/// `max_φ |x(φ) − y(φ)|` at `r` for one cone angle, over in-patch samples.
pub fn limit_error(prep: &Prepared, r: &Vec3, alpha: f64) -> tunnelnav_core::Result<f64> {
    let cfg = prep.sensor.with_alpha(alpha);
    let foot = project(&prep.tunnel, r, &cfg.projection)?;
    let scan = scan_at(&prep.tunnel, r, foot, alpha, &cfg)?;
    let d = scan.clearance();
    Ok(scaled_depth_profile(&scan, cfg.patch_radius_eta)
        .iter()
        .filter(|s| s.in_patch)
        .map(|s| (s.x - limit_depth(&scan.frame, d, s.phi)).abs())
        .fold(0.0, f64::max))
}

fn small_angle_limit(prep: &Prepared, seed: u64, n: usize) -> SuiteOutcome {
    let points = match prep.scenario.sample_points(&prep.tunnel, seed) {
        Ok(p) => p.into_iter().take(n).collect::<Vec<_>>(),
        Err(e) => return outcome("limit", vec![Some(e.to_string())]),
    };
    let results = points
        .par_iter()
        .map(|r| {
            let errs: tunnelnav_core::Result<Vec<f64>> = LIMIT_ALPHAS
                .iter()
                .map(|&a| limit_error(prep, r, a))
                .collect();
            match errs {
                Err(e) => Some(format!("limit scan failed: {e}")),
                Ok(e) => {
                    let halving = e.windows(2).all(|w| w[1] <= 0.6 * w[0] + 1e-6);
                    (!halving || e[e.len() - 1] > 5e-3).then(|| {
                        format!(
                            "scaled depth does not converge to its small-angle limit: errors {e:?}"
                        )
                    })
                }
            }
        })
        .collect();
    outcome("limit", results)
}
