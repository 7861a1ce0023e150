//! Nearest-point projection onto a tunnel surface.

use std::f64::consts::TAU;

use nalgebra::{Matrix2, Vector2};

use crate::error::{Result, TunnelError};
use crate::geometry::{BasisType, ParametricTunnel, Uv, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionConfig {
    /// Coarse scan resolution per chart axis.
    pub grid: usize,
    /// Use the dense brute-force scan instead of the coarse one.
    pub oracle: bool,
    pub oracle_grid: usize,
    /// Boundary vicinity on open tunnels; `None` disables the check.
    pub delta_s: Option<f64>,
    /// Relative gap below which two basins count as tied.
    pub uniqueness_tol: f64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self {
            grid: 64,
            oracle: false,
            oracle_grid: 512,
            delta_s: None,
            uniqueness_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub foot_uv: Uv,
    pub foot_point: Vec3,
    pub distance: f64,
    /// Unit vector from the query point toward the foot.
    pub direction: Vec3,
    /// Distance of the runner-up basin minus the best one.
    pub uniqueness_gap: f64,
}

/// Foot found by a warm-started local solve.
#[derive(Debug, Clone, Copy)]
pub struct LocalFoot {
    pub uv: Uv,
    pub point: Vec3,
    pub normal: Vec3,
    /// Positive when the query point is inside the tunnel.
    pub signed_distance: f64,
}

fn sample_value(tunnel: &ParametricTunnel, r: &Vec3, uv: &Uv) -> f64 {
    (tunnel.chart(uv) - r).norm_squared()
}

/// Chart window scanned for `r`.
fn scan_window(tunnel: &ParametricTunnel, r: &Vec3) -> (f64, f64, bool) {
    match tunnel.basis() {
        BasisType::Circle => (0.0, TAU, true),
        BasisType::Interval { lo, hi } => (lo, hi, false),
        BasisType::Line => {
            let hint = tunnel.v_hint(r);
            let span = 3.0 * tunnel.feature_size();
            (hint - span, hint + span, false)
        }
    }
}

/// Damped Newton descent on `½‖chart(u,v) − r‖²` from `uv0`.
///
/// `v` is clamped on interval bases; elsewhere coordinates run free and are
/// normalized afterwards.
pub fn refine(tunnel: &ParametricTunnel, r: &Vec3, uv0: &Uv) -> (Uv, f64) {
    let bounds = tunnel.boundary_values();
    let clamp = |uv: Uv| match bounds {
        Some((lo, hi)) => Uv::new(uv.x, uv.y.clamp(lo, hi)),
        None => uv,
    };
    let mut uv = clamp(*uv0);
    let mut f = 0.5 * sample_value(tunnel, r, &uv);
    for _ in 0..100 {
        let jet = tunnel.jet(&uv);
        let diff = jet.point - r;
        let mut g = Vector2::new(jet.du.dot(&diff), jet.dv.dot(&diff));
        let mut h = Matrix2::new(
            jet.du.dot(&jet.du) + jet.duu.dot(&diff),
            jet.du.dot(&jet.dv) + jet.duv.dot(&diff),
            jet.du.dot(&jet.dv) + jet.duv.dot(&diff),
            jet.dv.dot(&jet.dv) + jet.dvv.dot(&diff),
        );
        // Active bound: freeze v when the descent direction leaves the domain.
        let mut frozen = false;
        if let Some((lo, hi)) = bounds {
            if (uv.y <= lo && g.y > 0.0) || (uv.y >= hi && g.y < 0.0) {
                frozen = true;
                g.y = 0.0;
                h[(0, 1)] = 0.0;
                h[(1, 0)] = 0.0;
                h[(1, 1)] = 1.0;
            }
        }
        let scale = h.norm().max(1e-300);
        if g.norm() <= 1e-15 * scale * (1.0 + diff.norm()) {
            break;
        }
        let (lmin, _, _, _) = crate::linalg::sym2_eigen(h[(0, 0)], h[(0, 1)], h[(1, 1)]);
        let shift = if lmin > 1e-10 * scale {
            0.0
        } else {
            1e-3 * scale - lmin
        };
        let hs = h + Matrix2::identity() * shift;
        let Some(step) = hs.lu().solve(&(-g)) else {
            break;
        };
        let slope = g.dot(&step);
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-12 {
            let mut cand = uv + step * alpha;
            if frozen {
                cand.y = uv.y;
            }
            let cand = clamp(cand);
            let fc = 0.5 * sample_value(tunnel, r, &cand);
            if fc <= f + 1e-4 * alpha * slope {
                let moved = (cand - uv).norm();
                uv = cand;
                f = fc;
                accepted = moved > 1e-16 * (1.0 + uv.norm());
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (tunnel.normalize_uv(&uv), (2.0 * f).sqrt())
}

/// Brute-force scan over an `n × n` chart grid; returns the best sample.
pub fn dense_scan(tunnel: &ParametricTunnel, r: &Vec3, n: usize) -> (Uv, f64) {
    let (v0, v1, periodic) = scan_window(tunnel, r);
    let mut best = (Uv::zeros(), f64::INFINITY);
    for i in 0..n {
        let u = TAU * i as f64 / n as f64;
        for j in 0..n {
            let t = if periodic {
                j as f64 / n as f64
            } else {
                j as f64 / (n - 1) as f64
            };
            let uv = Uv::new(u, v0 + (v1 - v0) * t);
            let val = sample_value(tunnel, r, &uv);
            if val < best.1 {
                best = (uv, val);
            }
        }
    }
    (best.0, best.1.sqrt())
}

/// Candidate basins: grid samples that are not worse than any neighbour.
fn grid_candidates(tunnel: &ParametricTunnel, r: &Vec3, n: usize) -> Vec<Uv> {
    let (v0, v1, periodic) = scan_window(tunnel, r);
    let nv = n;
    let v_at = |j: usize| {
        let t = if periodic {
            j as f64 / nv as f64
        } else {
            j as f64 / (nv - 1) as f64
        };
        v0 + (v1 - v0) * t
    };
    let mut vals = vec![0.0; n * nv];
    for i in 0..n {
        let u = TAU * i as f64 / n as f64;
        for j in 0..nv {
            vals[i * nv + j] = sample_value(tunnel, r, &Uv::new(u, v_at(j)));
        }
    }
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..nv {
            let f = vals[i * nv + j];
            let mut is_min = true;
            'nb: for di in [-1i64, 0, 1] {
                for dj in [-1i64, 0, 1] {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let ii = (i as i64 + di).rem_euclid(n as i64) as usize;
                    let jj = j as i64 + dj;
                    let jj = if periodic {
                        jj.rem_euclid(nv as i64) as usize
                    } else if jj < 0 || jj >= nv as i64 {
                        continue;
                    } else {
                        jj as usize
                    };
                    if vals[ii * nv + jj] < f - 1e-12 * (1.0 + f) {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                out.push(Uv::new(TAU * i as f64 / n as f64, v_at(j)));
            }
        }
    }
    out
}

/// Global nearest-point projection.
///
/// Scans a coarse grid, refines every local-minimum basin by Newton descent
/// and compares the distinct feet. A plateau of minimizers (the cylinder
/// axis) shows up as several distinct feet at equal distance.
pub fn project(
    tunnel: &ParametricTunnel,
    r: &Vec3,
    cfg: &ProjectionConfig,
) -> Result<ProjectionResult> {
    let n = if cfg.oracle {
        cfg.oracle_grid
    } else {
        cfg.grid
    }
    .max(4);
    let mut cands = grid_candidates(tunnel, r, n);
    if cfg.oracle {
        cands.push(dense_scan(tunnel, r, n).0);
    }

    let mut feet: Vec<(Uv, Vec3, f64)> = Vec::new();
    for c in &cands {
        let (uv, dist) = refine(tunnel, r, c);
        let p = tunnel.chart(&uv);
        let merge = 1e-7 * (1.0 + dist);
        match feet.iter_mut().find(|(_, q, _)| (q - p).norm() < merge) {
            Some(slot) if dist < slot.2 => *slot = (uv, p, dist),
            Some(_) => {}
            None => feet.push((uv, p, dist)),
        }
    }
    feet.sort_by(|a, b| a.2.total_cmp(&b.2));
    let Some(&(uv, point, distance)) = feet.first() else {
        return Err(TunnelError::NoConvergence("projection found no candidate"));
    };
    if distance < 1e-12 {
        return Err(TunnelError::PointOnSurface);
    }
    let gap = feet.get(1).map_or(f64::INFINITY, |f| f.2 - distance);
    if gap < cfg.uniqueness_tol * (1.0 + distance) {
        return Err(TunnelError::NonUniqueProjection { gap });
    }
    let result = ProjectionResult {
        foot_uv: uv,
        foot_point: point,
        distance,
        direction: (point - r) / distance,
        uniqueness_gap: gap,
    };
    if let Some(ds) = cfg.delta_s {
        if let Some(bd) = tunnel.boundary_distance(&point) {
            if bd <= ds {
                return Err(TunnelError::ProjectionOnBoundary {
                    result: Box::new(result),
                    boundary_distance: bd,
                });
            }
        }
    }
    Ok(result)
}

/// Local projection warm-started at `uv0`, with the inside/outside sign.
pub fn project_local(tunnel: &ParametricTunnel, r: &Vec3, uv0: &Uv) -> Result<LocalFoot> {
    let (uv, _) = refine(tunnel, r, uv0);
    let jet = tunnel.jet(&uv);
    let normal = tunnel
        .inward_normal(&jet)
        .ok_or(TunnelError::DegenerateChart { uv })?;
    Ok(LocalFoot {
        uv,
        point: jet.point,
        normal,
        signed_distance: (r - jet.point).dot(&normal),
    })
}
