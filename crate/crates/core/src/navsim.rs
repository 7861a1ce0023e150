//! Kinematic point robot steered by the direction estimator, and the
//! success verdict for a finished run.
//!
//! The controller is deliberately simple: move along the estimated line at
//! constant speed and correct the clearance proportionally. Finite-horizon
//! verdicts approximate the asymptotic success criterion.

use std::f64::consts::TAU;

use crate::error::{Result, TunnelError};
use crate::estimator::{exactness, mdpbe_at, DirectionEstimate};
use crate::geometry::{ParametricTunnel, TunnelConstants, Uv, Vec3};
use crate::offset::{project, project_local, ProjectionConfig};
use crate::sensor::SensorConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    pub speed: f64,
    /// Proportional gain on the clearance error.
    pub gain_d: f64,
    pub dt: f64,
    /// Sign applied to the first estimated direction.
    pub heading_sign: f64,
    pub horizon: f64,
    /// Minimum progress rate; defaults to `0.05·speed·Δ_B⁻`.
    pub v_b_required: Option<f64>,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            speed: 0.2,
            gain_d: 1.0,
            dt: 0.01,
            heading_sign: 1.0,
            horizon: 10.0,
            v_b_required: None,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.speed > 0.0 && self.dt > 0.0 && self.horizon > 0.0 && self.gain_d >= 0.0) {
            return Err(TunnelError::InvalidConfig(
                "controller needs speed, dt, horizon > 0 and gain_d >= 0".into(),
            ));
        }
        if self.heading_sign == 0.0 || !self.heading_sign.is_finite() {
            return Err(TunnelError::InvalidConfig(
                "heading_sign must be +1 or -1".into(),
            ));
        }
        Ok(())
    }

    pub fn resolved_v_b(&self, delta_b_minus: f64) -> f64 {
        self.v_b_required
            .unwrap_or(0.05 * self.speed * delta_b_minus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub t: f64,
    pub position: Vec3,
    /// Last travel direction along the estimated line.
    pub heading: Option<Vec3>,
}

impl RobotState {
    pub fn new(position: Vec3) -> Self {
        Self {
            t: 0.0,
            position,
            heading: None,
        }
    }
}

/// One Euler step of the controller.
pub fn control_step(
    state: &RobotState,
    est: &DirectionEstimate,
    cfg: &ControllerConfig,
    d_star: f64,
) -> RobotState {
    let p = est.line_dir;
    let s = match state.heading {
        Some(h) if p.dot(&h) < 0.0 => -1.0,
        Some(_) => 1.0,
        None => cfg.heading_sign.signum(),
    };
    let along = p * s;
    // `direction` points toward the foot, so d > d* pulls toward the wall.
    let correction = est.foot.direction * (cfg.gain_d * (est.foot.distance - d_star));
    let heading = (along + correction).normalize();
    RobotState {
        t: state.t + cfg.dt,
        position: state.position + heading * (cfg.speed * cfg.dt),
        heading: Some(along),
    }
}

/// Keeps an angular basic coordinate continuous across calls.
#[derive(Debug, Clone, Default)]
pub struct BasisUnwrap {
    last: Option<f64>,
}

impl BasisUnwrap {
    pub fn unwrap(&mut self, tunnel: &ParametricTunnel, raw: f64) -> f64 {
        let b = match (self.last, tunnel.v_periodic()) {
            (Some(prev), true) => raw + TAU * ((prev - raw) / TAU).round(),
            _ => raw,
        };
        self.last = Some(b);
        b
    }
}

/// Basic coordinate of the projection of `r`.
pub fn basic_coordinate(
    tunnel: &ParametricTunnel,
    r: &Vec3,
    ctx: Option<&mut BasisUnwrap>,
) -> Result<f64> {
    let foot = project(tunnel, r, &ProjectionConfig::default())?;
    let raw = tunnel.basic_coordinate(&foot.foot_uv);
    Ok(match ctx {
        Some(c) => c.unwrap(tunnel, raw),
        None => raw,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimRow {
    pub t: f64,
    pub position: Vec3,
    pub d: f64,
    pub b: f64,
    pub phi_star: f64,
    pub exactness: f64,
    pub well_posed: bool,
}

#[derive(Debug, Clone)]
pub struct SimLog {
    pub rows: Vec<SimRow>,
    pub d_star: f64,
    /// Default progress-rate threshold for this tunnel and speed.
    pub v_b_required: f64,
    /// The foot entered the edge vicinity of an open tunnel.
    pub end_reached: bool,
    /// Why the run stopped early, if it did.
    pub error: Option<TunnelError>,
}

/// Runs the closed loop from `start` until the horizon, an error, or the
/// end of an open tunnel. The partial log is always returned.
pub fn run_scenario(
    tunnel: &ParametricTunnel,
    constants: &TunnelConstants,
    cfg: &ControllerConfig,
    sensor: &SensorConfig,
    start: &Vec3,
) -> SimLog {
    let d_star = constants.d_star;
    let mut log = SimLog {
        rows: Vec::new(),
        d_star,
        v_b_required: cfg.resolved_v_b(constants.delta_b_minus),
        end_reached: false,
        error: None,
    };
    if let Err(e) = cfg.validate().and_then(|_| sensor.validate()) {
        log.error = Some(e);
        return log;
    }
    let floor = Some(constants.discrepancy_floor());
    let mut unwrap = BasisUnwrap::default();
    let mut state = RobotState::new(*start);
    let steps = (cfg.horizon / cfg.dt).round() as usize;
    for k in 0..=steps {
        let foot = match project(tunnel, &state.position, &sensor.projection) {
            Ok(f) => f,
            Err(TunnelError::ProjectionOnBoundary { result, .. }) => {
                log.end_reached = true;
                log.rows.push(SimRow {
                    t: state.t,
                    position: state.position,
                    d: result.distance,
                    b: unwrap.unwrap(tunnel, tunnel.basic_coordinate(&result.foot_uv)),
                    phi_star: f64::NAN,
                    exactness: f64::NAN,
                    well_posed: false,
                });
                break;
            }
            Err(e) => {
                log.error = Some(e);
                break;
            }
        };
        let b = unwrap.unwrap(tunnel, tunnel.basic_coordinate(&foot.foot_uv));
        let foot_uv: Uv = foot.foot_uv;
        let est = match mdpbe_at(tunnel, &state.position, foot, sensor) {
            Ok(e) => e,
            Err(e) => {
                log.error = Some(e);
                break;
            }
        };
        let ex = exactness(tunnel, &est, floor)
            .map(|r| r.angle)
            .unwrap_or(f64::NAN);
        log.rows.push(SimRow {
            t: state.t,
            position: state.position,
            d: est.foot.distance,
            b,
            phi_star: est.phi_star,
            exactness: ex,
            well_posed: est.well_posed,
        });
        if k == steps {
            break;
        }
        let next = control_step(&state, &est, cfg, d_star);
        match project_local(tunnel, &next.position, &foot_uv) {
            Ok(f) if f.signed_distance > 0.0 => state = next,
            Ok(_) => {
                log.error = Some(TunnelError::SurfaceContact { t: next.t });
                break;
            }
            Err(e) => {
                log.error = Some(e);
                break;
            }
        }
        // Recompute time from the step index to avoid drift.
        state.t = (k + 1) as f64 * cfg.dt;
    }
    log
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub solved: bool,
    /// Start of the longest suffix satisfying the progress and clearance
    /// clauses (end time on open tunnels).
    pub t0: f64,
    pub direction_sign: f64,
    pub min_abs_bdot: f64,
    pub d_monotone: bool,
    pub final_d_error: f64,
    pub end_reached: bool,
    pub positive_clearance: bool,
    pub v_b_required: f64,
}

/// Central-difference rate of the basic coordinate per row.
pub fn basis_rates(rows: &[SimRow]) -> Vec<f64> {
    let n = rows.len();
    (0..n)
        .map(|i| {
            if n < 2 {
                return 0.0;
            }
            let (a, b) = if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            (rows[b].b - rows[a].b) / (rows[b].t - rows[a].t)
        })
        .collect()
}

/// Relative slack on the clearance-error monotonicity check.
pub const MONOTONE_SLACK: f64 = 1e-3;

/// Scores a run against the success criterion.
///
/// Closed tunnels: the longest suffix where `ḃ` keeps the final sign with
/// `|ḃ| ≥ v_b` and `|d − d*|` never grows by more than `1e−3·d*` per row.
/// The run counts as solved when clearance stayed positive, the run was not
/// aborted and that suffix starts in the first half of the run. Open
/// tunnels are solved when the end was reached with positive clearance.
pub fn evaluate_solve(
    log: &SimLog,
    tunnel: &ParametricTunnel,
    cfg: &ControllerConfig,
) -> SolveReport {
    let v_b = cfg.v_b_required.unwrap_or(log.v_b_required);
    let rows = &log.rows;
    let positive = rows.iter().all(|r| r.d > 0.0);
    let final_d_error = rows
        .last()
        .map_or(f64::INFINITY, |r| (r.d - log.d_star).abs());
    let bdot = basis_rates(rows);
    let n = rows.len();
    let sign = bdot.last().map_or(0.0, |v| {
        if *v > 0.0 {
            1.0
        } else if *v < 0.0 {
            -1.0
        } else {
            0.0
        }
    });
    let slack = MONOTONE_SLACK * log.d_star;
    let err = |i: usize| (rows[i].d - log.d_star).abs();

    let mut start = n;
    while start > 0 {
        let i = start - 1;
        let rate_ok = sign != 0.0 && bdot[i] * sign >= v_b;
        let mono_ok = i + 1 >= n || err(i + 1) <= err(i) + slack;
        if !(rate_ok && mono_ok) {
            break;
        }
        start = i;
    }
    let suffix = start..n;
    let min_abs_bdot = suffix
        .clone()
        .map(|i| bdot[i].abs())
        .fold(f64::INFINITY, f64::min);
    let t_end = rows.last().map_or(0.0, |r| r.t);
    let t0 = if start < n { rows[start].t } else { t_end };

    if tunnel.is_open() {
        return SolveReport {
            solved: log.end_reached && positive,
            t0: t_end,
            direction_sign: sign,
            min_abs_bdot: if n > 0 { min_abs_bdot } else { 0.0 },
            d_monotone: start < n,
            final_d_error,
            end_reached: log.end_reached,
            positive_clearance: positive,
            v_b_required: v_b,
        };
    }
    let long_enough = n - start >= 2 && t0 <= 0.5 * t_end;
    SolveReport {
        solved: positive && log.error.is_none() && long_enough,
        t0,
        direction_sign: sign,
        min_abs_bdot: if start < n { min_abs_bdot } else { 0.0 },
        d_monotone: start < n,
        final_d_error,
        end_reached: false,
        positive_clearance: positive,
        v_b_required: v_b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64, d: f64, b: f64) -> SimRow {
        SimRow {
            t,
            position: Vec3::zeros(),
            d,
            b,
            phi_star: 0.0,
            exactness: 0.0,
            well_posed: true,
        }
    }

    fn log(rows: Vec<SimRow>) -> SimLog {
        SimLog {
            rows,
            d_star: 0.25,
            v_b_required: 0.01,
            end_reached: false,
            error: None,
        }
    }

    #[test]
    fn steady_run_is_solved() {
        let torus = ParametricTunnel::torus(2.0, 0.5).unwrap();
        let l = log((0..100)
            .map(|i| row(i as f64 * 0.1, 0.25, 0.05 * i as f64 * 0.1))
            .collect());
        let r = evaluate_solve(&l, &torus, &ControllerConfig::default());
        assert!(r.solved);
        assert_eq!(r.t0, 0.0);
        assert_eq!(r.direction_sign, 1.0);
        assert!((r.min_abs_bdot - 0.05).abs() < 1e-12);
    }

    #[test]
    fn sign_change_without_recovery() {
        let torus = ParametricTunnel::torus(2.0, 0.5).unwrap();
        let l = log((0..100)
            .map(|i| {
                let t = i as f64 * 0.1;
                row(
                    t,
                    0.25,
                    if t < 5.0 {
                        0.05 * t
                    } else {
                        0.5 - 0.05 * (t - 5.0) * 0.1
                    },
                )
            })
            .collect());
        assert!(!evaluate_solve(&l, &torus, &ControllerConfig::default()).solved);
    }

    #[test]
    fn unwrap_is_continuous() {
        let torus = ParametricTunnel::torus(2.0, 0.5).unwrap();
        let mut u = BasisUnwrap::default();
        let mut last = 0.0;
        for k in 0..=100 {
            let raw = (0.07 * k as f64).rem_euclid(TAU);
            last = u.unwrap(&torus, raw);
        }
        assert!((last - 7.0).abs() < 1e-12);
    }

    #[test]
    fn cylinder_basic_coordinate() {
        let cyl = ParametricTunnel::cylinder(1.0, None).unwrap();
        assert!(
            (basic_coordinate(&cyl, &Vec3::new(0.5, 0.0, 3.7), None).unwrap() - 3.7).abs() < 1e-12
        );
        assert!(matches!(
            basic_coordinate(&cyl, &Vec3::new(0.0, 0.0, 1.0), None),
            Err(TunnelError::NonUniqueProjection { .. })
        ));
    }
}
