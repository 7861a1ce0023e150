//! Geometry and estimation core for navigating along tunnel-like surfaces
//! with a short-range ray sensor.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: analytic tunnel charts, shape operators, regularity audits
//! - [`offset`]: nearest-point projection and the offset surface
//! - [`sensor`]: ray casting, scans and the local height function
//! - [`estimator`]: the basis-direction estimator and sweeps
//! - [`navsim`]: a reactive controller and closed-loop simulation
//! - [`report`]: number formatting for reports and CSV

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimator;
pub mod geometry;
pub mod linalg;
pub mod navsim;
pub mod offset;
pub mod report;
pub mod sensor;

pub use error::{Result, TunnelError};
pub use estimator::{
    alpha_sweep, exactness, mdpbe, mdpbe_at, DirectionEstimate, ExactnessReport, SweepRow,
};
pub use geometry::{
    meridian_tangent, regularity_audit, second_fundamental_form, sine_angle_scaling, surface_frame,
    AuditConfig, AuditReport, BasisType, ChartJet, FrameContinuity, OperationalZone,
    ParametricTunnel, PolynomialWarp, ShapeFrame, TunnelConstants, TunnelKind, Uv, Vec3,
};
pub use navsim::{
    basic_coordinate, control_step, evaluate_solve, run_scenario, ControllerConfig, RobotState,
    SimLog, SimRow, SolveReport,
};
pub use offset::{
    project, project_local, OffsetFrame, OffsetSurface, ProjectionConfig, ProjectionResult,
};
pub use sensor::{ray_distance, scan, RayScan, SensorConfig};
