use nalgebra::Vector2;
use thiserror::Error;

use crate::offset::ProjectionResult;

pub type Result<T, E = TunnelError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum TunnelError {
    #[error("invalid tunnel: {0}")]
    InvalidTunnel(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("chart is degenerate at (u,v)=({}, {})", .uv.x, .uv.y)]
    DegenerateChart { uv: Vector2<f64> },
    #[error("umbilic point at (u,v)=({}, {}): principal curvature gap {gap:e}", .uv.x, .uv.y)]
    UmbilicPoint { uv: Vector2<f64>, gap: f64 },
    #[error("basis projection is degenerate at (u,v)=({}, {})", .uv.x, .uv.y)]
    DegenerateProjection { uv: Vector2<f64> },
    #[error("vector is not tangent (normal component {normal_component:e})")]
    NotTangent { normal_component: f64 },
    #[error("input vectors are collinear (sine {sine:e})")]
    CollinearInput { sine: f64 },
    #[error("operator is not positive definite (least eigenvalue {least:e})")]
    NotPositiveDefinite { least: f64 },
    #[error("projection is not unique (basin gap {gap:e})")]
    NonUniqueProjection { gap: f64 },
    #[error("projection foot lies within {boundary_distance} of the tunnel edge")]
    ProjectionOnBoundary {
        result: Box<ProjectionResult>,
        boundary_distance: f64,
    },
    #[error("query point lies on the surface")]
    PointOnSurface,
    #[error("offset distance {d} outside ({min}, {max})")]
    OffsetOutOfRange { d: f64, min: f64, max: f64 },
    #[error("finite-difference step {0:e} underflows")]
    StepUnderflow(f64),
    #[error("vector field vanishes along the motion")]
    VanishingField,
    #[error("ray did not hit the surface within range {max_range}")]
    NoHit { max_range: f64 },
    #[error("scan rejected: {missing} of {total} rays missed")]
    ScanRejected { missing: usize, total: usize },
    #[error("patch graph has no root within |g| <= {eta}")]
    PatchEscape { eta: f64 },
    #[error("profile has no valid samples")]
    EmptyProfile,
    #[error("estimator found {count} local maxima, expected exactly two")]
    WellPosednessViolation { count: usize },
    #[error("projection foot lies within the edge vicinity of the tunnel")]
    ActiveZoneViolation,
    #[error("robot touched the surface at t={t}")]
    SurfaceContact { t: f64 },
    #[error("local solver failed to converge: {0}")]
    NoConvergence(&'static str),
}
