//! Tunnel surfaces and their pointwise differential geometry.

mod audit;
mod frame;
mod tunnel;

pub use audit::{
    audit_grid, regularity_audit, AuditConfig, AuditReport, AuditSample, OperationalZone,
    TunnelConstants,
};
pub use frame::{
    canonical_sign, meridian_tangent, second_fundamental_form, sine_angle_scaling,
    sine_angle_scaling_at, singular_values, surface_frame, surface_frame_continuous,
    FrameContinuity, ShapeFrame, UMBILIC_GAP,
};
pub use tunnel::{
    wrap_pi, BasisType, ChartJet, ParametricTunnel, PolynomialWarp, TunnelKind, Uv, Vec3,
};
