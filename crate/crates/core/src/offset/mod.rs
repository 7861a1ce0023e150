//! Nearest-point projection and the offset surface.

mod projection;
mod surface;

pub use projection::{
    dense_scan, project, project_local, refine, LocalFoot, ProjectionConfig, ProjectionResult,
};
pub use surface::{jacobian_norms, offset_point, OffsetCertificate, OffsetFrame, OffsetSurface};
