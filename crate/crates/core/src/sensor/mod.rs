//! Virtual cone-range sensor.

mod config;
mod patch;
mod ray;
mod scan;

pub use config::SensorConfig;
pub use patch::{
    patch_gradient, patch_height, patch_height_at, patch_point, quadratic_remainder,
    solve_scaled_depth,
};
pub use ray::ray_distance;
pub use scan::{
    depth_interval, limit_depth, scaled_depth, scaled_depth_profile, scan, scan_at, DepthSample,
    RayScan,
};
