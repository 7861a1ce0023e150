//! Basis-direction estimation from cone scans.

mod maxima;
mod mdpbe;
mod sweep;

pub use maxima::{periodic_maxima, ANGLE_TOL};
pub use mdpbe::{
    exactness, find_local_maxima, line_angle, mdpbe, mdpbe_at, wrap_half_open, DirectionEstimate,
    ExactnessReport,
};
pub use sweep::{alpha_sweep, SweepRow};
