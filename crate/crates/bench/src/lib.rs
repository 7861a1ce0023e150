//! Fixtures shared by the benchmarks.

use tunnelnav_core::{
    regularity_audit, AuditConfig, OperationalZone, ParametricTunnel, SensorConfig,
};

/// The reference torus with its audited sensor settings.
pub fn torus_fixture() -> (ParametricTunnel, SensorConfig) {
    let t = ParametricTunnel::torus(2.0, 0.5).expect("valid torus");
    let zone = OperationalZone {
        d_minus: 0.1,
        d_plus: 0.4,
        d_star: 0.25,
        delta_s: 0.0,
    };
    let c = regularity_audit(&t, &AuditConfig::new(32, zone)).constants;
    (t, SensorConfig::for_constants(&c))
}
