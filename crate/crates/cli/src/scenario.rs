//! Scenario files: one TOML document describing a tunnel, the clearance
//! band, sensor and controller settings, and run inputs.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tunnelnav_core::offset::{offset_point, ProjectionConfig};
use tunnelnav_core::{
    regularity_audit, AuditConfig, AuditReport, ControllerConfig, OperationalZone,
    ParametricTunnel, PolynomialWarp, Result, SensorConfig, TunnelConstants, TunnelError, Uv, Vec3,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
#[allow(clippy::large_enum_variant)]
pub enum TunnelSpec {
    Cylinder {
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        length: Option<f64>,
    },
    Torus {
        major: f64,
        minor: f64,
    },
    Revolution {
        profile: Vec<f64>,
        lo: f64,
        hi: f64,
    },
    Warped {
        base: Box<TunnelSpec>,
        linear: [[f64; 3]; 3],
        quadratic: [[[f64; 3]; 3]; 3],
    },
}

impl TunnelSpec {
    pub fn build(&self) -> Result<ParametricTunnel> {
        match self {
            TunnelSpec::Cylinder { radius, length } => ParametricTunnel::cylinder(*radius, *length),
            TunnelSpec::Torus { major, minor } => ParametricTunnel::torus(*major, *minor),
            TunnelSpec::Revolution { profile, lo, hi } => {
                ParametricTunnel::revolution(profile.clone(), *lo, *hi)
            }
            TunnelSpec::Warped {
                base,
                linear,
                quadratic,
            } => ParametricTunnel::warped(base.build()?, PolynomialWarp::new(*linear, *quadratic)),
        }
    }
}

/// Sensor settings; unset values fall back to defaults derived from the
/// audited constants.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_e: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_phi: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_range: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ray_march_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch_radius_eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strict: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection_grid: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSpec {
    #[serde(default = "default_speed")]
    pub speed: f64,
    #[serde(default = "default_gain")]
    pub gain_d: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_sign")]
    pub heading_sign: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_b_required: Option<f64>,
}

fn default_speed() -> f64 {
    0.2
}
fn default_gain() -> f64 {
    1.0
}
fn default_dt() -> f64 {
    0.01
}
fn default_sign() -> f64 {
    1.0
}
fn default_horizon() -> f64 {
    10.0
}
fn default_grid() -> usize {
    32
}

impl Default for ControllerSpec {
    fn default() -> Self {
        Self {
            speed: default_speed(),
            gain_d: default_gain(),
            dt: default_dt(),
            heading_sign: default_sign(),
            horizon: default_horizon(),
            v_b_required: None,
        }
    }
}

/// Inputs of the scan, estimate, sweep and simulate commands.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    /// Start of a simulation and default point for `scan`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<[f64; 3]>,
    /// Sample points for `estimate` and `sweep`; drawn from the seed when
    /// empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<[f64; 3]>,
    /// Number of drawn sample points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_count: Option<usize>,
    /// Clearance of drawn sample points (defaults to `d_star`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clearance: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_grid")]
    pub audit_grid: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub tunnel: TunnelSpec,
    pub zone: OperationalZone,
    #[serde(default)]
    pub sensor: SensorSpec,
    #[serde(default)]
    pub controller: ControllerSpec,
    #[serde(default)]
    pub run: RunSpec,
}

/// Scenario plus everything derived from it at load time.
pub struct Prepared {
    pub scenario: Scenario,
    pub tunnel: ParametricTunnel,
    pub audit: AuditReport,
    pub sensor: SensorConfig,
    pub controller: ControllerConfig,
}

impl Prepared {
    pub fn constants(&self) -> &TunnelConstants {
        &self.audit.constants
    }
}

impl Scenario {
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let sc: Scenario = toml::from_str(text).map_err(|e| e.to_string())?;
        sc.validate().map_err(|e| e.to_string())?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> std::result::Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Checks everything that can be checked without running geometry.
    pub fn validate(&self) -> Result<()> {
        self.zone.validate()?;
        self.tunnel.build()?;
        if self.audit_grid < 2 {
            return Err(TunnelError::InvalidConfig(
                "audit_grid must be at least 2".into(),
            ));
        }
        self.controller_config().validate()?;
        if let Some(a) = self.sensor.alpha_e {
            let s = self.sensor.alpha_s.unwrap_or(a.max(0.4));
            if !(a > 0.0 && a <= s && s < std::f64::consts::FRAC_PI_2) {
                return Err(TunnelError::InvalidConfig(
                    "sensor needs 0 < alpha_e <= alpha_s < pi/2".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn controller_config(&self) -> ControllerConfig {
        let c = &self.controller;
        ControllerConfig {
            speed: c.speed,
            gain_d: c.gain_d,
            dt: c.dt,
            heading_sign: c.heading_sign,
            horizon: c.horizon,
            v_b_required: c.v_b_required,
        }
    }

    pub fn sensor_config(&self, constants: &TunnelConstants, oracle: bool) -> Result<SensorConfig> {
        let mut cfg = SensorConfig::for_constants(constants);
        let s = &self.sensor;
        if let Some(v) = s.alpha_e {
            cfg.alpha_e = v;
            cfg.alpha_s = cfg.alpha_s.max(v);
        }
        if let Some(v) = s.alpha_s {
            cfg.alpha_s = v;
        }
        if let Some(v) = s.n_phi {
            cfg.n_phi = v;
        }
        if let Some(v) = s.max_range {
            cfg.max_range = v;
        }
        if let Some(v) = s.ray_march_step {
            cfg.ray_march_step = v;
        }
        if let Some(v) = s.root_tol {
            cfg.root_tol = v;
        }
        if let Some(v) = s.patch_radius_eta {
            cfg.patch_radius_eta = v;
        }
        if let Some(v) = s.strict {
            cfg.strict = v;
        }
        cfg.projection = ProjectionConfig {
            grid: s.projection_grid.unwrap_or(64),
            oracle,
            delta_s: Some(self.zone.delta_s),
            ..ProjectionConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds the tunnel, audits it and resolves sensor/controller configs.
    pub fn prepare(&self, grid: Option<usize>, oracle: bool) -> Result<Prepared> {
        let tunnel = self.tunnel.build()?;
        let audit = regularity_audit(
            &tunnel,
            &AuditConfig::new(grid.unwrap_or(self.audit_grid), self.zone),
        );
        let sensor = self.sensor_config(&audit.constants, oracle)?;
        Ok(Prepared {
            scenario: self.clone(),
            tunnel,
            audit,
            sensor,
            controller: self.controller_config(),
        })
    }

    /// Explicit sample points, or points drawn from the seed at the
    /// configured clearance.
    pub fn sample_points(&self, tunnel: &ParametricTunnel, seed: u64) -> Result<Vec<Vec3>> {
        if !self.run.points.is_empty() {
            return Ok(self
                .run
                .points
                .iter()
                .map(|p| Vec3::new(p[0], p[1], p[2]))
                .collect());
        }
        let n = self.run.sample_count.unwrap_or(8);
        let d = self.run.clearance.unwrap_or(self.zone.d_star);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (v0, v1) = tunnel.v_range();
        // Keep away from the ends of open tunnels.
        let margin = if tunnel.is_open() {
            0.1 * (v1 - v0)
        } else {
            0.0
        };
        (0..n)
            .map(|_| {
                let u = rng.random_range(0.0..std::f64::consts::TAU);
                let v = rng.random_range((v0 + margin)..(v1 - margin));
                offset_point(tunnel, &self.zone, d, &Uv::new(u, v))
            })
            .collect()
    }
}
