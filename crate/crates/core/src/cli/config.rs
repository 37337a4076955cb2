//! Run configuration: one strict TOML file per run.
//!
//! ```toml
//! schema_version = 1
//! seed = 7
//!
//! [geometry]
//! d_m = 1e-8
//! D_m = 1.0
//! k_per_m = 1e11
//!
//! [source]          # either `mu`, or all of p0, p1, p2
//! mu = 0.2
//!
//! [spin]
//! mode = "polarized_equal"   # or "unpolarized", "orthogonal_only"
//!
//! [coulomb]
//! enabled = true
//! depth = 1.0
//! sigma_k_rel = 0.005
//! spread_average = false
//! spread_samples = 1000
//!
//! [integrator]      # optional; defaults depend on d
//! dt_s = 3e-18
//! t_max_s = 1e-8
//! v_tol = 1e-6
//!
//! [screen]
//! x_min_m = -0.04
//! x_max_m = 0.04
//! n_points = 8001
//!
//! [phase]           # optional, for closed-form and oracle runs
//! delta_min = -6.283185307179586
//! delta_max = 6.283185307179586
//! n_points = 401
//!
//! [sweep]           # optional, for sweep runs
//! parameter = "d"   # or "k", "D", "mu"
//! values = [1e-9, 4e-9]
//! ```
//!
//! Unknown keys are rejected.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::closed_form::{poissonian_stats, SourceStatistics, SpinMode};
use crate::coulomb::IntegratorConfig;
use crate::error::{Error, Result};
use crate::pattern::{DipModel, ScreenGrid};
use crate::physics::Geometry;

pub const SCHEMA_VERSION: u32 = 1;

/// Configs compiled into the binary, addressable by name.
pub const SHIPPED: &[(&str, &str)] = &[
    ("fig2b", include_str!("../../configs/fig2b.toml")),
    ("fig2c", include_str!("../../configs/fig2c.toml")),
    ("fig4a", include_str!("../../configs/fig4a.toml")),
    ("fig4b", include_str!("../../configs/fig4b.toml")),
    ("sweep_d", include_str!("../../configs/sweep_d.toml")),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub geometry: GeometryConfig,
    pub source: SourceConfig,
    pub spin: SpinConfig,
    pub coulomb: CoulombConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorSection>,
    pub screen: ScreenConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<PhaseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub d_m: f64,
    #[serde(rename = "D_m")]
    pub screen_distance_m: f64,
    pub k_per_m: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p2: Option<f64>,
}

impl SourceConfig {
    pub fn statistics(&self) -> Result<SourceStatistics> {
        match (self.mu, self.p0, self.p1, self.p2) {
            (Some(mu), None, None, None) => poissonian_stats(mu),
            (None, Some(p0), Some(p1), Some(p2)) => SourceStatistics::new(p0, p1, p2),
            _ => Err(Error::Config(
                "[source] needs either `mu` alone or all of `p0`, `p1`, `p2`".into(),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinConfig {
    pub mode: SpinMode,
}

fn default_depth() -> f64 {
    1.0
}

fn default_sigma_k_rel() -> f64 {
    0.005
}

fn default_spread_samples() -> usize {
    1000
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoulombConfig {
    pub enabled: bool,
    #[serde(default = "default_depth")]
    pub depth: f64,
    #[serde(default = "default_sigma_k_rel")]
    pub sigma_k_rel: f64,
    #[serde(default)]
    pub spread_average: bool,
    #[serde(default = "default_spread_samples")]
    pub spread_samples: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScreenConfig {
    pub x_min_m: f64,
    pub x_max_m: f64,
    pub n_points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    pub delta_min: f64,
    pub delta_max: f64,
    pub n_points: usize,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        PhaseConfig {
            delta_min: -2.0 * PI,
            delta_max: 2.0 * PI,
            n_points: 401,
        }
    }
}

impl PhaseConfig {
    pub fn points(&self) -> Result<Vec<f64>> {
        // same spacing rules as the screen grid
        Ok(ScreenGrid::new(self.delta_min, self.delta_max, self.n_points)
            .map_err(|e| Error::Config(format!("[phase]: {e}")))?
            .points())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
pub enum SweepParameter {
    #[serde(rename = "d")]
    #[value(name = "d")]
    TipSeparation,
    #[serde(rename = "k")]
    #[value(name = "k")]
    WaveNumber,
    #[serde(rename = "D")]
    #[value(name = "D")]
    ScreenDistance,
    #[serde(rename = "mu")]
    #[value(name = "mu")]
    Mu,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::TipSeparation => "d",
            SweepParameter::WaveNumber => "k",
            SweepParameter::ScreenDistance => "D",
            SweepParameter::Mu => "mu",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// A config with every physics object built and validated.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub geometry: Geometry,
    pub stats: SourceStatistics,
    pub spin_mode: SpinMode,
    pub screen: ScreenGrid,
    pub dip: DipModel,
    pub integrator: IntegratorConfig,
    pub phases: Vec<f64>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.resolve()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a TOML config, a run manifest (`.json`, whose `config` is
    /// reused), or one of the [`SHIPPED`] names.
    pub fn load(arg: &str) -> Result<Self> {
        let path = Path::new(arg);
        if path.is_file() {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            if path.extension().is_some_and(|e| e == "json") {
                let manifest: serde_json::Value = serde_json::from_str(&text)?;
                let cfg: RunConfig = serde_json::from_value(manifest["config"].clone())
                    .map_err(|e| Error::Config(format!("manifest config: {e}")))?;
                cfg.resolve()?;
                return Ok(cfg);
            }
            return RunConfig::from_toml_str(&text);
        }
        let name = arg.strip_suffix(".toml").unwrap_or(arg);
        match SHIPPED.iter().find(|(n, _)| *n == name) {
            Some((_, text)) => RunConfig::from_toml_str(text),
            None => Err(Error::io(
                path,
                std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    "no such file and not a shipped config name",
                ),
            )),
        }
    }

    pub fn shipped(name: &str) -> Result<Self> {
        match SHIPPED.iter().find(|(n, _)| *n == name) {
            Some((_, text)) => RunConfig::from_toml_str(text),
            None => Err(Error::Config(format!("no shipped config named {name}"))),
        }
    }

    pub fn geometry(&self) -> Result<Geometry> {
        let g = &self.geometry;
        Geometry::new(g.d_m, g.screen_distance_m, g.k_per_m)
    }

    pub fn dip_model(&self) -> DipModel {
        let c = &self.coulomb;
        match (c.enabled, c.spread_average) {
            (false, _) => DipModel::Off,
            (true, false) => DipModel::Central { depth: c.depth },
            (true, true) => DipModel::SpreadAveraged {
                depth: c.depth,
                sigma_k_rel: c.sigma_k_rel,
                samples: c.spread_samples,
                seed: self.seed,
            },
        }
    }

    pub fn integrator_config(&self, d0: f64) -> Result<IntegratorConfig> {
        let mut cfg = IntegratorConfig::for_separation(d0)?;
        if let Some(section) = &self.integrator {
            if let Some(dt) = section.dt_s {
                cfg.dt = dt;
            }
            if let Some(t_max) = section.t_max_s {
                cfg.t_max = t_max;
            }
            if let Some(v_tol) = section.v_tol {
                cfg.v_tol = v_tol;
            }
        }
        cfg.validate(d0)?;
        Ok(cfg)
    }

    /// Builds and validates every physics object the config describes.
    pub fn resolve(&self) -> Result<Resolved> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let geometry = self.geometry()?;
        let stats = self.source.statistics()?;
        let c = &self.coulomb;
        if !(0.0..=1.0).contains(&c.depth) {
            return Err(Error::Config(format!("coulomb.depth must lie in [0, 1], got {}", c.depth)));
        }
        if !(c.sigma_k_rel > 0.0 && c.sigma_k_rel < 0.2) {
            return Err(Error::Config(format!(
                "coulomb.sigma_k_rel must lie in (0, 0.2), got {}",
                c.sigma_k_rel
            )));
        }
        if c.spread_average && c.spread_samples < crate::coulomb::MIN_SPREAD_SAMPLES {
            return Err(Error::Config(format!(
                "coulomb.spread_samples must be at least {}",
                crate::coulomb::MIN_SPREAD_SAMPLES
            )));
        }
        let s = &self.screen;
        let screen = ScreenGrid::new(s.x_min_m, s.x_max_m, s.n_points)
            .map_err(|e| Error::Config(format!("[screen]: {e}")))?;
        let phases = self.phase.unwrap_or_default().points()?;
        if let Some(sweep) = &self.sweep {
            if sweep.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("sweep values must be finite".into()));
            }
        }
        Ok(Resolved {
            integrator: self.integrator_config(geometry.tip_separation())?,
            geometry,
            stats,
            spin_mode: self.spin.mode,
            screen,
            dip: self.dip_model(),
            phases,
        })
    }

    /// Copy with one swept parameter replaced.
    pub fn with_parameter(&self, parameter: SweepParameter, value: f64) -> RunConfig {
        let mut cfg = self.clone();
        match parameter {
            SweepParameter::TipSeparation => cfg.geometry.d_m = value,
            SweepParameter::WaveNumber => cfg.geometry.k_per_m = value,
            SweepParameter::ScreenDistance => cfg.geometry.screen_distance_m = value,
            SweepParameter::Mu => {
                cfg.source = SourceConfig {
                    mu: Some(value),
                    ..SourceConfig::default()
                }
            }
        }
        cfg.integrator = None;
        cfg
    }
}
