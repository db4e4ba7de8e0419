//! Run configuration: one JSON object per run, strictly keyed.
//!
//! Top-level keys are `subcommand`, `seed`, `output_dir` and the parameters of
//! the chosen subcommand. Every parameter has a default except `branch`, which
//! must be named wherever collisions happen.

use std::path::PathBuf;

use kinetics_core::audit::AuditSettings;
use kinetics_core::collision::CollisionBranch;
use kinetics_core::operator::GainNormalization;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Subcommand {
    Collide,
    Operator,
    Dsmc,
    Transport,
    Audit,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Collide => "collide",
            Subcommand::Operator => "operator",
            Subcommand::Dsmc => "dsmc",
            Subcommand::Transport => "transport",
            Subcommand::Audit => "audit",
        }
    }
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_OUTPUT_DIR: &str = "kinetics-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollideParams {
    pub v1: [f64; 3],
    pub v2: [f64; 3],
    pub n: [f64; 3],
    pub epsilon: f64,
    pub branch: Option<CollisionBranch>,
    pub mass1: f64,
    pub mass2: f64,
    pub diameter1: f64,
    pub diameter2: f64,
    /// Extra events with random velocities, normals and the same masses.
    pub random_events: usize,
}

impl Default for CollideParams {
    fn default() -> Self {
        CollideParams {
            v1: [0.0, 0.0, 0.0],
            v2: [2.0, 0.0, 0.0],
            n: [1.0, 0.0, 0.0],
            epsilon: 0.5,
            branch: None,
            mass1: 1.0,
            mass2: 1.0,
            diameter1: 1.0,
            diameter2: 1.0,
            random_events: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// Closed-form mixture evaluated at any velocity.
    Analytic,
    /// Mixture sampled on the velocity grid and interpolated.
    Grid,
    /// Grid read from `snapshot_path`.
    Snapshot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModeParams {
    pub density: f64,
    pub bulk_velocity: [f64; 3],
    pub temperature: f64,
}

impl Default for ModeParams {
    fn default() -> Self {
        ModeParams {
            density: 1.0,
            bulk_velocity: [0.0; 3],
            temperature: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorParams {
    /// Maxwellian components of `f`; an empty list is `f = 0`.
    pub modes: Vec<ModeParams>,
    pub representation: Representation,
    pub snapshot_path: Option<PathBuf>,
    pub vmax: f64,
    pub nodes_per_axis: usize,
    pub mass: f64,
    pub diameter: f64,
    pub epsilon: f64,
    pub branch: Option<CollisionBranch>,
    pub normalization: GainNormalization,
    pub samples: usize,
    /// Probe velocities; `null` uses the 27-point lattice `{-s, 0, s}^3`.
    pub probes: Option<Vec<[f64; 3]>>,
    pub probe_scale: f64,
    pub moment_samples: usize,
}

impl Default for OperatorParams {
    fn default() -> Self {
        OperatorParams {
            modes: vec![ModeParams::default()],
            representation: Representation::Analytic,
            snapshot_path: None,
            vmax: 6.0,
            nodes_per_axis: 49,
            mass: 1.0,
            diameter: 1.0,
            epsilon: 1.0,
            branch: None,
            normalization: GainNormalization::PaperForm,
            samples: 100_000,
            probes: None,
            probe_scale: 1.0,
            moment_samples: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DsmcParams {
    pub particles: usize,
    pub steps: usize,
    pub sample_every: usize,
    pub dt: f64,
    pub number_density: f64,
    pub epsilon: f64,
    pub branch: Option<CollisionBranch>,
    pub mass: f64,
    pub diameter: f64,
    pub temperature: f64,
    pub bulk_velocity: [f64; 3],
    /// `null` picks eight thermal speeds.
    pub majorant_relative_speed: Option<f64>,
    pub fit_cooling: bool,
}

impl Default for DsmcParams {
    fn default() -> Self {
        DsmcParams {
            particles: 10_000,
            steps: 1_000,
            sample_every: 10,
            dt: 0.01,
            number_density: 1.0,
            epsilon: 0.9,
            branch: None,
            mass: 1.0,
            diameter: 1.0,
            temperature: 1.0,
            bulk_velocity: [0.0; 3],
            majorant_relative_speed: None,
            fit_cooling: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransportParams {
    pub xmax: f64,
    pub nx: usize,
    pub vmax: f64,
    pub nv: usize,
    /// Force along `x`.
    pub force: f64,
    pub mass: f64,
    pub dt: f64,
    pub steps: usize,
    /// Initial Gaussian `exp(-(x - x0)^2 / (2 sx^2) - (v - v0)^2 / (2 sv^2))`.
    pub center: [f64; 2],
    pub width: [f64; 2],
    /// Extra runs, each halving the spacing and the step.
    pub refinements: usize,
}

impl Default for TransportParams {
    fn default() -> Self {
        TransportParams {
            xmax: 5.0,
            nx: 81,
            vmax: 5.0,
            nv: 81,
            force: 0.8,
            mass: 2.0,
            dt: 0.05,
            steps: 32,
            center: [-1.0, 0.0],
            width: [0.6, 0.6],
            refinements: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditParams {
    pub jacobian_configs: usize,
    pub energy_configs: usize,
    pub stokes_samples: usize,
    pub moment_samples: usize,
    pub chain_points: usize,
    pub lambda: f64,
}

impl Default for AuditParams {
    fn default() -> Self {
        let d = AuditSettings::default();
        AuditParams {
            jacobian_configs: d.jacobian_configs,
            energy_configs: d.energy_configs,
            stokes_samples: d.stokes_samples,
            moment_samples: d.moment_samples,
            chain_points: d.chain_points,
            lambda: d.lambda,
        }
    }
}

impl AuditParams {
    pub fn settings(&self, seed: u64) -> AuditSettings {
        AuditSettings {
            seed,
            jacobian_configs: self.jacobian_configs,
            energy_configs: self.energy_configs,
            stokes_samples: self.stokes_samples,
            moment_samples: self.moment_samples,
            chain_points: self.chain_points,
            lambda: self.lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Collide(CollideParams),
    Operator(OperatorParams),
    Dsmc(DsmcParams),
    Transport(TransportParams),
    Audit(AuditParams),
}

impl Params {
    pub fn subcommand(&self) -> Subcommand {
        match self {
            Params::Collide(_) => Subcommand::Collide,
            Params::Operator(_) => Subcommand::Operator,
            Params::Dsmc(_) => Subcommand::Dsmc,
            Params::Transport(_) => Subcommand::Transport,
            Params::Audit(_) => Subcommand::Audit,
        }
    }

    fn to_map(&self) -> Map<String, Value> {
        let v = match self {
            Params::Collide(p) => serde_json::to_value(p),
            Params::Operator(p) => serde_json::to_value(p),
            Params::Dsmc(p) => serde_json::to_value(p),
            Params::Transport(p) => serde_json::to_value(p),
            Params::Audit(p) => serde_json::to_value(p),
        };
        match v.expect("parameters serialise") {
            Value::Object(m) => m,
            _ => unreachable!("parameter structs serialise to objects"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub params: Params,
}

impl RunConfig {
    /// Resolved configuration as pretty JSON; [`parse_config`] reads it back
    /// to an equal value.
    pub fn to_json(&self) -> String {
        let mut map = Map::new();
        map.insert("subcommand".into(), Value::from(self.subcommand.name()));
        map.insert("seed".into(), Value::from(self.seed));
        map.insert("output_dir".into(), Value::from(self.output_dir.to_string_lossy().into_owned()));
        map.extend(self.params.to_map());
        let mut s = serde_json::to_string_pretty(&Value::Object(map)).expect("config serialises");
        s.push('\n');
        s
    }
}

fn known_keys<P: Default + Serialize>() -> Vec<String> {
    match serde_json::to_value(P::default()).expect("defaults serialise") {
        Value::Object(m) => m.keys().cloned().collect(),
        _ => Vec::new(),
    }
}

fn parse_params<P: DeserializeOwned + Default + Serialize>(map: Map<String, Value>) -> Result<P, CliError> {
    let known = known_keys::<P>();
    if let Some(key) = map.keys().find(|k| !known.contains(k)) {
        return Err(CliError::Validation {
            key: key.clone(),
            message: format!("unknown key (expected one of: {})", known.join(", ")),
        });
    }
    serde_path_to_error::deserialize(Value::Object(map)).map_err(|e| CliError::Validation {
        key: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

/// Parse a JSON run configuration. `cli_subcommand`, when given, must agree
/// with any `subcommand` key in the text.
pub fn parse_config(text: &str, cli_subcommand: Option<Subcommand>) -> Result<RunConfig, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let Value::Object(mut map) = value else {
        return Err(CliError::Parse {
            line: 1,
            column: 1,
            message: "configuration must be a JSON object".into(),
        });
    };

    let from_text = match map.remove("subcommand") {
        None => None,
        Some(v) => Some(serde_json::from_value::<Subcommand>(v).map_err(|e| CliError::Validation {
            key: "subcommand".into(),
            message: e.to_string(),
        })?),
    };
    let subcommand = match (from_text, cli_subcommand) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::Validation {
                key: "subcommand".into(),
                message: format!("config says `{}` but `{}` was requested", a.name(), b.name()),
            })
        }
        (Some(s), _) | (None, Some(s)) => s,
        (None, None) => {
            return Err(CliError::Validation {
                key: "subcommand".into(),
                message: "no subcommand given".into(),
            })
        }
    };
    let seed = match map.remove("seed") {
        None => DEFAULT_SEED,
        Some(v) => v.as_u64().ok_or_else(|| CliError::Validation {
            key: "seed".into(),
            message: format!("expected a non-negative 64-bit integer, got {v}"),
        })?,
    };
    let output_dir = match map.remove("output_dir") {
        None => PathBuf::from(DEFAULT_OUTPUT_DIR),
        Some(Value::String(s)) => PathBuf::from(s),
        Some(v) => {
            return Err(CliError::Validation {
                key: "output_dir".into(),
                message: format!("expected a string, got {v}"),
            })
        }
    };
    let params = match subcommand {
        Subcommand::Collide => Params::Collide(parse_params(map)?),
        Subcommand::Operator => Params::Operator(parse_params(map)?),
        Subcommand::Dsmc => Params::Dsmc(parse_params(map)?),
        Subcommand::Transport => Params::Transport(parse_params(map)?),
        Subcommand::Audit => Params::Audit(parse_params(map)?),
    };
    let config = RunConfig {
        subcommand,
        seed,
        output_dir,
        params,
    };
    validate(&config)?;
    Ok(config)
}

fn invalid(key: &str, message: impl Into<String>) -> CliError {
    CliError::Validation {
        key: key.into(),
        message: message.into(),
    }
}

fn positive(key: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be positive and finite, got {x}")))
    }
}

fn restitution(x: f64) -> Result<(), CliError> {
    if x > 0.0 && x <= 1.0 {
        Ok(())
    } else {
        Err(invalid("epsilon", format!("must lie in (0, 1], got {x}")))
    }
}

fn branch(b: Option<CollisionBranch>) -> Result<(), CliError> {
    b.map(|_| ()).ok_or_else(|| invalid("branch", "required: \"reflective\" or \"passing\""))
}

fn at_least(key: &str, x: usize, min: usize) -> Result<(), CliError> {
    if x >= min {
        Ok(())
    } else {
        Err(invalid(key, format!("must be at least {min}, got {x}")))
    }
}

/// Range checks that need no computation. Deeper checks (grid resolution,
/// unit normals) surface from the library when the run starts.
pub fn validate(config: &RunConfig) -> Result<(), CliError> {
    match &config.params {
        Params::Collide(p) => {
            restitution(p.epsilon)?;
            branch(p.branch)?;
            positive("mass1", p.mass1)?;
            positive("mass2", p.mass2)?;
            positive("diameter1", p.diameter1)?;
            positive("diameter2", p.diameter2)?;
        }
        Params::Operator(p) => {
            restitution(p.epsilon)?;
            branch(p.branch)?;
            positive("vmax", p.vmax)?;
            at_least("nodes_per_axis", p.nodes_per_axis, 4)?;
            positive("mass", p.mass)?;
            positive("diameter", p.diameter)?;
            at_least("samples", p.samples, 1)?;
            positive("probe_scale", p.probe_scale)?;
            if p.representation == Representation::Snapshot && p.snapshot_path.is_none() {
                return Err(invalid("snapshot_path", "required when representation is \"snapshot\""));
            }
            for m in &p.modes {
                if !(m.density >= 0.0 && m.density.is_finite()) {
                    return Err(invalid("modes", format!("density must be non-negative, got {}", m.density)));
                }
                if !(m.temperature > 0.0 && m.temperature.is_finite()) {
                    return Err(invalid("modes", format!("temperature must be positive, got {}", m.temperature)));
                }
            }
        }
        Params::Dsmc(p) => {
            at_least("particles", p.particles, 2)?;
            at_least("sample_every", p.sample_every, 1)?;
            positive("dt", p.dt)?;
            positive("number_density", p.number_density)?;
            restitution(p.epsilon)?;
            branch(p.branch)?;
            positive("mass", p.mass)?;
            positive("diameter", p.diameter)?;
            if !(p.temperature >= 0.0 && p.temperature.is_finite()) {
                return Err(invalid("temperature", format!("must be non-negative, got {}", p.temperature)));
            }
            if let Some(g) = p.majorant_relative_speed {
                positive("majorant_relative_speed", g)?;
            }
        }
        Params::Transport(p) => {
            positive("xmax", p.xmax)?;
            positive("vmax", p.vmax)?;
            at_least("nx", p.nx, 4)?;
            at_least("nv", p.nv, 4)?;
            positive("mass", p.mass)?;
            positive("dt", p.dt)?;
            positive("width", p.width[0].min(p.width[1]))?;
            if !p.force.is_finite() {
                return Err(invalid("force", "must be finite"));
            }
        }
        Params::Audit(p) => {
            at_least("jacobian_configs", p.jacobian_configs, 1)?;
            at_least("energy_configs", p.energy_configs, 1)?;
            at_least("stokes_samples", p.stokes_samples, 1)?;
            at_least("moment_samples", p.moment_samples, 1)?;
            at_least("chain_points", p.chain_points, 1)?;
            positive("lambda", p.lambda)?;
        }
    }
    Ok(())
}
