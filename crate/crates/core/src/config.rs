//! Run configuration: strict JSON schema with documented defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::StepControl;
use crate::error::{GchError, Result};
use crate::initial::InitialDatum;
use crate::model::{Grid, ModelParams};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub n: u32,
    pub beta: f64,
    #[serde(default)]
    pub k: f64,
    #[serde(default)]
    pub lambda: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_length: f64,
    pub nx: usize,
}

fn default_cfl() -> f64 {
    0.3
}
fn default_dt_max() -> f64 {
    0.05
}
fn default_dt_min() -> f64 {
    1e-10
}
fn default_blowup_factor() -> f64 {
    1e4
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
    #[serde(default = "default_blowup_factor")]
    pub blowup_slope_factor: f64,
    /// Defaults to t_end / 50 when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_interval: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
#[serde(rename_all = "snake_case")]
pub enum MonitorKind {
    H1Decay,
    EnergyBalance,
    LagrangianInvariant,
    MomentumLpDecay,
    MomentumL2Decay,
    SignPreservation,
    SlopeDominance,
    DecayEnvelope,
    Tails,
    FPositivity,
}

impl MonitorKind {
    pub fn name(&self) -> &'static str {
        match self {
            MonitorKind::H1Decay => "h1_decay",
            MonitorKind::EnergyBalance => "energy_balance",
            MonitorKind::LagrangianInvariant => "lagrangian_invariant",
            MonitorKind::MomentumLpDecay => "momentum_lp_decay",
            MonitorKind::MomentumL2Decay => "momentum_l2_decay",
            MonitorKind::SignPreservation => "sign_preservation",
            MonitorKind::SlopeDominance => "slope_dominance",
            MonitorKind::DecayEnvelope => "decay_envelope",
            MonitorKind::Tails => "tails",
            MonitorKind::FPositivity => "f_positivity",
        }
    }
}

fn default_snapshot_stride() -> u32 {
    0
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Output directory; the CLI --out flag overrides it.
    pub dir: Option<String>,
    /// 0 writes only the initial and final snapshots; k > 0 writes every
    /// k-th sample as well.
    pub snapshot_stride: u32,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            snapshot_stride: default_snapshot_stride(),
        }
    }
}

fn default_flow_particles() -> usize {
    64
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsConfig,
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub initial: InitialDatum,
    #[serde(default)]
    pub monitors: Vec<MonitorKind>,
    #[serde(default)]
    pub output: OutputConfig,
    /// Label count for the characteristics monitors.
    #[serde(default = "default_flow_particles")]
    pub flow_particles: usize,
}

impl RunConfig {
    pub fn model_params(&self) -> Result<ModelParams> {
        ModelParams::new(
            self.params.n,
            self.params.beta,
            self.params.k,
            self.params.lambda,
        )
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.half_length, self.grid.nx)
    }

    pub fn step_control(&self) -> Result<StepControl> {
        StepControl {
            cfl: self.time.cfl,
            dt_max: self.time.dt_max,
            dt_min: self.time.dt_min,
            blowup_slope_factor: self.time.blowup_slope_factor,
        }
        .validated()
    }

    pub fn sample_interval(&self) -> f64 {
        self.time.sample_interval.unwrap_or(self.time.t_end / 50.0)
    }

    pub fn validate(&self) -> Result<()> {
        self.model_params()?;
        self.grid()?;
        self.step_control()?;
        if self.time.t_end <= 0.0 || self.time.t_end.is_nan() {
            return Err(GchError::Config("time.t_end must be > 0".into()));
        }
        if let Some(si) = self.time.sample_interval {
            if si <= 0.0 || si.is_nan() {
                return Err(GchError::Config("time.sample_interval must be > 0".into()));
            }
        }
        if self.flow_particles == 0 {
            return Err(GchError::Config("flow_particles must be >= 1".into()));
        }
        self.initial.validate(self.grid.half_length)?;
        Ok(())
    }
}

/// Parses and validates a config file. Unknown keys are rejected; parse
/// errors carry line and column from the JSON reader.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| GchError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}
