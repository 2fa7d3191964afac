//! Flat JSON run configuration shared by every subcommand.
//!
//! Unknown keys are rejected. `simulate`, `invariants` and `mms` ignore the
//! sweep-only keys; `sweep` ignores `epsilon`.

use std::f64::consts::PI;
use std::path::Path;

use bolab_core::dynamics::{Forcing, InitialCondition, SimConfig, TimeStep};
use bolab_core::lab::{uniform_times, ReferenceMode, SweepConfig, DEFAULT_ERROR_SAMPLES, DEFAULT_LADDER};
use bolab_core::spectral::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialSpec {
    Preset(String),
    /// `[j, re, im]` triples for `j >= 0`.
    Modes(Vec<[f64; 3]>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_condition: Option<InitialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lump_amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lump_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dealias: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forcing: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_times: Option<Vec<f64>>,
}

const DEFAULT_STRIDE: usize = 100;

fn required<T: Clone>(value: &Option<T>, field: &'static str) -> Result<T, CliError> {
    value
        .clone()
        .ok_or_else(|| CliError::Config(format!("missing required field `{field}`")))
}

impl ConfigFile {
    /// Reads a config document, or the `config` embedded in a run manifest.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("malformed config: {e}")))?;
        let doc = match value.as_object() {
            Some(obj) if obj.contains_key("tool_version") && obj.contains_key("config") => {
                obj["config"].clone()
            }
            Some(_) => value,
            None => return Err(CliError::Config("config must be a JSON object".into())),
        };
        serde_json::from_value(doc).map_err(|e| CliError::Config(format!("malformed config: {e}")))
    }

    fn time_step(&self) -> Result<TimeStep, CliError> {
        match (self.dt, self.cfl) {
            (Some(_), Some(_)) => Err(CliError::Config(
                "invalid configuration field `dt`: give either `dt` or `cfl`, not both".into(),
            )),
            (Some(dt), None) => Ok(TimeStep::Fixed(dt)),
            (None, Some(cfl)) => Ok(TimeStep::Cfl(cfl)),
            (None, None) => Ok(TimeStep::default()),
        }
    }

    /// A forced run may omit `initial_condition`; it then starts from the
    /// manufactured solution.
    fn initial_condition(&self, forcing: Option<Forcing>) -> Result<InitialCondition, CliError> {
        let spec = match (&self.initial_condition, forcing) {
            (None, Some(f)) => return Ok(f.initial_condition()),
            _ => required(&self.initial_condition, "initial_condition")?,
        };
        let bad = |msg: String| CliError::Config(format!("invalid configuration field `initial_condition`: {msg}"));
        match spec {
            InitialSpec::Preset(name) => match name.as_str() {
                "cosine" => Ok(InitialCondition::Cosine),
                "two-mode" => Ok(InitialCondition::TwoMode),
                "lump" => Ok(InitialCondition::Lump {
                    amplitude: self.lump_amplitude.unwrap_or(1.0),
                    width: self.lump_width.unwrap_or(1.0),
                }),
                other => Err(bad(format!("unknown preset `{other}`"))),
            },
            InitialSpec::Modes(triples) => {
                let mut modes = Vec::with_capacity(triples.len());
                for [j, re, im] in triples {
                    if j.fract() != 0.0 || j < 0.0 {
                        return Err(bad(format!("mode index {j} is not a non-negative integer")));
                    }
                    modes.push((j as i64, Complex64::new(re, im)));
                }
                Ok(InitialCondition::Coefficients(modes))
            }
        }
    }

    /// Builds and validates the simulation config; `epsilon_required` is
    /// false for sweeps, where the ladder supplies it.
    fn sim_config(&self, epsilon_required: bool) -> Result<SimConfig, CliError> {
        let epsilon = if epsilon_required {
            required(&self.epsilon, "epsilon")?
        } else {
            0.0
        };
        let forcing = match &self.forcing {
            Some(tag) => Some(Forcing::from_tag(tag).map_err(CliError::from)?),
            None => None,
        };
        let cfg = SimConfig {
            epsilon,
            n_points: required(&self.n_points, "n_points")?,
            length: self.length.unwrap_or(2.0 * PI),
            t_final: required(&self.t_final, "t_final")?,
            time_step: self.time_step()?,
            initial_condition: self.initial_condition(forcing)?,
            dealias: self.dealias.unwrap_or(true),
            snapshot_stride: self.snapshot_stride.unwrap_or(DEFAULT_STRIDE),
            forcing,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn simulation(&self) -> Result<SimConfig, CliError> {
        self.sim_config(true)
    }

    pub fn sweep(&self, workers: usize) -> Result<SweepConfig, CliError> {
        let base = self.sim_config(false)?;
        let mut sweep = SweepConfig::new(base);
        sweep.epsilons = self.epsilons.clone().unwrap_or_else(|| DEFAULT_LADDER.to_vec());
        sweep.reference = match self.reference.as_deref() {
            None | Some("same-resolution") => ReferenceMode::SameResolution,
            Some("refined") => ReferenceMode::Refined,
            Some(other) => {
                return Err(CliError::Config(format!(
                    "invalid configuration field `reference`: unknown mode `{other}`"
                )))
            }
        };
        sweep.error_times = match (&self.error_times, self.error_samples) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "invalid configuration field `error_times`: give either `error_times` or `error_samples`".into(),
                ))
            }
            (Some(times), None) => times.clone(),
            (None, Some(0)) => {
                return Err(CliError::Config(
                    "invalid configuration field `error_samples`: must be >= 1".into(),
                ))
            }
            (None, samples) => uniform_times(sweep.base.t_final, samples.unwrap_or(DEFAULT_ERROR_SAMPLES)),
        };
        sweep.workers = workers;
        sweep.validate()?;
        Ok(sweep)
    }

    /// Every default filled in and `cfl` replaced by the step it produced.
    pub fn resolved(&self, for_sweep: bool) -> Result<ConfigFile, CliError> {
        let cfg = self.sim_config(!for_sweep)?;
        let (_, dt) = cfg.resolved_steps();
        let mut out = ConfigFile {
            epsilon: (!for_sweep).then_some(cfg.epsilon),
            n_points: Some(cfg.n_points),
            length: Some(cfg.length),
            t_final: Some(cfg.t_final),
            dt: Some(dt),
            cfl: None,
            initial_condition: self.initial_condition.clone(),
            lump_amplitude: None,
            lump_width: None,
            dealias: Some(cfg.dealias),
            snapshot_stride: Some(cfg.snapshot_stride),
            forcing: cfg.forcing.map(|f| f.tag().to_string()),
            ..ConfigFile::default()
        };
        if let InitialCondition::Lump { amplitude, width } = cfg.initial_condition {
            out.lump_amplitude = Some(amplitude);
            out.lump_width = Some(width);
        }
        if for_sweep {
            let sweep = self.sweep(0)?;
            out.epsilons = Some(sweep.epsilons);
            out.reference = Some(
                match sweep.reference {
                    ReferenceMode::SameResolution => "same-resolution",
                    ReferenceMode::Refined => "refined",
                }
                .to_string(),
            );
            out.error_times = Some(sweep.error_times);
        }
        Ok(out)
    }
}
