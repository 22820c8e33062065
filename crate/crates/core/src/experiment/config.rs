use crate::error::{Error, Result};
use crate::precoders::PrecoderConfig;
use crate::system::TonePlan;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const DEFAULT_CCDF_FRAMES: usize = 1000;
pub const DEFAULT_SER_FRAMES: usize = 200;
pub const DEFAULT_MAX_BLOCK_ERRORS: u64 = 100;
pub const DEFAULT_ITERATIONS: usize = 2000;
pub const DEFAULT_LAMBDA: f64 = 0.25;

/// Named tone plans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TonePreset {
    #[serde(rename = "ieee80211n_40mhz")]
    Ieee80211n40Mhz,
    #[serde(rename = "all_active")]
    AllActive,
}

/// A preset name or an inline `{"W": .., "active": [..]}` plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TonePlanChoice {
    Preset(TonePreset),
    Inline(TonePlan),
}

impl Default for TonePlanChoice {
    fn default() -> Self {
        TonePlanChoice::Preset(TonePreset::Ieee80211n40Mhz)
    }
}

impl TonePlanChoice {
    /// Resolves the plan; `w` is the optional top-level `W`.
    pub fn resolve(&self, w: Option<usize>) -> Result<TonePlan> {
        let plan = match self {
            TonePlanChoice::Preset(TonePreset::Ieee80211n40Mhz) => TonePlan::ieee80211n_40mhz(),
            TonePlanChoice::Preset(TonePreset::AllActive) => {
                TonePlan::all_active(w.ok_or_else(|| Error::config("W", "required by the all_active tone plan"))?)?
            }
            TonePlanChoice::Inline(plan) => plan.clone(),
        };
        if let Some(w) = w {
            if w != plan.len() {
                return Err(Error::config("W", format!("{w} disagrees with the tone plan's {}", plan.len())));
            }
        }
        Ok(plan)
    }
}

/// Declarative description of one Monte-Carlo experiment. Command-specific
/// fields are ignored by commands that do not use them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "N", default = "default_antennas")]
    pub antennas: usize,
    #[serde(rename = "M", default = "default_users")]
    pub users: usize,
    #[serde(rename = "T", default = "default_taps")]
    pub taps: usize,
    #[serde(rename = "W", default, skip_serializing_if = "Option::is_none")]
    pub tones: Option<usize>,
    #[serde(default)]
    pub tone_plan: TonePlanChoice,
    /// Defaults depend on the command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precoders: Option<Vec<PrecoderConfig>>,
    #[serde(default)]
    pub snr_db: Vec<f64>,
    /// Frames per point; defaults depend on the command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Per-point early-abort threshold for SER estimation.
    #[serde(default = "default_max_block_errors")]
    pub max_block_errors: u64,
    /// PMP regularization weights swept by `tradeoff`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    /// LS+clip target PARs swept by `tradeoff`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip_targets_db: Option<Vec<f64>>,
    /// PMP iteration count used by `tradeoff`.
    #[serde(rename = "K", default = "default_iterations")]
    pub iterations: usize,
    /// Earlier iteration counts whose OBR `tradeoff` also reports.
    #[serde(default = "default_checkpoints")]
    pub checkpoints: Vec<usize>,
    #[serde(rename = "N_list", default = "default_antenna_list")]
    pub antenna_list: Vec<usize>,
    #[serde(rename = "T_list", default = "default_tap_list")]
    pub tap_list: Vec<usize>,
    /// PAR levels (dB) at which `par-ccdf` evaluates the CCDF.
    #[serde(default = "default_ccdf_grid")]
    pub ccdf_grid_db: Vec<f64>,
}

fn default_antennas() -> usize {
    100
}

fn default_users() -> usize {
    10
}

fn default_taps() -> usize {
    4
}

fn default_max_block_errors() -> u64 {
    DEFAULT_MAX_BLOCK_ERRORS
}

fn default_iterations() -> usize {
    DEFAULT_ITERATIONS
}

fn default_checkpoints() -> Vec<usize> {
    vec![100, 500]
}

fn default_antenna_list() -> Vec<usize> {
    vec![20, 40, 60, 80, 100]
}

fn default_tap_list() -> Vec<usize> {
    vec![2, 4, 8]
}

fn default_ccdf_grid() -> Vec<f64> {
    (0..=140).map(|i| f64::from(i) / 10.0).collect()
}

/// `λ = 2^v` for `v = −12..4`.
pub fn default_lambdas() -> Vec<f64> {
    (-12..=4).map(|v| 2f64.powi(v)).collect()
}

pub fn default_clip_targets() -> Vec<f64> {
    vec![3.0, 4.0, 5.0, 6.0, 7.0, 8.0]
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

/// The Monte-Carlo commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    ParCcdf,
    SerSweep,
    Tradeoff,
    AntennaSweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ParCcdf => "par_ccdf",
            Command::SerSweep => "ser_sweep",
            Command::Tradeoff => "tradeoff",
            Command::AntennaSweep => "antenna_sweep",
        }
    }

    fn default_frames(self) -> usize {
        match self {
            Command::ParCcdf | Command::AntennaSweep => DEFAULT_CCDF_FRAMES,
            Command::SerSweep | Command::Tradeoff => DEFAULT_SER_FRAMES,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn tone_plan(&self) -> Result<TonePlan> {
        self.tone_plan.resolve(self.tones)
    }

    pub fn frames_for(&self, command: Command) -> usize {
        self.frames.unwrap_or_else(|| command.default_frames())
    }

    /// Configured precoders, or the command's default set.
    pub fn precoders_for(&self, command: Command) -> Vec<PrecoderConfig> {
        if let Some(list) = &self.precoders {
            return list.clone();
        }
        let pmp = PrecoderConfig::pmp(DEFAULT_LAMBDA, self.iterations);
        match command {
            Command::AntennaSweep => vec![PrecoderConfig::Ls {}, pmp],
            _ => vec![
                PrecoderConfig::Ls {},
                PrecoderConfig::Mf {},
                PrecoderConfig::LsClip { target_par_db: 4.0 },
                pmp,
            ],
        }
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.lambdas.clone().unwrap_or_else(default_lambdas)
    }

    pub fn clip_targets(&self) -> Vec<f64> {
        self.clip_targets_db.clone().unwrap_or_else(default_clip_targets)
    }

    /// Checks every field `command` reads; errors name the field.
    pub fn validate(&self, command: Command) -> Result<TonePlan> {
        let plan = self.tone_plan()?;
        let w = plan.len();
        if self.users == 0 {
            return Err(Error::config("M", "must be at least 1"));
        }
        if command != Command::AntennaSweep && self.users >= self.antennas {
            return Err(Error::config("M", format!("must be below N = {}", self.antennas)));
        }
        if command != Command::AntennaSweep && !(1..=w).contains(&self.taps) {
            return Err(Error::config("T", format!("must lie in 1..={w}")));
        }
        if self.frames == Some(0) {
            return Err(Error::config("frames", "must be at least 1"));
        }
        strictly_increasing("snr_db", &self.snr_db)?;
        if self.snr_db.iter().any(|s| s.is_nan()) {
            return Err(Error::config("snr_db", "contains NaN"));
        }
        if command == Command::SerSweep && self.snr_db.is_empty() {
            return Err(Error::config("snr_db", "ser-sweep needs at least one SNR"));
        }
        if self.max_block_errors == 0 {
            return Err(Error::config("max_block_errors", "must be at least 1"));
        }
        if self.iterations == 0 {
            return Err(Error::config("K", "must be at least 1"));
        }
        let precoders = self.precoders_for(command);
        if precoders.is_empty() {
            return Err(Error::config("precoders", "list is empty"));
        }
        for (i, p) in precoders.iter().enumerate() {
            p.validate(w).map_err(|e| nest(&format!("precoders[{i}]"), e))?;
        }
        match command {
            Command::Tradeoff => {
                for (i, &lambda) in self.lambdas().iter().enumerate() {
                    if !(lambda.is_finite() && lambda >= 0.0) {
                        return Err(Error::config(format!("lambdas[{i}]"), "must be finite and non-negative"));
                    }
                }
                for (i, &t) in self.clip_targets().iter().enumerate() {
                    PrecoderConfig::LsClip { target_par_db: t }
                        .validate(w)
                        .map_err(|e| nest(&format!("clip_targets_db[{i}]"), e))?;
                }
                for (i, &k) in self.checkpoints.iter().enumerate() {
                    if k == 0 || k > self.iterations {
                        return Err(Error::config(format!("checkpoints[{i}]"), format!("must lie in 1..={}", self.iterations)));
                    }
                }
            }
            Command::AntennaSweep => {
                if self.antenna_list.is_empty() {
                    return Err(Error::config("N_list", "list is empty"));
                }
                for (i, &n) in self.antenna_list.iter().enumerate() {
                    if n <= self.users {
                        return Err(Error::config(format!("N_list[{i}]"), format!("must exceed M = {}", self.users)));
                    }
                }
                if self.tap_list.is_empty() {
                    return Err(Error::config("T_list", "list is empty"));
                }
                for (i, &t) in self.tap_list.iter().enumerate() {
                    if !(1..=w).contains(&t) {
                        return Err(Error::config(format!("T_list[{i}]"), format!("must lie in 1..={w}")));
                    }
                }
            }
            Command::ParCcdf => {
                if self.ccdf_grid_db.is_empty() {
                    return Err(Error::config("ccdf_grid_db", "list is empty"));
                }
                strictly_increasing("ccdf_grid_db", &self.ccdf_grid_db)?;
            }
            Command::SerSweep => {}
        }
        Ok(plan)
    }
}

fn strictly_increasing(field: &str, values: &[f64]) -> Result<()> {
    if values.windows(2).any(|p| !(p[0] < p[1])) {
        return Err(Error::config(field, "must be strictly increasing"));
    }
    Ok(())
}

fn nest(prefix: &str, e: Error) -> Error {
    match e {
        Error::Config { field, reason } => Error::config(format!("{prefix}.{field}"), reason),
        other => Error::config(prefix, other.to_string()),
    }
}
