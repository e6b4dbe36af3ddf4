//! Experiment configuration.
//!
//! One JSON document with units in the field names. Unknown fields are
//! rejected so a typo cannot silently fall back to a default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use unmeasure::channels::detection::DetectionModel;
use unmeasure::channels::noise::{
    measured_phonon_table, NoiseParams, PhononEntry, CALIBRATED_BASE_GATE_ERROR,
    CALIBRATED_GATE_ERROR_PER_PHONON, CALIBRATED_RESIDUAL_PHONONS, CALIBRATED_T2_US,
};
use unmeasure::experiment::RowSettings;
use unmeasure::protocol::{Encoding, LabelPolicy, Mode, Scenario};
use unmeasure::state::ket_from_bloch;
use unmeasure::tomography::bootstrap::MIN_RESAMPLES;
use unmeasure::tomography::MleOptions;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// `null` turns idle dephasing off.
    pub t2_us: Option<f64>,
    pub gate_error_per_phonon: f64,
    pub base_gate_error: f64,
    /// Phonon numbers per (recool, readout) pair and outcome.
    pub phonon_table: Vec<PhononEntry>,
}

impl NoiseConfig {
    pub fn calibrated() -> Self {
        Self {
            t2_us: Some(CALIBRATED_T2_US),
            gate_error_per_phonon: CALIBRATED_GATE_ERROR_PER_PHONON,
            base_gate_error: CALIBRATED_BASE_GATE_ERROR,
            phonon_table: measured_phonon_table(CALIBRATED_RESIDUAL_PHONONS),
        }
    }

    pub fn noiseless() -> Self {
        Self {
            t2_us: None,
            gate_error_per_phonon: 0.0,
            base_gate_error: 0.0,
            phonon_table: Vec::new(),
        }
    }

    pub fn params(&self, recool_duration_us: f64) -> NoiseParams {
        NoiseParams {
            t2_us: self.t2_us,
            recool_duration_us,
            phonon_table: self.phonon_table.clone(),
            gate_error_per_phonon: self.gate_error_per_phonon,
            base_gate_error: self.base_gate_error,
        }
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self::calibrated()
    }
}

/// Readout rates; the duration comes from the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionConfig {
    pub bright_rate_per_us: f64,
    pub dark_rate_per_us: f64,
    pub threshold: u32,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        let d = DetectionModel::default();
        Self {
            bright_rate_per_us: d.bright_rate_per_us,
            dark_rate_per_us: d.dark_rate_per_us,
            threshold: d.threshold,
        }
    }
}

impl DetectionConfig {
    pub fn model(&self, duration_us: f64) -> DetectionModel {
        DetectionModel {
            bright_rate_per_us: self.bright_rate_per_us,
            dark_rate_per_us: self.dark_rate_per_us,
            threshold: self.threshold,
            duration_us,
        }
    }
}

/// Input qubit `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>` for the
/// histogram and state dumps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub theta_rad: f64,
    pub phi_rad: f64,
}

impl Default for InputConfig {
    /// `|+>`.
    fn default() -> Self {
        Self {
            theta_rad: std::f64::consts::FRAC_PI_2,
            phi_rad: 0.0,
        }
    }
}

fn default_meas() -> Vec<f64> {
    vec![100.0, 200.0, 300.0, 400.0]
}
fn default_recool() -> Vec<f64> {
    vec![800.0]
}
fn default_shots() -> u64 {
    10_000
}
fn default_resamples() -> usize {
    MIN_RESAMPLES
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}
fn default_mode() -> Mode {
    Mode::Sampled
}
fn default_mle_tol() -> f64 {
    MleOptions::default().tol
}
fn default_mle_max_iter() -> usize {
    MleOptions::default().max_iter
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_meas")]
    pub meas_durations_us: Vec<f64>,
    #[serde(default = "default_recool")]
    pub recool_durations_us: Vec<f64>,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub detection: DetectionConfig,
    /// Shots per tomography setting, and per input for the histogram and
    /// the information test.
    #[serde(default = "default_shots")]
    pub shots: u64,
    pub seed: u64,
    #[serde(default = "default_resamples")]
    pub bootstrap_resamples: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    #[serde(default)]
    pub label_policy: LabelPolicy,
    #[serde(default)]
    pub encoding: Encoding,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default)]
    pub input: InputConfig,
    #[serde(default = "default_mle_tol")]
    pub mle_tol: f64,
    #[serde(default = "default_mle_max_iter")]
    pub mle_max_iter: usize,
}

impl ExperimentConfig {
    /// Defaults everywhere except the seed.
    pub fn with_seed(seed: u64) -> Self {
        serde_json::from_value(serde_json::json!({ "seed": seed })).expect("defaults deserialize")
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            line: None,
            message: e.to_string(),
        })?;
        Self::parse(&text).map_err(|(line, message)| CliError::Config {
            path: path.to_path_buf(),
            line,
            message,
        })
    }

    /// Parses and validates; errors carry the 1-based line when one can be found.
    pub fn parse(text: &str) -> Result<Self, (Option<usize>, String)> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            let line = (e.line() > 0).then_some(e.line());
            (line, e.to_string())
        })?;
        cfg.validate().map_err(|(field, message)| {
            (line_of_key(text, field), format!("{field}: {message}"))
        })?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Returns the offending field name with the message.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        let positive_list = |name: &'static str, xs: &[f64]| {
            if xs.is_empty() {
                return Err((name, "must not be empty".to_string()));
            }
            match xs.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                Some(bad) => Err((name, format!("durations must be > 0, got {bad}"))),
                None => Ok(()),
            }
        };
        positive_list("meas_durations_us", &self.meas_durations_us)?;
        positive_list("recool_durations_us", &self.recool_durations_us)?;
        if self.shots == 0 {
            return Err(("shots", "must be >= 1".into()));
        }
        if self.mode == Mode::Sampled && self.bootstrap_resamples < MIN_RESAMPLES {
            return Err((
                "bootstrap_resamples",
                format!(
                    "must be >= {MIN_RESAMPLES}, got {}",
                    self.bootstrap_resamples
                ),
            ));
        }
        if self.formats.is_empty() {
            return Err(("formats", "must not be empty".into()));
        }
        if !(self.mle_tol > 0.0) {
            return Err(("mle_tol", format!("must be > 0, got {}", self.mle_tol)));
        }
        if self.mle_max_iter == 0 {
            return Err(("mle_max_iter", "must be >= 1".into()));
        }
        for &r in &self.recool_durations_us {
            self.noise
                .params(r)
                .validate()
                .map_err(|e| ("noise", e.to_string()))?;
            for &m in &self.meas_durations_us {
                let noise = self.noise.params(r);
                noise
                    .gate_error(m, unmeasure::channels::Outcome::One)
                    .map_err(|e| ("noise", e.to_string()))?;
            }
        }
        for &m in &self.meas_durations_us {
            self.detection
                .model(m)
                .validate()
                .map_err(|e| ("detection", e.to_string()))?;
        }
        Ok(())
    }

    pub fn has(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }

    /// Sweep points in row order: recool outer, readout inner.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.recool_durations_us
            .iter()
            .flat_map(|&r| self.meas_durations_us.iter().map(move |&m| (r, m)))
            .collect()
    }

    pub fn scenario(&self, recool_us: f64, meas_us: f64) -> Scenario {
        let mut s = Scenario::new(ket_from_bloch(self.input.theta_rad, self.input.phi_rad));
        s.meas_duration_us = meas_us;
        s.detection = self.detection.model(meas_us);
        s.noise = self.noise.params(recool_us);
        s.shots = self.shots;
        s.seed = self.seed;
        s.encoding = self.encoding;
        s.label_policy = self.label_policy;
        s
    }

    pub fn row_settings(&self) -> RowSettings {
        let (r, m) = self.points()[0];
        RowSettings {
            scenario: self.scenario(r, m),
            mode: self.mode,
            bootstrap_resamples: self.bootstrap_resamples,
            mle: MleOptions {
                tol: self.mle_tol,
                max_iter: self.mle_max_iter,
            },
        }
    }
}

/// Line of the first `"key":` in `text`.
fn line_of_key(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines()
        .position(|l| l.contains(&needle))
        .map(|i| i + 1)
}
