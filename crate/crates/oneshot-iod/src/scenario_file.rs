//! JSON scenario documents.
//!
//! ```json
//! {
//!   "network": {
//!     "transmitters": [{ "lat_deg": 37.182, "lon_deg": -5.605, "fc_hz": 1.215e9 }],
//!     "receivers": [{ "ecef": [4883052.96, -307215.65, 4077985.57] }]
//!   },
//!   "target": { "position_m": [..3], "velocity_mps": [..3] },
//!   "noise": { "sigma_t_s": 1e-9, "doppler_scale": 1e11, "seed": 42 },
//!   "experiment": { "sigma_grid": [1e-11, 1e-10], "runs": 1000 }
//! }
//! ```
//!
//! A station is either geodetic (`lat_deg`, `lon_deg`, optional `alt_m`) or
//! Cartesian (`ecef`), never both. Units are fixed: m, m/s, s, Hz.

use std::fs;
use std::path::Path;

use nalgebra::Vector3;
use oneshot_core::ellipsoid::DEFAULT_CONFIDENCE;
use oneshot_core::scenario::{
    DEFAULT_DOPPLER_VARIANCE_SCALE, BUILTIN_RECEIVERS, BUILTIN_TARGET_POSITION, BUILTIN_TARGET_VELOCITY,
    BUILTIN_TRANSMITTERS,
};
use oneshot_core::{
    geodetic_to_ecef, GeodeticCoordinate, NoiseModel, RadarNetwork, StateVector, Transmitter,
};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

/// Noise levels swept by default, s.
pub const DEFAULT_SIGMA_GRID: [f64; 6] = [1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6];
pub const DEFAULT_RUNS: usize = 1000;
pub const DEFAULT_BIAS_RUNS: usize = 20_000;
pub const DEFAULT_SEED: u64 = 20_240_301;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lat_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lon_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alt_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ecef: Option<[f64; 3]>,
    /// Carrier frequency; transmitters only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fc_hz: Option<f64>,
}

impl StationEntry {
    pub fn geodetic(lat_deg: f64, lon_deg: f64) -> Self {
        Self {
            lat_deg: Some(lat_deg),
            lon_deg: Some(lon_deg),
            alt_m: None,
            ecef: None,
            fc_hz: None,
        }
    }

    pub fn ecef(position: [f64; 3]) -> Self {
        Self {
            lat_deg: None,
            lon_deg: None,
            alt_m: None,
            ecef: Some(position),
            fc_hz: None,
        }
    }

    pub fn with_carrier(mut self, fc_hz: f64) -> Self {
        self.fc_hz = Some(fc_hz);
        self
    }

    fn position(&self, path: &str) -> Result<Vector3<f64>> {
        match (self.ecef, self.lat_deg, self.lon_deg) {
            (Some(p), None, None) if self.alt_m.is_none() => {
                if p.iter().all(|c| c.is_finite()) {
                    Ok(Vector3::from(p))
                } else {
                    Err(AppError::validation(format!("{path}.ecef"), "not finite"))
                }
            }
            (Some(_), _, _) => Err(AppError::validation(
                path,
                "give either ecef or lat_deg/lon_deg, not both",
            )),
            (None, Some(lat), Some(lon)) => {
                let g = GeodeticCoordinate::new(lat, lon, self.alt_m.unwrap_or(0.0))
                    .map_err(|e| prefix_field(e, path))?;
                Ok(geodetic_to_ecef(&g))
            }
            (None, None, _) => Err(AppError::validation(format!("{path}.lat_deg"), "missing")),
            (None, Some(_), None) => Err(AppError::validation(format!("{path}.lon_deg"), "missing")),
        }
    }
}

fn prefix_field(e: oneshot_core::Error, path: &str) -> AppError {
    match e {
        oneshot_core::Error::Validation { field, reason } => {
            AppError::validation(format!("{path}.{field}"), reason)
        }
        other => other.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub transmitters: Vec<StationEntry>,
    pub receivers: Vec<StationEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub position_m: [f64; 3],
    pub velocity_mps: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub sigma_t_s: f64,
    #[serde(default = "default_doppler_scale")]
    pub doppler_scale: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_doppler_scale() -> f64 {
    DEFAULT_DOPPLER_VARIANCE_SCALE
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

/// Optional experiment parameters; every field falls back to a default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias_runs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimators: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage1_passes: Option<usize>,
}

/// The on-disk document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub network: NetworkSection,
    pub target: TargetSection,
    pub noise: NoiseSection,
    #[serde(default, skip_serializing_if = "is_default_experiment")]
    pub experiment: ExperimentSection,
}

fn is_default_experiment(e: &ExperimentSection) -> bool {
    *e == ExperimentSection::default()
}

impl ScenarioFile {
    /// The built-in European network and LEO target, stations in geodetic form.
    pub fn builtin() -> Self {
        ScenarioFile {
            network: NetworkSection {
                transmitters: BUILTIN_TRANSMITTERS
                    .iter()
                    .map(|&(lat, lon, fc)| StationEntry::geodetic(lat, lon).with_carrier(fc))
                    .collect(),
                receivers: BUILTIN_RECEIVERS
                    .iter()
                    .map(|&(lat, lon)| StationEntry::geodetic(lat, lon))
                    .collect(),
            },
            target: TargetSection {
                position_m: BUILTIN_TARGET_POSITION,
                velocity_mps: BUILTIN_TARGET_VELOCITY,
            },
            noise: NoiseSection {
                sigma_t_s: 1e-9,
                doppler_scale: DEFAULT_DOPPLER_VARIANCE_SCALE,
                seed: DEFAULT_SEED,
            },
            experiment: ExperimentSection::default(),
        }
    }
}

/// A validated scenario together with the document it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub network: RadarNetwork,
    pub truth: StateVector,
    pub noise: NoiseModel,
    pub file: ScenarioFile,
}

impl Scenario {
    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        let mut transmitters = Vec::with_capacity(file.network.transmitters.len());
        for (i, entry) in file.network.transmitters.iter().enumerate() {
            let path = format!("network.transmitters[{i}]");
            let position = entry.position(&path)?;
            let fc = entry
                .fc_hz
                .ok_or_else(|| AppError::validation(format!("{path}.fc_hz"), "missing"))?;
            transmitters.push(Transmitter::new(position, fc).map_err(|e| prefix_field(e, &path))?);
        }
        let mut receivers = Vec::with_capacity(file.network.receivers.len());
        for (j, entry) in file.network.receivers.iter().enumerate() {
            let path = format!("network.receivers[{j}]");
            if entry.fc_hz.is_some() {
                return Err(AppError::validation(
                    format!("{path}.fc_hz"),
                    "receivers have no carrier frequency",
                ));
            }
            receivers.push(entry.position(&path)?);
        }
        let network = RadarNetwork::new(transmitters, receivers)?;
        let truth = StateVector::new(
            Vector3::from(file.target.position_m),
            Vector3::from(file.target.velocity_mps),
        )
        .map_err(|e| prefix_field(e, "target"))?;
        let noise = NoiseModel::new(file.noise.sigma_t_s, file.noise.doppler_scale, file.noise.seed)?;
        validate_experiment(&file.experiment)?;
        Ok(Self {
            network,
            truth,
            noise,
            file,
        })
    }

    pub fn builtin() -> Self {
        Self::from_file(ScenarioFile::builtin()).expect("built-in scenario is valid")
    }

    pub fn with_noise(&self, noise: NoiseModel) -> Self {
        let mut out = self.clone();
        out.noise = noise;
        out.file.noise = NoiseSection {
            sigma_t_s: noise.sigma_t,
            doppler_scale: noise.doppler_variance_scale,
            seed: noise.seed,
        };
        out
    }
}

fn validate_experiment(e: &ExperimentSection) -> Result<()> {
    if let Some(grid) = &e.sigma_grid {
        crate::montecarlo::validate_sigma_grid(grid).map_err(|reason| {
            AppError::validation("experiment.sigma_grid", reason)
        })?;
    }
    if e.runs == Some(0) {
        return Err(AppError::validation("experiment.runs", "must be >= 1"));
    }
    if let Some(names) = &e.estimators {
        crate::montecarlo::parse_estimators(&names.join(","))
            .map_err(|reason| AppError::validation("experiment.estimators", reason))?;
    }
    if let Some(p) = e.confidence {
        if !(p > 0.0 && p < 1.0) {
            return Err(AppError::validation("experiment.confidence", "must lie in (0, 1)"));
        }
    }
    if e.stage1_passes == Some(0) {
        return Err(AppError::validation("experiment.stage1_passes", "must be >= 1"));
    }
    Ok(())
}

pub fn parse_scenario(text: &str, origin: &Path) -> Result<Scenario> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|source| AppError::Json {
        path: origin.to_path_buf(),
        source,
    })?;
    Scenario::from_file(file)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_scenario(&text, path)
}

pub fn scenario_to_json(scenario: &Scenario) -> String {
    serde_json::to_string_pretty(&scenario.file).expect("scenario documents always serialize")
}

pub fn write_scenario(scenario: &Scenario, path: &Path) -> Result<()> {
    let mut text = scenario_to_json(scenario);
    text.push('\n');
    fs::write(path, text).map_err(|e| AppError::io(path, e))
}

/// Confidence from the document or the default.
pub fn confidence_or_default(file: &ScenarioFile) -> f64 {
    file.experiment.confidence.unwrap_or(DEFAULT_CONFIDENCE)
}
