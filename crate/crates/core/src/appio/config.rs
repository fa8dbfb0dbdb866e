//! Deployment configuration: a strict TOML schema with every default
//! resolved at parse time, so the value set that drove a run can be echoed
//! verbatim into its manifest.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::antenna::{AntennaConfig, Orientation};
use crate::error::ConfigError;
use crate::geom::Vec3;
use crate::radiomap::{noise_power_dbm, validate_transmitters, Transmitter};
use crate::service::{ServiceThreshold, ServiceThresholds};
use crate::tracer::{Combining, TracerConfig};

/// Fully resolved run configuration.
///
/// Unknown keys are rejected; absent keys take the documented defaults
/// (10 GHz carrier, 400 MHz bandwidth, 7 dB noise figure at 290 K, 2 m grid
/// at 1.5 m receiver height, 30 dBm sites, third-order tracing with
/// diffraction on).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct DeploymentConfig {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub temperature_k: f64,
    pub combining: Combining,
    pub output_dir: String,
    pub grid: GridConfig,
    pub tracer: TracerConfig,
    pub transmitters: Vec<TransmitterConfig>,
    /// Service rate targets; defaults to the standard presets.
    pub thresholds: Vec<ServiceThreshold>,
}

impl Default for DeploymentConfig {
    fn default() -> Self {
        DeploymentConfig {
            carrier_hz: 10.0e9,
            bandwidth_hz: 400.0e6,
            noise_figure_db: 7.0,
            temperature_k: 290.0,
            combining: Combining::default(),
            output_dir: "out".into(),
            grid: GridConfig::default(),
            tracer: TracerConfig::default(),
            transmitters: Vec::new(),
            thresholds: ServiceThresholds::presets().entries().to_vec(),
        }
    }
}

/// Receiver grid layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct GridConfig {
    /// `[x-min, y-min, x-max, y-max]` in metres; omitted means "use the
    /// scene's horizontal bounding box".
    pub region: Option<[f64; 4]>,
    pub spacing: f64,
    pub rx_height: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { region: None, spacing: 2.0, rx_height: 1.5 }
    }
}

/// One base-station site; the carrier is global (single-frequency network).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct TransmitterConfig {
    pub site_id: String,
    /// `[x, y, z]` in metres.
    pub position: [f64; 3],
    #[serde(default = "default_power_dbm")]
    pub power_dbm: f64,
    #[serde(default)]
    pub antenna: AntennaConfig,
    #[serde(default)]
    pub orientation: Orientation,
}

fn default_power_dbm() -> f64 {
    30.0
}

impl DeploymentConfig {
    /// Semantic validation beyond what the schema can express.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("carrier-hz", self.carrier_hz),
            ("bandwidth-hz", self.bandwidth_hz),
            ("temperature-k", self.temperature_k),
            ("grid.spacing", self.grid.spacing),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::Validation(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.noise_figure_db.is_finite() && self.noise_figure_db >= 0.0) {
            return Err(ConfigError::Validation(format!(
                "noise-figure-db must be nonnegative, got {}",
                self.noise_figure_db
            )));
        }
        if !(self.grid.rx_height.is_finite() && self.grid.rx_height >= 0.0) {
            return Err(ConfigError::Validation(format!(
                "grid.rx-height must be nonnegative, got {}",
                self.grid.rx_height
            )));
        }
        if let Some([x0, y0, x1, y1]) = self.grid.region {
            if ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) || x1 <= x0 || y1 <= y0 {
                return Err(ConfigError::Validation(format!(
                    "grid.region must be a finite [x-min, y-min, x-max, y-max] \
                     rectangle, got [{x0}, {y0}, {x1}, {y1}]"
                )));
            }
        }
        if self.output_dir.is_empty() {
            return Err(ConfigError::Validation("output-dir must be non-empty".into()));
        }
        self.tracer
            .validate()
            .map_err(|e| ConfigError::Validation(e.to_string()))?;
        validate_transmitters(&self.to_transmitters())?;
        self.service_thresholds()?;
        Ok(())
    }

    /// Engine-facing transmitter list with the global carrier applied.
    pub fn to_transmitters(&self) -> Vec<Transmitter> {
        self.transmitters
            .iter()
            .map(|t| Transmitter {
                site_id: t.site_id.clone(),
                position: Vec3::new(t.position[0], t.position[1], t.position[2]),
                power_dbm: t.power_dbm,
                carrier_hz: self.carrier_hz,
                antenna: t.antenna,
                orientation: t.orientation,
            })
            .collect()
    }

    pub fn service_thresholds(&self) -> Result<ServiceThresholds, ConfigError> {
        ServiceThresholds::new(self.thresholds.clone())
            .map_err(|e| ConfigError::Validation(e.to_string()))
    }

    /// Thermal noise floor implied by bandwidth, noise figure, temperature.
    pub fn noise_dbm(&self) -> f64 {
        noise_power_dbm(self.bandwidth_hz, self.noise_figure_db, self.temperature_k)
    }

    /// Canonical JSON used for the manifest echo and the config hash;
    /// field order is fixed by the struct definition.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Parse and validate a TOML configuration document.
pub fn parse_config(text: &str) -> Result<DeploymentConfig, ConfigError> {
    let cfg: DeploymentConfig = toml::from_str(text)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Read, parse, and validate a configuration file.
pub fn load_config(path: &Path) -> Result<DeploymentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}
