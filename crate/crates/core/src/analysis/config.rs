use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::RunError;
use crate::grid::GridConfig;
use crate::ray::LaunchConfig;
use crate::scene::AntennaPattern;

fn default_delta() -> f64 {
    std::f64::consts::PI / 180.0
}
fn default_reflections() -> u32 {
    6
}
fn default_transmissions() -> u32 {
    3
}
fn default_diffractions() -> u32 {
    1
}
fn default_floor() -> f64 {
    -150.0
}
fn default_true() -> bool {
    true
}
fn default_delta_t() -> f64 {
    1e-6
}
fn default_cuboid() -> f64 {
    0.5
}
fn default_slice() -> f64 {
    1.5
}

/// Color scale limits for the power heatmap (dBm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatmapScale {
    pub min_dbm: f64,
    pub max_dbm: f64,
}

/// Simulation run configuration. Every key except `scene` is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Scene file, relative to the config file's directory.
    pub scene: PathBuf,
    /// Overrides every transmitter's carrier frequency.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_hz: Option<f64>,
    /// Overrides every transmitter's power.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_power_dbm: Option<f64>,
    /// Overrides every transmitter's antenna.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antenna: Option<AntennaPattern>,
    #[serde(default)]
    pub rx_antenna: AntennaPattern,
    #[serde(default = "default_delta")]
    pub delta_theta_rad: f64,
    #[serde(default = "default_delta")]
    pub delta_phi_rad: f64,
    #[serde(default = "default_reflections")]
    pub max_reflections: u32,
    #[serde(default = "default_transmissions")]
    pub max_transmissions: u32,
    #[serde(default = "default_diffractions")]
    pub max_diffractions: u32,
    #[serde(default = "default_floor")]
    pub power_floor_db: f64,
    #[serde(default = "default_true")]
    pub diffraction: bool,
    #[serde(default = "default_delta_t")]
    pub delta_t_s: f64,
    #[serde(default = "default_cuboid")]
    pub cuboid_m: f64,
    #[serde(default = "default_slice")]
    pub slice_height_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heatmap: Option<HeatmapScale>,
}

impl RunConfig {
    /// A configuration with every default for `scene`.
    pub fn for_scene(scene: impl Into<PathBuf>) -> Self {
        serde_json::from_value(serde_json::json!({ "scene": scene.into() })).expect("defaults deserialize")
    }

    pub fn launch(&self) -> LaunchConfig {
        LaunchConfig {
            delta_theta: self.delta_theta_rad,
            delta_phi: self.delta_phi_rad,
            max_reflections: self.max_reflections,
            max_transmissions: self.max_transmissions,
            max_diffractions: self.max_diffractions,
            power_floor_db: self.power_floor_db,
            diffraction_enabled: self.diffraction,
        }
    }

    pub fn grid(&self) -> GridConfig {
        GridConfig { cuboid_m: self.cuboid_m, delta_t_s: self.delta_t_s, rx_antenna: self.rx_antenna }
    }

    pub fn validate(&self) -> Result<(), RunError> {
        self.launch().validate().map_err(|e| RunError::Config(e.to_string()))?;
        self.grid().validate().map_err(|e| RunError::Config(e.to_string()))?;
        if let Some(f) = self.frequency_hz {
            if !(f > 0.0 && f.is_finite()) {
                return Err(RunError::Config(format!("frequency_hz must be > 0, got {f}")));
            }
        }
        if self.tx_power_dbm.is_some_and(|p| !p.is_finite()) {
            return Err(RunError::Config("tx_power_dbm must be finite".into()));
        }
        if let Some(h) = self.heatmap {
            if !(h.min_dbm < h.max_dbm) {
                return Err(RunError::Config("heatmap min_dbm must be below max_dbm".into()));
            }
        }
        Ok(())
    }
}

/// Reads a config file and resolves its scene path.
pub fn load_config(path: impl AsRef<Path>) -> Result<(RunConfig, PathBuf), RunError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| RunError::Config(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))?;
    cfg.validate()?;
    let base = path.parent().unwrap_or(Path::new("."));
    let scene = base.join(&cfg.scene);
    Ok((cfg, scene))
}
