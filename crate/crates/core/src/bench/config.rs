use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::baseline::Scheme;
use crate::array::{Geometry2D, SensingScene, SignalModel, SpatialAngles};
use crate::error::{Error, Result};
use crate::placement2d::ScaConfig;
use crate::region::Region;

/// Physical parameters of a scenario, in wavelengths where applicable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub antennas: usize,
    #[serde(default = "one_usize")]
    pub snapshots: usize,
    #[serde(default = "one")]
    pub wavelength: f64,
    #[serde(default = "one")]
    pub signal_power: f64,
    #[serde(default = "one")]
    pub beta_abs: f64,
    #[serde(default)]
    pub beta_phase: Option<f64>,
    pub snr_db: f64,
    pub min_spacing: f64,
    pub u: f64,
    #[serde(default)]
    pub v: Option<f64>,
    #[serde(default)]
    pub signal_model: SignalModel,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

impl SceneConfig {
    pub fn scene(&self, snr_db: f64) -> Result<SensingScene> {
        let angles = match self.v {
            Some(v) => SpatialAngles::new(self.u, v)?,
            None => SpatialAngles::from_u(self.u)?,
        };
        let mut scene = SensingScene {
            snapshots: self.snapshots,
            wavelength: self.wavelength,
            signal_power: self.signal_power,
            noise_power: 1.0,
            beta_abs: self.beta_abs,
            beta_phase: self.beta_phase,
            angles,
            min_spacing: self.min_spacing,
            signal_model: self.signal_model,
        };
        scene.set_snr_db(snr_db);
        scene.validate()?;
        Ok(scene)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    /// Received SNR in dB.
    Snr,
    /// Antenna count `N`.
    Antennas,
    /// Segment length, square side or circle radius.
    Aperture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    pub length: f64,
}

/// One experiment: a scene, where the antennas may move, which layouts to
/// compare and what to sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub grid_step: Option<f64>,
    pub schemes: Vec<Scheme>,
    pub scene: SceneConfig,
    #[serde(default)]
    pub segment: Option<SegmentConfig>,
    #[serde(default)]
    pub region: Option<Region>,
    pub sweep: SweepConfig,
    #[serde(default)]
    pub sca: ScaConfig,
    #[serde(default)]
    pub explicit: Option<Geometry2D>,
    /// Output path for the CSV; the JSON mirror sits next to it.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Also write each layout as `<output stem>_<scheme>_<sweep>_layout.csv`.
    #[serde(default)]
    pub save_layouts: bool,
    /// Also write a correlation map per layout at this grid step.
    #[serde(default)]
    pub correlation_step: Option<f64>,
}

fn default_trials() -> usize {
    200
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_toml(&text)
    }

    pub fn is_planar(&self) -> bool {
        self.region.is_some()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match (&self.segment, &self.region) {
            (Some(_), Some(_)) => return bad("give either [segment] or [region], not both".into()),
            (None, None) => return bad("a [segment] or [region] table is required".into()),
            _ => {}
        }
        if let Some(seg) = &self.segment {
            if !(seg.length > 0.0 && seg.length.is_finite()) {
                return bad(format!("segment length must be positive, got {}", seg.length));
            }
        }
        if let Some(r) = &self.region {
            r.validate()?;
        }
        if self.schemes.is_empty() {
            return bad("at least one scheme is required".into());
        }
        for s in &self.schemes {
            if let Some(p) = s.planar() {
                if p != self.is_planar() {
                    return bad(format!(
                        "scheme {s} does not fit a {} scenario",
                        if self.is_planar() { "planar" } else { "linear" }
                    ));
                }
            }
            if *s == Scheme::Explicit && self.explicit.is_none() {
                return bad("scheme explicit needs an [explicit] geometry".into());
            }
            if *s == Scheme::Explicit && !self.is_planar() {
                return bad("explicit geometries are planar; use a [region]".into());
            }
        }
        if self.is_planar() != self.scene.v.is_some() {
            return bad("planar scenarios need scene.v; linear ones must omit it".into());
        }
        if self.sweep.values.is_empty() {
            return bad("sweep.values is empty".into());
        }
        for v in &self.sweep.values {
            let ok = match self.sweep.axis {
                SweepAxis::Snr => v.is_finite(),
                SweepAxis::Antennas => *v >= 2.0 && v.fract() == 0.0,
                SweepAxis::Aperture => *v > 0.0 && v.is_finite(),
            };
            if !ok {
                return bad(format!("invalid sweep value {v} for axis {:?}", self.sweep.axis));
            }
        }
        if let Some(step) = self.grid_step {
            if !(step > 0.0 && step <= 1.0) {
                return bad(format!("grid_step must lie in (0, 1], got {step}"));
            }
        }
        if let Some(step) = self.correlation_step {
            if !(step > 0.0 && step <= 1.0) {
                return bad(format!("correlation_step must lie in (0, 1], got {step}"));
            }
        }
        self.sca.validate()?;
        self.scene(self.scene.snr_db)?;
        Ok(())
    }

    fn scene(&self, snr: f64) -> Result<SensingScene> {
        self.scene.scene(snr)
    }
}
