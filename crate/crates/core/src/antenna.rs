//! Transmit antenna model: directional element pattern, uniform planar array
//! factor, and orientation (bearing + downtilt) handling.
//!
//! The element pattern follows the standard cellular parametric form: a
//! parabolic-in-dB rolloff in both cuts with side-lobe floors, 0 dB at
//! boresight. The array is uniform, boresight-steered, and power-normalized
//! (`AF/√(rows·cols)`), so the array adds `10·log10(rows·cols)` of peak gain
//! on top of the element gain.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::geom::Vec3;

/// Field polarization of the transmit element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Polarization {
    /// E-field along the global θ̂ direction (vertical for horizontal rays).
    #[default]
    Vertical,
    /// E-field along the global φ̂ direction (parallel to the ground plane).
    Horizontal,
}

/// Element + array configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct AntennaConfig {
    /// Peak element gain, dBi.
    pub element_gain_max: f64,
    /// Vertical 3 dB beamwidth, degrees.
    pub theta_3db: f64,
    /// Horizontal 3 dB beamwidth, degrees.
    pub phi_3db: f64,
    /// Side-lobe attenuation floor of the vertical cut, dB.
    pub sla_v: f64,
    /// Front-to-back attenuation ceiling, dB.
    pub a_max: f64,
    /// Vertical element count.
    pub rows: u32,
    /// Horizontal element count.
    pub cols: u32,
    /// Element spacing in wavelengths.
    pub spacing: f64,
    pub polarization: Polarization,
}

impl Default for AntennaConfig {
    fn default() -> Self {
        AntennaConfig {
            element_gain_max: 8.0,
            theta_3db: 65.0,
            phi_3db: 65.0,
            sla_v: 30.0,
            a_max: 30.0,
            rows: 8,
            cols: 8,
            spacing: 0.5,
            polarization: Polarization::Vertical,
        }
    }
}

impl AntennaConfig {
    /// A 0 dBi single isotropic element (pattern flat in every direction).
    pub fn isotropic() -> Self {
        AntennaConfig {
            element_gain_max: 0.0,
            sla_v: 0.0,
            a_max: 0.0,
            rows: 1,
            cols: 1,
            ..AntennaConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.rows < 1 || self.cols < 1 {
            return Err(ConfigError::Validation(format!(
                "antenna array must have at least one element, got {}x{}",
                self.rows, self.cols
            )));
        }
        if !(self.spacing > 0.0) {
            return Err(ConfigError::Validation(format!(
                "antenna element spacing must be positive, got {}",
                self.spacing
            )));
        }
        for (name, v) in [("theta_3db", self.theta_3db), ("phi_3db", self.phi_3db)] {
            if !(v > 0.0 && v < 180.0) {
                return Err(ConfigError::Validation(format!(
                    "antenna {name} must be in (0°, 180°), got {v}"
                )));
            }
        }
        if self.sla_v < 0.0 || self.a_max < 0.0 {
            return Err(ConfigError::Validation(
                "antenna side-lobe levels sla_v and a_max must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Mounting orientation of a transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct Orientation {
    /// Degrees clockwise from north (+y).
    pub bearing: f64,
    /// Degrees below horizontal.
    pub downtilt: f64,
}

impl Default for Orientation {
    fn default() -> Self {
        Orientation { bearing: 0.0, downtilt: 6.0 }
    }
}

impl Orientation {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..360.0).contains(&self.bearing) {
            return Err(ConfigError::Validation(format!(
                "bearing must be in [0°, 360°), got {}",
                self.bearing
            )));
        }
        if !(-90.0..=90.0).contains(&self.downtilt) {
            return Err(ConfigError::Validation(format!(
                "downtilt must be in [−90°, 90°], got {}",
                self.downtilt
            )));
        }
        Ok(())
    }

    /// Local frame axes expressed in global coordinates: `x` to the right of
    /// boresight, `y` along boresight, `z` array-up.
    fn axes(&self) -> (Vec3, Vec3, Vec3) {
        let b = self.bearing.to_radians();
        let t = self.downtilt.to_radians();
        let x = Vec3::new(b.cos(), -b.sin(), 0.0);
        let y = Vec3::new(b.sin() * t.cos(), b.cos() * t.cos(), -t.sin());
        let z = x.cross(y);
        (x, y, z)
    }
}

/// Element pattern attenuation in dB (≤ 0). `theta` is the zenith angle in
/// degrees (boresight 90°), `phi` the azimuth in degrees off boresight.
pub fn element_pattern_db(theta: f64, phi: f64, cfg: &AntennaConfig) -> f64 {
    debug_assert!((0.0..=180.0).contains(&theta), "zenith angle out of range: {theta}");
    let a_v = -f64::min(12.0 * ((theta - 90.0) / cfg.theta_3db).powi(2), cfg.sla_v);
    let a_h = -f64::min(12.0 * (phi / cfg.phi_3db).powi(2), cfg.a_max);
    -f64::min(-(a_v + a_h), cfg.a_max)
}

/// Un-normalized array factor for a direction in the array's local frame
/// (boresight `+y`, columns along `x`, rows along `z`). Elements are centered
/// so the factor is real and maximal at broadside.
pub fn array_factor(direction_local: Vec3, cfg: &AntennaConfig) -> Complex64 {
    let psi_x = std::f64::consts::TAU * cfg.spacing * direction_local.x;
    let psi_z = std::f64::consts::TAU * cfg.spacing * direction_local.z;
    let line = |n: u32, psi: f64| -> Complex64 {
        let center = 0.5 * (n as f64 - 1.0);
        (0..n)
            .map(|k| Complex64::from_polar(1.0, psi * (k as f64 - center)))
            .sum()
    };
    line(cfg.cols, psi_x) * line(cfg.rows, psi_z)
}

/// Complex directional field gain of a transmitter toward `direction_global`:
/// element pattern × element gain × power-normalized array factor, evaluated
/// in the frame set by `orient`.
pub fn tx_directional_amplitude(
    direction_global: Vec3,
    cfg: &AntennaConfig,
    orient: &Orientation,
) -> Complex64 {
    let (ax, ay, az) = orient.axes();
    let local = Vec3::new(
        direction_global.dot(ax),
        direction_global.dot(ay),
        direction_global.dot(az),
    );
    let theta = local.z.clamp(-1.0, 1.0).acos().to_degrees();
    let phi = local.x.atan2(local.y).to_degrees();
    let element_db = cfg.element_gain_max + element_pattern_db(theta, phi, cfg);
    let af = array_factor(local, cfg) / ((cfg.rows * cfg.cols) as f64).sqrt();
    af * 10f64.powf(element_db / 20.0)
}

/// Unit E-field vector for a wave propagating along `dir`, in the global
/// spherical basis. Vertical uses θ̂ (which reduces to `-z` for horizontal
/// rays), horizontal uses φ̂. Both are perpendicular to `dir`.
pub fn pol_vector(dir: Vec3, pol: Polarization) -> Vec3 {
    let sin_t = (dir.x * dir.x + dir.y * dir.y).sqrt();
    let (cos_p, sin_p) = if sin_t < 1e-12 {
        (1.0, 0.0) // zenith-parallel ray: pick the φ = 0 meridian
    } else {
        (dir.x / sin_t, dir.y / sin_t)
    };
    let cos_t = dir.z.clamp(-1.0, 1.0);
    match pol {
        Polarization::Vertical => Vec3::new(cos_t * cos_p, cos_t * sin_p, -sin_t),
        Polarization::Horizontal => Vec3::new(-sin_p, cos_p, 0.0),
    }
}
