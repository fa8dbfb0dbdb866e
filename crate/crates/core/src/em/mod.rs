//! Electromagnetic primitives: frequency-dependent materials, Fresnel
//! reflection coefficients, free-space spreading, and wedge diffraction.
//!
//! Phasor convention: time dependence `exp(+jωt)`, propagation phase
//! `exp(-j·2πd/λ)`. Lossy media therefore carry a *negative* imaginary part in
//! their complex relative permittivity.

mod diffraction;
mod fresnel_integral;

pub use diffraction::{diffraction_coeff, DiffractionModel, WedgeGeometry};
pub use fresnel_integral::{fresnel_cs, knife_edge_factor, transition_function};

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::EmError;

/// Speed of light in vacuum (m/s).
pub const C0: f64 = 2.997_924_58e8;
/// Vacuum permittivity (F/m).
pub const EPS0: f64 = 8.8542e-12;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;

pub fn wavelength(f_hz: f64) -> f64 {
    C0 / f_hz
}

/// Power-law material: `eps_r = a·f_ghz^b`, `sigma = c·f_ghz^d` (S/m),
/// valid for carrier frequencies of 1–100 GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl MaterialParams {
    pub fn validate(&self, name: &str) -> Result<(), EmError> {
        let ok = self.a > 0.0
            && self.c >= 0.0
            && self.a.is_finite()
            && self.b.is_finite()
            && self.c.is_finite()
            && self.d.is_finite();
        if ok {
            Ok(())
        } else {
            Err(EmError::Geometry(format!(
                "material '{name}' has invalid power-law parameters (need a > 0, c >= 0, all finite)"
            )))
        }
    }
}

/// Evaluate a material at `f_hz`, returning `(eps_r, sigma_s_per_m)`.
pub fn eval_material(m: &MaterialParams, f_hz: f64) -> Result<(f64, f64), EmError> {
    let f_ghz = f_hz / 1e9;
    if !(1.0..=100.0).contains(&f_ghz) {
        return Err(EmError::FrequencyRange(f_hz));
    }
    Ok((m.a * f_ghz.powf(m.b), m.c * f_ghz.powf(m.d)))
}

/// Complex relative permittivity in the lossy convention: the physical value
/// is `eps_real - j·loss` (imaginary part non-positive under `exp(+jωt)`).
/// `loss` stores the magnitude, which is always >= 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexPermittivity {
    pub eps_real: f64,
    pub loss: f64,
}

impl ComplexPermittivity {
    /// The complex permittivity `eta = eps_real - j·loss`.
    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.eps_real, -self.loss)
    }
}

/// `eta = eps_r - j·sigma / (2π f ε0)`.
pub fn complex_permittivity(eps_r: f64, sigma: f64, f_hz: f64) -> ComplexPermittivity {
    ComplexPermittivity { eps_real: eps_r, loss: sigma / (std::f64::consts::TAU * f_hz * EPS0) }
}

/// Fresnel reflection coefficients `(gamma_te, gamma_tm)` for a planar
/// boundary between air and a medium of complex permittivity `eta`, at
/// incidence cosine `cos_theta` (angle from the surface normal).
///
/// TE is the field component perpendicular to the incidence plane, TM the
/// in-plane component. Sign conventions follow the tangential-field basis:
/// a perfect conductor gives `gamma_te = -1` and `gamma_tm = +1`.
pub fn fresnel_coeffs(eta: Complex64, cos_theta: f64) -> (Complex64, Complex64) {
    debug_assert!((0.0..=1.0).contains(&cos_theta), "cos_theta out of range: {cos_theta}");
    let sin2 = 1.0 - cos_theta * cos_theta;
    // Principal branch: Re >= 0 and Im <= 0 for lossy eta, keeping |gamma| <= 1.
    let root = (eta - sin2).sqrt();
    let te = (cos_theta - root) / (cos_theta + root);
    let tm = (eta * cos_theta - root) / (eta * cos_theta + root);
    (te, tm)
}

/// Magnitude of the free-space field gain over `d_m`: `λ/(4πd)`.
///
/// Doubling `d` halves this value bitwise (the divisor scales by an exact
/// power of two), which is the form the halving invariant is stated in; the
/// complex amplitude's `norm()` reproduces it only to within an ulp because
/// of the polar→cartesian round trip.
pub fn free_space_gain(f_hz: f64, d_m: f64) -> f64 {
    debug_assert!(d_m > 0.0, "free-space distance must be positive");
    wavelength(f_hz) / (4.0 * std::f64::consts::PI * d_m)
}

/// Free-space field gain over distance `d_m`: magnitude `λ/(4πd)`, phase
/// `-2πd/λ`. `|a|²` is the Friis path gain between isotropic antennas.
pub fn free_space_amplitude(f_hz: f64, d_m: f64) -> Complex64 {
    let phase = -(std::f64::consts::TAU * d_m / wavelength(f_hz));
    Complex64::from_polar(free_space_gain(f_hz, d_m), phase)
}

#[derive(Debug, Deserialize)]
struct MaterialFile {
    #[allow(dead_code)]
    version: u32,
    #[allow(dead_code)]
    comment: String,
    materials: BTreeMap<String, MaterialParams>,
}

/// Built-in material table (concrete, brick, wood, glass, ground), shipped as
/// a versioned data file. Scene documents may override entries by name.
pub fn builtin_materials() -> &'static BTreeMap<String, MaterialParams> {
    static TABLE: OnceLock<BTreeMap<String, MaterialParams>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let file: MaterialFile = serde_json::from_str(include_str!("../../data/materials_v1.json"))
            .expect("embedded material table is valid");
        for (name, m) in &file.materials {
            m.validate(name).expect("embedded material table entries are valid");
        }
        file.materials
    })
}
