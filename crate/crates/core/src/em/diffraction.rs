//! Wedge diffraction: a uniform coefficient for absorbing (soft) wedges that
//! stays finite through the shadow boundary, plus an alternative knife-edge
//! coefficient built on the complex Fresnel-integral factor.
//!
//! The diffracted contribution of an edge is assembled by the tracer as
//!
//! ```text
//!   a_d = a_incident(s1) · D · sqrt(s1 / (s2·(s1+s2))) · exp(-j·2π·s2/λ)
//! ```
//!
//! where `a_incident(s1)` is the field arriving at the edge point and `D` is
//! the value returned by [`diffraction_coeff`]. `D` carries units of √m so
//! that the product above is dimensionless relative to free space.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI, TAU};

use super::fresnel_integral::{knife_edge_factor, transition_function};
use super::wavelength;
use crate::error::EmError;
use crate::geom::Vec3;

/// Maximum allowed deviation from the Keller cone, in radians: the angle the
/// outgoing ray makes with the edge must match the incoming one this closely.
pub const KELLER_CONE_TOLERANCE: f64 = 1e-3;

/// Below this angular distance (radians) from a singular boundary the two
/// cotangent terms switch to their analytic limits.
const BOUNDARY_EPS: f64 = 1e-4;

/// Which diffraction coefficient to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffractionModel {
    /// Uniform wedge coefficient (default): finite and continuous through the
    /// shadow boundary, valid for any exterior angle in (π, 2π].
    Utd,
    /// Absorbing half-plane approximation driven by the complex knife-edge
    /// factor; the wedge faces are ignored except for defining the shadow.
    KnifeEdge,
}

/// A straight diffracting edge between two planar faces.
///
/// `face0_tangent`/`face1_tangent` are unit vectors perpendicular to the edge
/// that point *along* each face away from the edge. The exterior (air) region
/// spans `exterior_angle` radians from face 0 to face 1; a thin screen has
/// `exterior_angle = 2π` and coincident tangents.
#[derive(Debug, Clone, Copy)]
pub struct WedgeGeometry {
    pub edge_origin: Vec3,
    /// Unit direction along the edge, canonicalised by [`WedgeGeometry::new`]
    /// so that rotating `face0_tangent` about it by `exterior_angle` sweeps
    /// the air region and ends on `face1_tangent`.
    pub edge_dir: Vec3,
    pub face0_normal: Vec3,
    pub face0_tangent: Vec3,
    pub face1_normal: Vec3,
    pub face1_tangent: Vec3,
    /// Angle of the air region in radians, in (π, 2π].
    pub exterior_angle: f64,
}

fn angle_in_frame(v: Vec3, x_axis: Vec3, y_axis: Vec3) -> f64 {
    (v.dot(y_axis)).atan2(v.dot(x_axis)).rem_euclid(TAU)
}

/// Absolute angular distance between `a` and `b` on the circle.
fn wrap_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

impl WedgeGeometry {
    /// Validates orthogonality and the exterior-angle convention, flipping
    /// `edge_dir` if needed so the stored frame is right-handed with respect
    /// to the air region.
    pub fn new(
        edge_origin: Vec3,
        edge_dir: Vec3,
        face0_normal: Vec3,
        face0_tangent: Vec3,
        face1_normal: Vec3,
        face1_tangent: Vec3,
        exterior_angle: f64,
    ) -> Result<Self, EmError> {
        if !(exterior_angle > PI + 1e-9 && exterior_angle <= TAU + 1e-9) {
            return Err(EmError::Geometry(format!(
                "wedge exterior angle {exterior_angle} rad outside (π, 2π]"
            )));
        }
        let exterior_angle = exterior_angle.min(TAU);
        let e = edge_dir.normalized();
        let n0 = face0_normal.normalized();
        let t0 = face0_tangent.normalized();
        let n1 = face1_normal.normalized();
        let t1 = face1_tangent.normalized();
        for (name, pair) in [
            ("edge_dir/face0_tangent", e.dot(t0)),
            ("edge_dir/face1_tangent", e.dot(t1)),
            ("edge_dir/face0_normal", e.dot(n0)),
            ("edge_dir/face1_normal", e.dot(n1)),
            ("face0_tangent/face0_normal", t0.dot(n0)),
            ("face1_tangent/face1_normal", t1.dot(n1)),
        ] {
            if pair.abs() > 1e-6 {
                return Err(EmError::Geometry(format!(
                    "wedge frame vectors not orthogonal: {name} dot = {pair}"
                )));
            }
        }

        let build = |e: Vec3| -> Option<WedgeGeometry> {
            let y = e.cross(t0);
            // Face 1 must sit at the far end of the air sweep, and the face
            // normals must point into the air region (+π/2 from each face).
            let phi1 = angle_in_frame(t1, t0, y);
            let face1_ok = if exterior_angle >= TAU - 1e-6 {
                wrap_distance(phi1, 0.0) < 1e-4
            } else {
                wrap_distance(phi1, exterior_angle) < 1e-4
            };
            let n0_ok = wrap_distance(angle_in_frame(n0, t0, y), 0.5 * PI) < 1e-4;
            let n1_ok = wrap_distance(angle_in_frame(n1, t0, y), exterior_angle - 0.5 * PI) < 1e-4;
            (face1_ok && n0_ok && n1_ok).then_some(WedgeGeometry {
                edge_origin,
                edge_dir: e,
                face0_normal: n0,
                face0_tangent: t0,
                face1_normal: n1,
                face1_tangent: t1,
                exterior_angle,
            })
        };
        build(e).or_else(|| build(-e)).ok_or_else(|| {
            EmError::Geometry(
                "wedge face tangents/normals are inconsistent with the exterior angle".into(),
            )
        })
    }

    /// In-plane y axis of the angular frame (`x` is `face0_tangent`).
    fn frame_y(&self) -> Vec3 {
        self.edge_dir.cross(self.face0_tangent)
    }
}

/// One cotangent term of the uniform coefficient, switching to its analytic
/// limit within [`BOUNDARY_EPS`] of a singular boundary. `branch` is +1 for
/// the `(π + β)` term and -1 for the `(π - β)` term.
fn cot_term(n: f64, k_l: f64, beta: f64, branch: f64) -> Complex64 {
    let arg = beta + branch * PI;
    let eps = arg - TAU * n * (arg / (TAU * n)).round();
    if eps.abs() < BOUNDARY_EPS {
        // lim cot(ε/2n)·F(2kL sin²(ε/2)) = n·e^{jπ/4}(sgn(ε)√(2πkL) - 2kLε·e^{jπ/4})
        let root = (TAU * k_l).sqrt();
        let phase4 = Complex64::from_polar(1.0, FRAC_PI_4);
        branch * n * phase4 * (Complex64::new(eps.signum() * root, 0.0) - 2.0 * k_l * eps * phase4)
    } else {
        let half = 0.5 * eps / n;
        let a = 2.0 * (0.5 * eps).sin().powi(2);
        branch * (half.cos() / half.sin()) * transition_function(k_l * a)
    }
}

/// Diffraction coefficient `D` for a ray arriving at a point on the edge
/// along unit vector `d_in` (source → edge) and leaving along `d_out`
/// (edge → receiver), with path segments `s1` (source to edge point) and
/// `s2` (edge point to receiver).
///
/// Errors if the outgoing direction is off the Keller cone by more than
/// [`KELLER_CONE_TOLERANCE`], if either endpoint lies inside the wedge
/// material, or if the ray runs along the edge.
pub fn diffraction_coeff(
    wedge: &WedgeGeometry,
    f_hz: f64,
    d_in: Vec3,
    d_out: Vec3,
    s1: f64,
    s2: f64,
    model: DiffractionModel,
) -> Result<Complex64, EmError> {
    debug_assert!(s1 > 0.0 && s2 > 0.0, "path segments must be positive");
    let e = wedge.edge_dir;
    let beta_in = d_in.dot(e).clamp(-1.0, 1.0).acos();
    let beta_out = d_out.dot(e).clamp(-1.0, 1.0).acos();
    let cone_err = (beta_in - beta_out).abs();
    if cone_err > KELLER_CONE_TOLERANCE {
        return Err(EmError::OffKellerCone(cone_err));
    }
    let sin_beta0 = (0.5 * (beta_in + beta_out)).sin();
    if sin_beta0 < 1e-6 {
        return Err(EmError::Geometry("ray propagates along the diffracting edge".into()));
    }

    let x = wedge.face0_tangent;
    let y = wedge.frame_y();
    // Project the back-to-source and toward-receiver directions into the
    // plane perpendicular to the edge.
    let to_src = -d_in - e * (-d_in).dot(e);
    let to_rx = d_out - e * d_out.dot(e);
    if to_src.norm() < 1e-9 || to_rx.norm() < 1e-9 {
        return Err(EmError::Geometry("ray propagates along the diffracting edge".into()));
    }
    let phi_src = angle_in_frame(to_src, x, y);
    let phi_rx = angle_in_frame(to_rx, x, y);
    let ext = wedge.exterior_angle;
    if phi_src > ext + 1e-9 || phi_rx > ext + 1e-9 {
        return Err(EmError::Geometry(format!(
            "endpoint lies inside the wedge material (φ' = {phi_src:.4}, φ = {phi_rx:.4}, exterior = {ext:.4})"
        )));
    }

    let lambda = wavelength(f_hz);
    let k = TAU / lambda;
    let beta = phi_rx - phi_src;

    match model {
        DiffractionModel::Utd => {
            let n = ext / PI;
            let l = s1 * s2 * sin_beta0 * sin_beta0 / (s1 + s2);
            let sum = cot_term(n, k * l, beta, 1.0) + cot_term(n, k * l, beta, -1.0);
            let front = -Complex64::from_polar(1.0, -FRAC_PI_4)
                / (2.0 * n * (TAU * k).sqrt() * sin_beta0);
            Ok(front * sum)
        }
        DiffractionModel::KnifeEdge => {
            // Bend angle past the forward shadow boundary, positive in shadow.
            let dev = beta.abs() - PI;
            let nu = dev * sin_beta0 * (2.0 * s1 * s2 / (lambda * (s1 + s2))).sqrt();
            let lit_subtraction = if dev < 0.0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            let scale = (s1 * s2 / (s1 + s2)).sqrt();
            Ok((knife_edge_factor(nu) - lit_subtraction) * scale)
        }
    }
}
