//! Multipath enumeration between a transmitter and receiver points:
//! line-of-sight, specular reflections by the image method, and single-edge
//! diffraction, each carrying a complex field amplitude.
//!
//! The per-transmitter machinery ([`TxTracer`]) precomputes mirror-image
//! chains and diffraction edge candidates once, so sweeping a receiver grid
//! costs only back-tracing per point. Output is deterministic: paths are
//! sorted by their interaction-sequence key and amplitudes are summed in that
//! order, so results do not depend on scheduling.

mod edges;

pub use edges::{extract_edges, stationary_point, EdgeCandidate};

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::antenna::{pol_vector, tx_directional_amplitude, AntennaConfig, Orientation};
use crate::em::{diffraction_coeff, DiffractionModel};
use crate::em::{
    complex_permittivity, eval_material, free_space_amplitude, fresnel_coeffs, wavelength,
};
use crate::error::TraceError;
use crate::geom::{Scene, Vec3};

/// Hard cap on the specular-reflection order.
pub const MAX_REFLECTION_ORDER: u32 = 3;

/// Minimum distance (m) between a source and a reflector plane for the
/// mirror image to be meaningful.
const PLANE_EPSILON: f64 = 1e-9;

/// What happened at one point along a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InteractionKind {
    Reflection,
    Diffraction,
}

/// A single reflection or diffraction event.
#[derive(Debug, Clone, Copy)]
pub struct Interaction {
    pub kind: InteractionKind,
    /// Location of the specular/diffraction point (on the face or edge).
    pub point: Vec3,
    /// Face index (reflection) or diffraction-edge index (diffraction).
    pub face_or_edge: u32,
    /// Reflection: |cos| of the angle between the incident ray and the face
    /// normal. Diffraction: |cos| of the angle between the ray and the edge.
    pub cos_incidence: f64,
}

/// One propagation path with its complex field gain (antenna pattern,
/// spreading, and interaction coefficients included; transmit power not).
#[derive(Debug, Clone)]
pub struct PropagationPath {
    pub tx_index: usize,
    /// Interactions in propagation order; empty = line of sight.
    pub interactions: Vec<Interaction>,
    /// Unfolded geometric length in metres.
    pub total_length: f64,
    pub amplitude: Complex64,
}

impl PropagationPath {
    pub fn is_los(&self) -> bool {
        self.interactions.is_empty()
    }

    /// Field gain in dB (20·log10 of the amplitude magnitude).
    pub fn gain_db(&self) -> f64 {
        20.0 * self.amplitude.norm().log10()
    }

    /// Deduplication / ordering key: the ordered interaction sequence.
    /// Reflection sorts before diffraction at equal position.
    pub fn dedup_key(&self) -> Vec<(u8, u32)> {
        self.interactions
            .iter()
            .map(|i| {
                let kind = match i.kind {
                    InteractionKind::Reflection => 0u8,
                    InteractionKind::Diffraction => 1u8,
                };
                (kind, i.face_or_edge)
            })
            .collect()
    }
}

/// How multipath contributions combine into a power gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Combining {
    /// Complex phasor sum |Σ a|² (deterministic ray-tracer convention).
    #[default]
    Coherent,
    /// Power sum Σ |a|², for sensitivity analysis.
    Incoherent,
}

/// Tracer knobs. Serialized form uses kebab-case field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct TracerConfig {
    /// Specular bounces per path, 0..=3.
    pub max_reflection_order: u32,
    pub diffraction_enabled: bool,
    pub diffraction_model: DiffractionModel,
    /// Paths with field gain below this are dropped.
    pub path_floor_db: f64,
    /// Per-link cap; exceeding it truncates to the strongest paths and is
    /// reported, never silent.
    pub max_paths_per_link: usize,
}

impl Default for TracerConfig {
    fn default() -> Self {
        TracerConfig {
            max_reflection_order: 3,
            diffraction_enabled: true,
            diffraction_model: DiffractionModel::Utd,
            path_floor_db: -250.0,
            max_paths_per_link: 10_000,
        }
    }
}

impl TracerConfig {
    pub fn validate(&self) -> Result<(), TraceError> {
        if self.max_reflection_order > MAX_REFLECTION_ORDER {
            return Err(TraceError::Config(format!(
                "max_reflection_order {} exceeds the hard cap {}",
                self.max_reflection_order, MAX_REFLECTION_ORDER
            )));
        }
        if self.max_paths_per_link == 0 {
            return Err(TraceError::Config("max_paths_per_link must be ≥ 1".into()));
        }
        if !self.path_floor_db.is_finite() {
            return Err(TraceError::Config(format!(
                "path_floor_db must be finite, got {}",
                self.path_floor_db
            )));
        }
        Ok(())
    }
}

/// A transmitter as the tracer sees it: position, carrier, and radiation
/// pattern. `index` tags the paths it produces (used when pooling links
/// from several transmitters).
#[derive(Debug, Clone)]
pub struct Emitter {
    pub index: usize,
    pub position: Vec3,
    pub carrier_hz: f64,
    pub antenna: AntennaConfig,
    pub orientation: Orientation,
}

impl Emitter {
    /// Unit-gain isotropic source, vertical polarization, no tilt.
    pub fn isotropic(position: Vec3, carrier_hz: f64) -> Emitter {
        Emitter {
            index: 0,
            position,
            carrier_hz,
            antenna: AntennaConfig::isotropic(),
            orientation: Orientation { bearing: 0.0, downtilt: 0.0 },
        }
    }

    fn amplitude_toward(&self, dir: Vec3) -> Complex64 {
        tx_directional_amplitude(dir, &self.antenna, &self.orientation)
    }
}

/// Result of tracing one link, with the truncation flag the run report needs.
#[derive(Debug, Clone)]
pub struct LinkTrace {
    /// Sorted by [`PropagationPath::dedup_key`]; sum amplitudes in this order
    /// for bitwise-reproducible results.
    pub paths: Vec<PropagationPath>,
    /// True if more than `max_paths_per_link` candidates survived the floor
    /// and only the strongest were kept.
    pub truncated: bool,
}

/// A complex-valued field vector (Jones-style, in global coordinates).
#[derive(Debug, Clone, Copy)]
struct FieldVec {
    x: Complex64,
    y: Complex64,
    z: Complex64,
}

impl FieldVec {
    fn scaled(dir: Vec3, s: Complex64) -> FieldVec {
        FieldVec { x: s * dir.x, y: s * dir.y, z: s * dir.z }
    }

    fn dot_real(self, v: Vec3) -> Complex64 {
        self.x * v.x + self.y * v.y + self.z * v.z
    }

    fn scale(self, s: Complex64) -> FieldVec {
        FieldVec { x: self.x * s, y: self.y * s, z: self.z * s }
    }

    fn add(self, o: FieldVec) -> FieldVec {
        FieldVec { x: self.x + o.x, y: self.y + o.y, z: self.z + o.z }
    }
}

/// One node in the shared image-chain tree: the face sequence is the path
/// from a root to this node, `image` is the source mirrored through all of
/// the sequence's planes.
#[derive(Debug, Clone, Copy)]
struct ChainNode {
    face: u32,
    image: Vec3,
    /// Parent node index, `u32::MAX` for first-order nodes.
    parent: u32,
}

/// Per-transmitter tracing engine. Construction precomputes material
/// permittivities at the carrier, the image-chain tree (with face-pair
/// visibility pruning), and the diffraction edge list; [`TxTracer::trace`]
/// then runs per receiver point.
pub struct TxTracer<'a> {
    scene: &'a Scene,
    emitter: Emitter,
    cfg: TracerConfig,
    lambda: f64,
    /// Complex relative permittivity per scene material index.
    eta: Vec<Complex64>,
    /// Linear amplitude floor derived from `path_floor_db`.
    floor_amp: f64,
    chains: Vec<ChainNode>,
    edges: Vec<EdgeCandidate>,
}

impl<'a> TxTracer<'a> {
    pub fn new(emitter: &Emitter, scene: &'a Scene, cfg: &TracerConfig) -> Result<Self, TraceError> {
        cfg.validate()?;
        emitter
            .antenna
            .validate()
            .map_err(|e| TraceError::Config(e.to_string()))?;
        emitter
            .orientation
            .validate()
            .map_err(|e| TraceError::Config(e.to_string()))?;
        if !(emitter.carrier_hz.is_finite() && emitter.carrier_hz > 0.0) {
            return Err(TraceError::Config(format!(
                "carrier frequency must be positive, got {}",
                emitter.carrier_hz
            )));
        }
        let eta = scene
            .materials
            .iter()
            .map(|(_, m)| {
                let (eps_r, sigma) = eval_material(m, emitter.carrier_hz)?;
                Ok(complex_permittivity(eps_r, sigma, emitter.carrier_hz).as_complex())
            })
            .collect::<Result<Vec<_>, crate::error::EmError>>()?;

        let chains = build_chains(scene, emitter.position, cfg.max_reflection_order);
        let edges = if cfg.diffraction_enabled { extract_edges(scene) } else { Vec::new() };

        Ok(TxTracer {
            scene,
            emitter: emitter.clone(),
            cfg: cfg.clone(),
            lambda: wavelength(emitter.carrier_hz),
            eta,
            floor_amp: 10f64.powf(cfg.path_floor_db / 20.0),
            chains,
            edges,
        })
    }

    pub fn emitter(&self) -> &Emitter {
        &self.emitter
    }

    pub fn config(&self) -> &TracerConfig {
        &self.cfg
    }

    /// Enumerate all paths to `rx`, sorted by dedup key, floored, and
    /// truncated to the configured budget.
    pub fn trace(&self, rx: Vec3) -> LinkTrace {
        let mut paths = Vec::new();
        if let Some(p) = self.los(rx) {
            paths.push(p);
        }
        self.reflections(rx, &mut paths);
        if self.cfg.diffraction_enabled {
            self.diffraction(rx, &mut paths);
        }
        self.assemble(paths)
    }

    fn los(&self, rx: Vec3) -> Option<PropagationPath> {
        let tx = self.emitter.position;
        let d = rx - tx;
        let len = d.norm();
        if len < PLANE_EPSILON || self.scene.occluded(tx, rx) {
            return None;
        }
        let dir = d / len;
        let amplitude =
            self.emitter.amplitude_toward(dir) * free_space_amplitude(self.emitter.carrier_hz, len);
        Some(PropagationPath {
            tx_index: self.emitter.index,
            interactions: Vec::new(),
            total_length: len,
            amplitude,
        })
    }

    fn reflections(&self, rx: Vec3, out: &mut Vec<PropagationPath>) {
        for idx in 0..self.chains.len() {
            if let Some(p) = self.back_trace(idx, rx) {
                out.push(p);
            }
        }
    }

    /// Validate one image chain against a receiver: find the specular points
    /// back-to-front, require each inside its face, then check occlusion and
    /// build the path amplitude via polarization-resolved Fresnel transport.
    fn back_trace(&self, node: usize, rx: Vec3) -> Option<PropagationPath> {
        let tx = self.emitter.position;

        // Face sequence and images, tx-first.
        let mut seq: [(u32, Vec3); MAX_REFLECTION_ORDER as usize] =
            [(0, Vec3::ZERO); MAX_REFLECTION_ORDER as usize];
        let mut k = 0usize;
        let mut cur = node as u32;
        while cur != u32::MAX {
            let n = &self.chains[cur as usize];
            seq[k] = (n.face, n.image);
            k += 1;
            cur = n.parent;
        }
        seq[..k].reverse();

        let unfolded = (seq[k - 1].1 - rx).norm();
        if unfolded < PLANE_EPSILON {
            return None;
        }

        // Specular points, found walking rx -> deepest image.
        let mut pts: [Vec3; MAX_REFLECTION_ORDER as usize] =
            [Vec3::ZERO; MAX_REFLECTION_ORDER as usize];
        let mut q = rx;
        for m in (0..k).rev() {
            let (fi, image) = seq[m];
            let face = &self.scene.faces[fi as usize];
            let sq = face.signed_distance(q);
            let si = face.signed_distance(image);
            if sq * si >= 0.0 {
                return None; // segment does not cross the reflector plane
            }
            let t = sq / (sq - si);
            let s = q + (image - q) * t;
            if !face.contains(s) {
                return None;
            }
            pts[m] = s;
            q = s;
        }

        // Occlusion along the real (folded) polyline.
        let mut prev = tx;
        for m in 0..k {
            if self.scene.occluded(prev, pts[m]) {
                return None;
            }
            prev = pts[m];
        }
        if self.scene.occluded(prev, rx) {
            return None;
        }

        // Amplitude: launch the polarized field, reflect it at each bounce,
        // project onto the receive polarization, spread over the unfolded
        // length.
        let d_first = (pts[0] - tx).normalized();
        let mut field = FieldVec::scaled(
            pol_vector(d_first, self.emitter.antenna.polarization),
            self.emitter.amplitude_toward(d_first),
        );
        let mut interactions = Vec::with_capacity(k);
        let mut p_prev = tx;
        for m in 0..k {
            let (fi, _) = seq[m];
            let face = &self.scene.faces[fi as usize];
            let d_in = (pts[m] - p_prev).normalized();
            let p_next = if m + 1 < k { pts[m + 1] } else { rx };
            let d_out = (p_next - pts[m]).normalized();

            let n = if d_in.dot(face.normal) > 0.0 { -face.normal } else { face.normal };
            let cos_theta = -d_in.dot(n);
            let (g_te, g_tm) = fresnel_coeffs(self.eta[face.material as usize], cos_theta);
            field = reflect_field(field, d_in, d_out, n, g_te, g_tm);

            interactions.push(Interaction {
                kind: InteractionKind::Reflection,
                point: pts[m],
                face_or_edge: fi,
                cos_incidence: cos_theta,
            });
            p_prev = pts[m];
        }
        let d_last = (rx - pts[k - 1]).normalized();
        let rx_pol = pol_vector(d_last, self.emitter.antenna.polarization);
        let amplitude = field.dot_real(rx_pol)
            * free_space_amplitude(self.emitter.carrier_hz, unfolded);

        debug_assert!(
            {
                let mut sum = 0.0;
                let mut a = tx;
                for p in &pts[..k] {
                    sum += (*p - a).norm();
                    a = *p;
                }
                sum += (rx - a).norm();
                (sum - unfolded).abs() <= 1e-9 * (1.0 + unfolded)
            },
            "folded segment lengths must equal the unfolded image distance"
        );

        Some(PropagationPath {
            tx_index: self.emitter.index,
            interactions,
            total_length: unfolded,
            amplitude,
        })
    }

    fn diffraction(&self, rx: Vec3, out: &mut Vec<PropagationPath>) {
        let tx = self.emitter.position;
        for (ei, cand) in self.edges.iter().enumerate() {
            let Some((p, s1, s2)) = stationary_point(cand.a, cand.b, tx, rx) else {
                continue;
            };
            if self.scene.occluded(tx, p) || self.scene.occluded(p, rx) {
                continue;
            }
            let d_in = (p - tx) / s1;
            let d_out = (rx - p) / s2;
            let Ok(coeff) = diffraction_coeff(
                &cand.wedge,
                self.emitter.carrier_hz,
                d_in,
                d_out,
                s1,
                s2,
                self.cfg.diffraction_model,
            ) else {
                continue; // direction outside the exterior region
            };
            // Spherical-wave spreading to the edge, the edge coefficient with
            // its caustic-free divergence factor, then phase over the second
            // leg: together 1/(s1·s2·(1+s2/s1))^(1/2) · e^{-jk(s1+s2)} · D.
            let spread = (s1 / (s2 * (s1 + s2))).sqrt();
            let amplitude = self.emitter.amplitude_toward(d_in)
                * free_space_amplitude(self.emitter.carrier_hz, s1)
                * coeff
                * spread
                * Complex64::from_polar(1.0, -TAU * s2 / self.lambda);
            out.push(PropagationPath {
                tx_index: self.emitter.index,
                interactions: vec![Interaction {
                    kind: InteractionKind::Diffraction,
                    point: p,
                    face_or_edge: ei as u32,
                    cos_incidence: d_in.dot(cand.wedge.edge_dir).abs(),
                }],
                total_length: s1 + s2,
                amplitude,
            });
        }
    }

    /// Sort by dedup key, drop duplicates and sub-floor paths, then truncate
    /// to the strongest `max_paths_per_link` (re-sorted by key afterwards).
    fn assemble(&self, paths: Vec<PropagationPath>) -> LinkTrace {
        let mut keyed: Vec<(Vec<(u8, u32)>, PropagationPath)> =
            paths.into_iter().map(|p| (p.dedup_key(), p)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        keyed.dedup_by(|a, b| a.0 == b.0);
        keyed.retain(|(_, p)| p.amplitude.norm() >= self.floor_amp);

        let truncated = keyed.len() > self.cfg.max_paths_per_link;
        if truncated {
            keyed.sort_by(|a, b| {
                b.1.amplitude
                    .norm()
                    .partial_cmp(&a.1.amplitude.norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then_with(|| a.0.cmp(&b.0))
            });
            keyed.truncate(self.cfg.max_paths_per_link);
            keyed.sort_by(|a, b| a.0.cmp(&b.0));
        }
        LinkTrace { paths: keyed.into_iter().map(|(_, p)| p).collect(), truncated }
    }
}

/// Reflect a transverse field vector at a surface with oriented normal `n`
/// (facing the incident ray): decompose into the perpendicular (TE) and
/// parallel (TM) components of the incidence plane, scale by the Fresnel
/// coefficients, and re-attach the parallel component to the reflected ray.
fn reflect_field(
    e: FieldVec,
    d_in: Vec3,
    d_out: Vec3,
    n: Vec3,
    g_te: Complex64,
    g_tm: Complex64,
) -> FieldVec {
    let c = d_in.cross(n);
    let cn = c.norm();
    if cn < 1e-9 {
        // Normal incidence: the decomposition is degenerate but γ_tm = −γ_te
        // there, which collapses to a single scalar on the transverse field.
        return e.scale(g_te);
    }
    let te = c / cn;
    let tm_in = te.cross(d_in);
    let tm_out = te.cross(d_out);
    let a_te = e.dot_real(te) * g_te;
    let a_tm = e.dot_real(tm_in) * g_tm;
    FieldVec::scaled(te, a_te).add(FieldVec::scaled(tm_out, a_tm))
}

/// Build the image-chain tree: breadth-first over reflection orders, pruning
/// face pairs that cannot be consecutive (the next face must have area on
/// the side of the current plane that the reflected beam occupies).
fn build_chains(scene: &Scene, tx: Vec3, max_order: u32) -> Vec<ChainNode> {
    let nf = scene.faces.len();
    let mut nodes: Vec<ChainNode> = Vec::new();
    if max_order == 0 || nf == 0 {
        return nodes;
    }

    // pair_side[i][j]: does face j have a vertex strictly on the
    // positive/negative side of face i's plane?
    let mut front = vec![false; nf * nf];
    let mut back = vec![false; nf * nf];
    for i in 0..nf {
        let fi = &scene.faces[i];
        for j in 0..nf {
            if i == j {
                continue;
            }
            let mut has_front = false;
            let mut has_back = false;
            for tri in &scene.faces[j].tris {
                for v in tri {
                    let sd = fi.signed_distance(*v);
                    has_front |= sd > PLANE_EPSILON;
                    has_back |= sd < -PLANE_EPSILON;
                }
            }
            front[i * nf + j] = has_front;
            back[i * nf + j] = has_back;
        }
    }

    // First order: every face the transmitter is strictly off-plane of.
    for (f, face) in scene.faces.iter().enumerate() {
        if face.signed_distance(tx).abs() > PLANE_EPSILON {
            nodes.push(ChainNode { face: f as u32, image: face.mirror(tx), parent: u32::MAX });
        }
    }

    let mut level_start = 0usize;
    for _depth in 2..=max_order {
        let level_end = nodes.len();
        for parent in level_start..level_end {
            let ChainNode { face: i, image, parent: grand } = nodes[parent];
            // The beam reflected off face i travels on the side of its plane
            // where the previous source sits.
            let prev_source =
                if grand == u32::MAX { tx } else { nodes[grand as usize].image };
            let side = scene.faces[i as usize].signed_distance(prev_source);
            if side.abs() <= PLANE_EPSILON {
                continue;
            }
            let vis = if side > 0.0 { &front } else { &back };
            for j in 0..nf {
                if j as u32 == i || !vis[(i as usize) * nf + j] {
                    continue;
                }
                let fj = &scene.faces[j];
                if fj.signed_distance(image).abs() <= PLANE_EPSILON {
                    continue;
                }
                nodes.push(ChainNode {
                    face: j as u32,
                    image: fj.mirror(image),
                    parent: parent as u32,
                });
            }
        }
        level_start = level_end;
    }
    nodes
}

/// Line-of-sight path, if the direct segment is clear.
pub fn trace_los(tx: &Emitter, rx_pos: Vec3, scene: &Scene) -> Option<PropagationPath> {
    let d = rx_pos - tx.position;
    let len = d.norm();
    if len < PLANE_EPSILON || scene.occluded(tx.position, rx_pos) {
        return None;
    }
    let dir = d / len;
    let amplitude = tx.amplitude_toward(dir) * free_space_amplitude(tx.carrier_hz, len);
    Some(PropagationPath {
        tx_index: tx.index,
        interactions: Vec::new(),
        total_length: len,
        amplitude,
    })
}

/// Specular reflection paths up to `cfg.max_reflection_order`, sorted by
/// dedup key and floored. For per-link truncation reporting use [`TxTracer`].
pub fn trace_reflections(
    tx: &Emitter,
    rx_pos: Vec3,
    scene: &Scene,
    cfg: &TracerConfig,
) -> Result<Vec<PropagationPath>, TraceError> {
    let cfg = TracerConfig { diffraction_enabled: false, ..cfg.clone() };
    let tracer = TxTracer::new(tx, scene, &cfg)?;
    let mut paths = Vec::new();
    tracer.reflections(rx_pos, &mut paths);
    Ok(tracer.assemble(paths).paths)
}

/// Single-edge diffraction paths. Requires `cfg.diffraction_enabled`.
pub fn trace_diffraction(
    tx: &Emitter,
    rx_pos: Vec3,
    scene: &Scene,
    cfg: &TracerConfig,
) -> Result<Vec<PropagationPath>, TraceError> {
    if !cfg.diffraction_enabled {
        return Err(TraceError::Config(
            "trace_diffraction requires diffraction_enabled".into(),
        ));
    }
    let cfg = TracerConfig { max_reflection_order: 0, ..cfg.clone() };
    let tracer = TxTracer::new(tx, scene, &cfg)?;
    let mut paths = Vec::new();
    tracer.diffraction(rx_pos, &mut paths);
    Ok(tracer.assemble(paths).paths)
}

/// Union of LoS, reflections, and diffraction, deduplicated by interaction
/// sequence and sorted by that key.
pub fn trace_all(
    tx: &Emitter,
    rx_pos: Vec3,
    scene: &Scene,
    cfg: &TracerConfig,
) -> Result<Vec<PropagationPath>, TraceError> {
    Ok(TxTracer::new(tx, scene, cfg)?.trace(rx_pos).paths)
}

/// Combine path amplitudes into a linear power gain. Amplitudes are summed
/// in slice order; keep the tracer's key-sorted order for reproducibility.
pub fn path_gain(paths: &[PropagationPath], combining: Combining) -> f64 {
    match combining {
        Combining::Coherent => paths
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, p| acc + p.amplitude)
            .norm_sqr(),
        Combining::Incoherent => paths.iter().map(|p| p.amplitude.norm_sqr()).sum(),
    }
}
