//! Shared fixtures and independent oracles for the integration suites.

#![allow(dead_code)] // each test binary uses a different subset

use std::path::PathBuf;

use serde_json::{json, Value};

use raycover::geom::{Scene, Vec3};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn load_fixture_scene(name: &str) -> Scene {
    raycover::load_scene(&fixture_path(name)).expect("fixture scene loads")
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).expect("fixture file reads")
}

// ---------------------------------------------------------------- builders

pub fn vec_json(v: Vec3) -> Value {
    json!([v.x, v.y, v.z])
}

/// A two-triangle quad with the given corner order (winding as listed).
pub fn quad_object(id: &str, material: &str, corners: [Vec3; 4]) -> Value {
    json!({
        "id": id,
        "material": material,
        "vertices": corners.iter().map(|&c| vec_json(c)).collect::<Vec<_>>(),
        "triangles": [[0, 1, 2], [0, 2, 3]],
    })
}

/// Axis-aligned box between `min` and `max` with outward-facing winding.
pub fn box_object(id: &str, material: &str, min: Vec3, max: Vec3) -> Value {
    let (x0, y0, z0) = (min.x, min.y, min.z);
    let (x1, y1, z1) = (max.x, max.y, max.z);
    json!({
        "id": id,
        "material": material,
        "vertices": [
            [x0, y0, z0], [x1, y0, z0], [x1, y1, z0], [x0, y1, z0],
            [x0, y0, z1], [x1, y0, z1], [x1, y1, z1], [x0, y1, z1],
        ],
        "triangles": [
            [0, 3, 2], [0, 2, 1],
            [4, 5, 6], [4, 6, 7],
            [0, 1, 5], [0, 5, 4],
            [2, 3, 7], [2, 7, 6],
            [0, 4, 7], [0, 7, 3],
            [1, 2, 6], [1, 6, 5],
        ],
    })
}

pub fn scene_json(objects: &[Value]) -> String {
    scene_json_with_materials(&[], objects)
}

/// Scene document with extra/overridden materials, `(name, a, b, c, d)`.
pub fn scene_json_with_materials(
    materials: &[(&str, f64, f64, f64, f64)],
    objects: &[Value],
) -> String {
    let mats: serde_json::Map<String, Value> = materials
        .iter()
        .map(|&(name, a, b, c, d)| (name.to_string(), json!({"a": a, "b": b, "c": c, "d": d})))
        .collect();
    json!({
        "version": 1,
        "units": "m",
        "materials": mats,
        "objects": objects,
    })
    .to_string()
}

// ------------------------------------------------- exhaustive image oracle

/// One specular path found by the exhaustive oracle: the interaction key
/// (kind 0 = reflection, face index) and the unfolded length in metres.
pub type OraclePath = (Vec<(u8, u32)>, f64);

/// Exact mirror back-trace of one candidate face sequence, with no pruning
/// shortcuts: mirror the source through the sequence, walk back from the
/// receiver intersecting each image segment with its face plane, require the
/// specular point on the face, then check the folded polyline for blockage.
/// The empty sequence tests line of sight. Returns the interaction key and
/// the unfolded length, or `None` if the sequence carries no path.
pub fn validate_sequence(scene: &Scene, tx: Vec3, rx: Vec3, seq: &[usize]) -> Option<OraclePath> {
    let k = seq.len();
    if k == 0 {
        if (rx - tx).norm() > 1e-9 && !scene.occluded(tx, rx) {
            return Some((Vec::new(), (rx - tx).norm()));
        }
        return None;
    }
    let mut images = [Vec3::ZERO; 8];
    let mut src = tx;
    for (m, &f) in seq.iter().enumerate() {
        src = scene.faces[f].mirror(src);
        images[m] = src;
    }
    let mut pts = [Vec3::ZERO; 8];
    let mut q = rx;
    for m in (0..k).rev() {
        let face = &scene.faces[seq[m]];
        let sq = face.signed_distance(q);
        let si = face.signed_distance(images[m]);
        if sq * si >= 0.0 {
            return None; // the segment to the image does not cross the plane
        }
        let s = q + (images[m] - q) * (sq / (sq - si));
        if !face.contains(s) {
            return None;
        }
        pts[m] = s;
        q = s;
    }
    let mut prev = tx;
    for p in &pts[..k] {
        if scene.occluded(prev, *p) {
            return None;
        }
        prev = *p;
    }
    if scene.occluded(prev, rx) {
        return None;
    }
    let key = seq.iter().map(|&f| (0u8, f as u32)).collect();
    Some((key, (images[k - 1] - rx).norm()))
}

/// Brute-force image-method reference: try *every* face sequence up to
/// `order` bounces — no visibility pruning, no candidate tree — keeping the
/// ones `validate_sequence` accepts. Results are sorted by interaction key.
pub fn enumerate_specular(scene: &Scene, tx: Vec3, rx: Vec3, order: u32) -> Vec<OraclePath> {
    let nf = scene.faces.len();
    let mut found: Vec<OraclePath> = Vec::new();
    found.extend(validate_sequence(scene, tx, rx, &[]));
    for f1 in 0..nf {
        found.extend(validate_sequence(scene, tx, rx, &[f1]));
        if order < 2 {
            continue;
        }
        for f2 in 0..nf {
            found.extend(validate_sequence(scene, tx, rx, &[f1, f2]));
            if order < 3 {
                continue;
            }
            for f3 in 0..nf {
                found.extend(validate_sequence(scene, tx, rx, &[f1, f2, f3]));
            }
        }
    }
    found.sort_by(|a, b| a.0.cmp(&b.0));
    found
}
