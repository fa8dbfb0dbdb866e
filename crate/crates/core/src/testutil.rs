//! Programmatic scene-document builders shared by unit tests.

use serde_json::{json, Value};

use crate::geom::Vec3;

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
            [0, 3, 2], [0, 2, 1], // bottom, -z
            [4, 5, 6], [4, 6, 7], // top, +z
            [0, 1, 5], [0, 5, 4], // -y
            [2, 3, 7], [2, 7, 6], // +y
            [0, 4, 7], [0, 7, 3], // -x
            [1, 2, 6], [1, 6, 5], // +x
        ],
    })
}

/// Arbitrary triangle soup object from raw coordinate/index lists.
pub fn object_from(id: &str, material: &str, vertices: &[[f64; 3]], triangles: &[[u32; 3]]) -> Value {
    json!({
        "id": id,
        "material": material,
        "vertices": vertices,
        "triangles": triangles,
    })
}

pub fn scene_json(objects: &[Value]) -> String {
    scene_json_with_materials(&[], objects)
}

/// Scene document with extra/overridden materials, `(name, a, b, c, d)`.
pub fn scene_json_with_materials(materials: &[(&str, f64, f64, f64, f64)], objects: &[Value]) -> String {
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
