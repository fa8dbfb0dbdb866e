//! Scene assembly: parse a scene document, resolve materials, extract planar
//! faces, and build the acceleration structure used by all ray queries.

use std::collections::BTreeMap;
use std::path::Path;

use super::bvh::{Bvh, SceneTriangle};
use super::face::{extract_planar_faces, PlanarFace, NORMAL_TOLERANCE};
use super::format::SceneDoc;
use super::mesh::TriangleMesh;
use super::vec3::{Ray, Vec3};
use crate::em::{builtin_materials, MaterialParams};
use crate::error::SceneError;

/// Endpoint offset for occlusion segments (metres): hits closer than this to
/// either endpoint do not count, so surface points don't occlude themselves.
pub const OCCLUSION_EPSILON: f64 = 1e-6;

/// Result of a nearest-hit query.
#[derive(Debug, Clone, Copy)]
pub struct Hit {
    /// Distance along the (unit-direction) ray.
    pub t: f64,
    pub point: Vec3,
    /// Index into [`Scene::faces`].
    pub face: u32,
    /// Index into [`Scene::triangles`].
    pub tri: u32,
    /// |cos| of the angle between the ray and the face normal.
    pub cos_incidence: f64,
}

/// A fully assembled scene: meshes, resolved materials, planar faces, and
/// the triangle BVH. Construction validates everything eagerly so queries
/// can't fail.
#[derive(Debug, Clone)]
pub struct Scene {
    pub meshes: Vec<TriangleMesh>,
    /// Material table in deterministic (name-sorted) order; faces refer to
    /// entries by index. Built-ins come first unless overridden by name.
    pub materials: Vec<(String, MaterialParams)>,
    pub faces: Vec<PlanarFace>,
    /// Scene-global triangle soup, ordered mesh by mesh.
    pub triangles: Vec<SceneTriangle>,
    bvh: Bvh,
}

impl Scene {
    pub fn from_doc(doc: &SceneDoc) -> Result<Scene, SceneError> {
        // Material table: built-ins overlaid with the document's entries,
        // then sorted by name for a stable index assignment.
        let mut table: BTreeMap<String, MaterialParams> = builtin_materials().clone();
        for (name, m) in &doc.materials {
            let params = MaterialParams { a: m.a, b: m.b, c: m.c, d: m.d };
            params
                .validate(name)
                .map_err(|e| SceneError::Validation(e.to_string()))?;
            table.insert(name.clone(), params);
        }
        let materials: Vec<(String, MaterialParams)> =
            table.into_iter().collect();
        let index_of = |name: &str| materials.binary_search_by(|(n, _)| n.as_str().cmp(name)).ok();

        let mut meshes = Vec::with_capacity(doc.objects.len());
        let mut faces: Vec<PlanarFace> = Vec::new();
        let mut triangles: Vec<SceneTriangle> = Vec::new();
        let mut seen_ids = std::collections::HashSet::new();
        for obj in &doc.objects {
            if !seen_ids.insert(obj.id.clone()) {
                return Err(SceneError::Validation(format!(
                    "duplicate object id '{}'",
                    obj.id
                )));
            }
            let material_idx = index_of(&obj.material).ok_or_else(|| {
                SceneError::Validation(format!(
                    "object '{}' references unknown material '{}'",
                    obj.id, obj.material
                ))
            })? as u32;
            let mesh = TriangleMesh {
                id: obj.id.clone(),
                material: obj.material.clone(),
                vertices: obj.vertices.iter().map(|v| Vec3::new(v[0], v[1], v[2])).collect(),
                triangles: obj.triangles.clone(),
            };
            mesh.validate()?;

            let mesh_index = meshes.len() as u32;
            let tri_base = triangles.len() as u32;
            let mut mesh_faces =
                extract_planar_faces(&mesh, mesh_index, material_idx, tri_base, NORMAL_TOLERANCE)?;

            // Triangles enter the soup in mesh order, each tagged with the
            // planar face that owns it.
            let face_base = faces.len() as u32;
            let mut owner = vec![u32::MAX; mesh.triangles.len()];
            for (fi, f) in mesh_faces.iter().enumerate() {
                for &t in &f.tri_indices {
                    owner[(t - tri_base) as usize] = face_base + fi as u32;
                }
            }
            for (k, _) in mesh.triangles.iter().enumerate() {
                let [v0, v1, v2] = mesh.triangle_vertices(k);
                triangles.push(SceneTriangle { v0, v1, v2, face: owner[k] });
            }
            faces.append(&mut mesh_faces);
            meshes.push(mesh);
        }

        let bvh = Bvh::build(&triangles);
        Ok(Scene { meshes, materials, faces, triangles, bvh })
    }

    pub fn from_json(text: &str) -> Result<Scene, SceneError> {
        Scene::from_doc(&SceneDoc::from_str(text)?)
    }

    pub fn material_index(&self, name: &str) -> Option<u32> {
        self.materials
            .binary_search_by(|(n, _)| n.as_str().cmp(name))
            .ok()
            .map(|i| i as u32)
    }

    /// Nearest surface hit with `t_min < t <= t_max`.
    pub fn intersect(&self, ray: &Ray, t_min: f64, t_max: f64) -> Option<Hit> {
        let h = self.bvh.intersect(&self.triangles, ray, t_min, t_max)?;
        let face = self.triangles[h.tri as usize].face;
        let cos = ray.dir.dot(self.faces[face as usize].normal).abs().min(1.0);
        Some(Hit { t: h.t, point: ray.at(h.t), face, tri: h.tri, cos_incidence: cos })
    }

    /// True if any surface blocks the open segment between `a` and `b`,
    /// ignoring hits within [`OCCLUSION_EPSILON`] of either endpoint.
    pub fn occluded(&self, a: Vec3, b: Vec3) -> bool {
        let d = b - a;
        let len = d.norm();
        if len <= 2.0 * OCCLUSION_EPSILON {
            return false;
        }
        let ray = Ray::new(a, d);
        self.bvh.any_hit(&self.triangles, &ray, OCCLUSION_EPSILON, len - OCCLUSION_EPSILON)
    }

    /// Inside/outside parity test: counts surface crossings along a fixed
    /// slightly tilted direction so lattice-aligned points don't graze shared
    /// edges. Odd count means `p` is interior to some object.
    pub fn contains_point(&self, p: Vec3) -> bool {
        let dir = Vec3::new(1e-3, 1.618e-3, 1.0);
        let ray = Ray::new(p, dir);
        self.bvh.count_hits(&self.triangles, &ray, 1e-9, f64::INFINITY) % 2 == 1
    }

    /// Axis-aligned bounds over all vertices, or `None` for an empty scene.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        let mut it = self.meshes.iter().flat_map(|m| m.vertices.iter());
        let first = *it.next()?;
        let (mut lo, mut hi) = (first, first);
        for &v in it {
            lo = Vec3::new(lo.x.min(v.x), lo.y.min(v.y), lo.z.min(v.z));
            hi = Vec3::new(hi.x.max(v.x), hi.y.max(v.y), hi.z.max(v.z));
        }
        Some((lo, hi))
    }
}

/// Load and assemble a scene from a JSON file.
pub fn load_scene(path: &Path) -> Result<Scene, SceneError> {
    let text = std::fs::read_to_string(path).map_err(|source| SceneError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Scene::from_json(&text)
}
