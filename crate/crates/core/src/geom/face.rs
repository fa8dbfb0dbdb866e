//! Planar-face extraction: groups edge-adjacent coplanar triangles so the
//! image method can treat a tessellated wall or roof as a single reflector.

use std::collections::HashMap;

use super::mesh::TriangleMesh;
use super::vec3::Vec3;
use crate::error::SceneError;

/// Max vertex distance from the shared plane for two triangles to merge.
pub const COPLANAR_TOLERANCE: f64 = 1e-6;

/// Max angle (radians) between triangle normals for two triangles to merge.
pub const NORMAL_TOLERANCE: f64 = 1e-3;

/// In-plane slack (metres) for point-in-face containment tests. Specular
/// points that land exactly on a face boundary count as inside.
pub const CONTAINMENT_TOLERANCE: f64 = 1e-7;

/// A maximal group of coplanar, edge-connected triangles from one mesh.
#[derive(Debug, Clone)]
pub struct PlanarFace {
    /// Unit plane normal (orientation follows the triangle winding).
    pub normal: Vec3,
    /// Plane offset: `normal · p == offset` for points `p` on the plane.
    pub offset: f64,
    /// Outer boundary loop in winding order (representative; containment
    /// tests use the source triangles, not this polygon).
    pub polygon: Vec<Vec3>,
    /// Index into the scene material table.
    pub material: u32,
    /// Index of the source mesh within the scene.
    pub mesh: u32,
    /// Global triangle ids (scene triangle order) forming this face.
    pub tri_indices: Vec<u32>,
    /// Vertex coordinates of the member triangles, for containment tests.
    pub(crate) tris: Vec<[Vec3; 3]>,
}

impl PlanarFace {
    pub fn signed_distance(&self, p: Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }

    /// Mirror image of `p` across the face plane.
    pub fn mirror(&self, p: Vec3) -> Vec3 {
        p - self.normal * (2.0 * self.signed_distance(p))
    }

    /// True if `p` (assumed on or near the plane) lies on the face, within
    /// [`CONTAINMENT_TOLERANCE`] of its boundary.
    pub fn contains(&self, p: Vec3) -> bool {
        'tri: for t in &self.tris {
            for e in 0..3 {
                let a = t[e];
                let b = t[(e + 1) % 3];
                let edge = b - a;
                let s = edge.cross(p - a).dot(self.normal) / edge.norm();
                if s < -CONTAINMENT_TOLERANCE {
                    continue 'tri;
                }
            }
            return true;
        }
        false
    }
}

/// Quantized vertex key for welding coincident vertices (1 nm grid).
fn weld_key(v: Vec3) -> (i64, i64, i64) {
    let q = |x: f64| (x * 1e9).round() as i64;
    (q(v.x), q(v.y), q(v.z))
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, i: usize) -> usize {
        if self.0[i] != i {
            let r = self.find(self.0[i]);
            self.0[i] = r;
        }
        self.0[i]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Group a mesh's triangles into planar faces.
///
/// Two triangles merge iff they share a full edge, their normals agree within
/// `normal_tolerance` radians, and each one's vertices lie within
/// [`COPLANAR_TOLERANCE`] of the other's plane. `tri_base` is the global id
/// of the mesh's first triangle in the scene's triangle order.
pub fn extract_planar_faces(
    mesh: &TriangleMesh,
    mesh_index: u32,
    material: u32,
    tri_base: u32,
    normal_tolerance: f64,
) -> Result<Vec<PlanarFace>, SceneError> {
    let n = mesh.triangles.len();
    let normals: Vec<Vec3> = (0..n).map(|k| mesh.triangle_normal(k)).collect();
    let verts: Vec<[Vec3; 3]> = (0..n).map(|k| mesh.triangle_vertices(k)).collect();

    // Edge map over welded vertex keys: edge -> triangles using it.
    let mut edge_map: HashMap<((i64, i64, i64), (i64, i64, i64)), Vec<usize>> = HashMap::new();
    for (k, tri) in verts.iter().enumerate() {
        for e in 0..3 {
            let a = weld_key(tri[e]);
            let b = weld_key(tri[(e + 1) % 3]);
            let key = if a <= b { (a, b) } else { (b, a) };
            edge_map.entry(key).or_default().push(k);
        }
    }

    let cos_tol = normal_tolerance.cos();
    let coplanar = |i: usize, j: usize| -> bool {
        if normals[i].dot(normals[j]) < cos_tol {
            return false;
        }
        let within = |tri: &[Vec3; 3], n: Vec3, off: f64| {
            tri.iter().all(|&v| (n.dot(v) - off).abs() <= COPLANAR_TOLERANCE)
        };
        let off_i = normals[i].dot(verts[i][0]);
        let off_j = normals[j].dot(verts[j][0]);
        within(&verts[j], normals[i], off_i) && within(&verts[i], normals[j], off_j)
    };

    let mut uf = UnionFind::new(n);
    for tris in edge_map.values() {
        for a in 0..tris.len() {
            for b in a + 1..tris.len() {
                if coplanar(tris[a], tris[b]) {
                    uf.union(tris[a], tris[b]);
                }
            }
        }
    }

    // Collect groups in deterministic order (by smallest member index).
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of: HashMap<usize, usize> = HashMap::new();
    for k in 0..n {
        let root = uf.find(k);
        let g = *group_of.entry(root).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(k);
    }

    let mut faces = Vec::with_capacity(groups.len());
    for members in &groups {
        // Area-weighted mean normal and offset.
        let mut nsum = Vec3::ZERO;
        for &k in members {
            let [a, b, c] = verts[k];
            nsum = nsum + (b - a).cross(c - a) * 0.5; // area-scaled normal
        }
        let normal = nsum.normalized();
        let mut offset = 0.0;
        let mut count = 0.0;
        for &k in members {
            for v in verts[k] {
                offset += normal.dot(v);
                count += 1.0;
            }
        }
        offset /= count;

        let polygon = boundary_loop(mesh, members, &verts)?;
        faces.push(PlanarFace {
            normal,
            offset,
            polygon,
            material,
            mesh: mesh_index,
            tri_indices: members.iter().map(|&k| tri_base + k as u32).collect(),
            tris: members.iter().map(|&k| verts[k]).collect(),
        });
    }
    Ok(faces)
}

/// Chain the group's once-used edges into the outer boundary loop, keeping
/// triangle winding order. If the face has holes, the longest loop wins.
fn boundary_loop(
    mesh: &TriangleMesh,
    members: &[usize],
    verts: &[[Vec3; 3]],
) -> Result<Vec<Vec3>, SceneError> {
    type Key = (i64, i64, i64);
    let mut edge_count: HashMap<(Key, Key), u32> = HashMap::new();
    let mut directed: Vec<(Key, Key, Vec3, Vec3)> = Vec::new();
    for &k in members {
        for e in 0..3 {
            let a = verts[k][e];
            let b = verts[k][(e + 1) % 3];
            let (ka, kb) = (weld_key(a), weld_key(b));
            let key = if ka <= kb { (ka, kb) } else { (kb, ka) };
            *edge_count.entry(key).or_insert(0) += 1;
            directed.push((ka, kb, a, b));
        }
    }
    // Boundary edges appear exactly once (in undirected terms).
    let mut next: HashMap<Key, (Key, Vec3, Vec3)> = HashMap::new();
    for (ka, kb, a, b) in directed {
        let key = if ka <= kb { (ka, kb) } else { (kb, ka) };
        if edge_count[&key] == 1 {
            next.insert(ka, (kb, a, b));
        }
    }
    if next.is_empty() {
        return Err(SceneError::Validation(format!(
            "object '{}': a planar face has no boundary (non-manifold tessellation)",
            mesh.id
        )));
    }

    let mut best: Vec<Vec3> = Vec::new();
    let mut remaining = next;
    while !remaining.is_empty() {
        // Deterministic start: smallest vertex key still unused.
        let start = *remaining.keys().min().unwrap();
        let mut cur = start;
        let mut loop_pts: Vec<Vec3> = Vec::new();
        loop {
            let Some((nk, a, _b)) = remaining.remove(&cur) else {
                return Err(SceneError::Validation(format!(
                    "object '{}': planar face boundary does not close into a loop",
                    mesh.id
                )));
            };
            loop_pts.push(a);
            cur = nk;
            if cur == start {
                break;
            }
        }
        if loop_pts.len() > best.len() {
            best = loop_pts;
        }
    }
    Ok(best)
}
