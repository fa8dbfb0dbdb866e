//! Diffraction edge candidates: convex exterior wedges and open-sheet
//! (knife) boundaries extracted from the scene's planar faces.

use std::collections::BTreeMap;

use crate::em::WedgeGeometry;
use crate::geom::{Scene, Vec3};

/// A straight edge segment eligible for single-edge diffraction.
#[derive(Debug, Clone)]
pub struct EdgeCandidate {
    /// Segment endpoints (in the canonicalised `wedge.edge_dir` order).
    pub a: Vec3,
    pub b: Vec3,
    /// Local wedge frame; `wedge.edge_origin == a`.
    pub wedge: WedgeGeometry,
    /// Owning planar faces. Both entries equal for an open-sheet boundary.
    pub faces: [u32; 2],
}

/// Quantized vertex key for matching coincident edge endpoints (1 nm grid,
/// the same welding resolution the face extractor uses).
fn weld_key(v: Vec3) -> (i64, i64, i64) {
    let q = |x: f64| (x * 1e9).round() as i64;
    (q(v.x), q(v.y), q(v.z))
}

/// One triangle's claim on an undirected edge.
#[derive(Debug, Clone, Copy)]
struct EdgeUse {
    face: u32,
    mesh: u32,
    /// Triangle vertex opposite the edge; fixes the into-face tangent.
    opposite: Vec3,
    a: Vec3,
    b: Vec3,
}

/// Scan the scene for diffraction candidates.
///
/// An edge qualifies when, within one mesh, it is used by exactly one planar
/// face on each side and the air region around it spans more than π
/// (a convex exterior wedge), or when it bounds a single open face (a knife
/// edge, exterior angle 2π). Concave edges, tessellation seams interior to a
/// face, and non-manifold junctions are skipped. Output order is
/// deterministic: sorted by the welded endpoint keys.
pub fn extract_edges(scene: &Scene) -> Vec<EdgeCandidate> {
    type Key = ((i64, i64, i64), (i64, i64, i64));
    let mut uses: BTreeMap<Key, Vec<EdgeUse>> = BTreeMap::new();

    for tri in &scene.triangles {
        let face = tri.face;
        let mesh = scene.faces[face as usize].mesh;
        let vs = [tri.v0, tri.v1, tri.v2];
        for e in 0..3 {
            let a = vs[e];
            let b = vs[(e + 1) % 3];
            let opposite = vs[(e + 2) % 3];
            let (ka, kb) = (weld_key(a), weld_key(b));
            let (key, a, b) = if ka <= kb { ((ka, kb), a, b) } else { ((kb, ka), b, a) };
            uses.entry(key).or_default().push(EdgeUse { face, mesh, opposite, a, b });
        }
    }

    let mut out = Vec::new();
    for users in uses.values() {
        // Edges are only stitched within a mesh; coincident geometry from
        // different objects stays independent.
        if users.iter().any(|u| u.mesh != users[0].mesh) {
            continue;
        }
        match users.len() {
            1 => {
                let u = users[0];
                if let Some(c) = knife_candidate(scene, u) {
                    out.push(c);
                }
            }
            2 => {
                if users[0].face == users[1].face {
                    continue; // seam inside one planar face
                }
                if let Some(c) = wedge_candidate(scene, users[0], users[1]) {
                    out.push(c);
                }
            }
            _ => {} // non-manifold; not a clean wedge
        }
    }
    out
}

/// Unit tangent pointing from the edge into the face interior.
fn into_face_tangent(edge_dir: Vec3, edge_point: Vec3, opposite: Vec3) -> Option<Vec3> {
    let raw = opposite - edge_point;
    let perp = raw - edge_dir * raw.dot(edge_dir);
    let n = perp.norm();
    if n < 1e-9 {
        return None; // degenerate sliver triangle
    }
    Some(perp / n)
}

fn knife_candidate(scene: &Scene, u: EdgeUse) -> Option<EdgeCandidate> {
    let edge = u.b - u.a;
    let len = edge.norm();
    if len < 1e-9 {
        return None;
    }
    let e = edge / len;
    let n0 = scene.faces[u.face as usize].normal;
    let t0 = into_face_tangent(e, u.a, u.opposite)?;
    // Open sheet: the "far" face is the same sheet seen from behind.
    let wedge = WedgeGeometry::new(u.a, e, n0, t0, -n0, t0, std::f64::consts::TAU).ok()?;
    let (a, b) = if wedge.edge_dir.dot(e) > 0.0 { (u.a, u.b) } else { (u.b, u.a) };
    Some(EdgeCandidate { a, b, wedge: reorigin(wedge, a), faces: [u.face, u.face] })
}

fn wedge_candidate(scene: &Scene, u0: EdgeUse, u1: EdgeUse) -> Option<EdgeCandidate> {
    let edge = u0.b - u0.a;
    let len = edge.norm();
    if len < 1e-9 {
        return None;
    }
    let mut e = edge / len;
    let n0 = scene.faces[u0.face as usize].normal;
    let n1 = scene.faces[u1.face as usize].normal;
    let t0 = into_face_tangent(e, u0.a, u0.opposite)?;
    let t1 = into_face_tangent(e, u1.a, u1.opposite)?;

    // Orient the edge so (t0, n0, e) is right-handed, then measure how far
    // face 1's tangent sits around the air side (where n0 points).
    if e.cross(t0).dot(n0) < 0.0 {
        e = -e;
    }
    let exterior = t1.dot(n0).atan2(t1.dot(t0)).rem_euclid(std::f64::consts::TAU);
    if exterior <= std::f64::consts::PI + 1e-6 {
        return None; // flat or concave: no diffracting wedge
    }
    // Inconsistent winding (e.g. an inward-facing normal) fails validation
    // here and the edge is skipped rather than mis-modelled.
    let wedge = WedgeGeometry::new(u0.a, e, n0, t0, n1, t1, exterior).ok()?;
    let (a, b) = if wedge.edge_dir.dot(edge) > 0.0 { (u0.a, u0.b) } else { (u0.b, u0.a) };
    Some(EdgeCandidate { a, b, wedge: reorigin(wedge, a), faces: [u0.face, u1.face] })
}

/// Pin the wedge origin to the segment's first endpoint in edge_dir order.
fn reorigin(mut wedge: WedgeGeometry, a: Vec3) -> WedgeGeometry {
    wedge.edge_origin = a;
    wedge
}

/// Fermat stationary point for tx → edge → rx.
///
/// Minimising `|tx−p| + |p−rx|` over the edge line has the closed form of a
/// mirror problem in cylindrical coordinates around the line; the minimiser
/// automatically satisfies the diffraction-cone condition (equal angles with
/// the edge on both sides). Returns `(point, s1, s2)`, or `None` when either
/// endpoint lies on the edge line or the stationary point falls outside the
/// segment.
pub fn stationary_point(a: Vec3, b: Vec3, tx: Vec3, rx: Vec3) -> Option<(Vec3, f64, f64)> {
    let edge = b - a;
    let len = edge.norm();
    if len < 1e-9 {
        return None;
    }
    let e = edge / len;
    let zt = (tx - a).dot(e);
    let zr = (rx - a).dot(e);
    let rt = ((tx - a) - e * zt).norm();
    let rr = ((rx - a) - e * zr).norm();
    if rt < 1e-9 || rr < 1e-9 {
        return None; // on the edge line: no transverse plane of diffraction
    }
    let z = (zt * rr + zr * rt) / (rt + rr);
    let u = z / len;
    if !(-1e-9..=1.0 + 1e-9).contains(&u) {
        return None;
    }
    let p = a + edge * u.clamp(0.0, 1.0);
    let s1 = (p - tx).norm();
    let s2 = (rx - p).norm();
    if s1 < 1e-9 || s2 < 1e-9 {
        return None;
    }
    Some((p, s1, s2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Scene;
    use crate::testutil::{box_object, quad_object, scene_json};

    fn screen_scene() -> Scene {
        let json = scene_json(&[quad_object(
            "screen",
            "concrete",
            [
                Vec3::new(-5.0, 0.0, 0.0),
                Vec3::new(5.0, 0.0, 0.0),
                Vec3::new(5.0, 0.0, 10.0),
                Vec3::new(-5.0, 0.0, 10.0),
            ],
        )]);
        Scene::from_json(&json).unwrap()
    }

    #[test]
    fn open_sheet_has_four_knife_edges() {
        let scene = screen_scene();
        let edges = extract_edges(&scene);
        assert_eq!(edges.len(), 4, "quad sheet boundary should yield 4 edges");
        for c in &edges {
            assert!(
                (c.wedge.exterior_angle - std::f64::consts::TAU).abs() < 1e-12,
                "knife edges are full 2π wedges"
            );
            assert_eq!(c.faces[0], c.faces[1]);
            assert!(
                (c.wedge.edge_origin - c.a).norm() < 1e-12,
                "wedge frame must sit on the segment start"
            );
        }
        // The tessellation diagonal must not appear.
        for c in &edges {
            let d = (c.b - c.a).normalized();
            let axis_aligned = d.x.abs() > 0.999 || d.z.abs() > 0.999;
            assert!(axis_aligned, "diagonal seam leaked into candidates: {d:?}");
        }
    }

    #[test]
    fn closed_box_has_twelve_convex_edges() {
        let json = scene_json(&[box_object(
            "b",
            "concrete",
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(4.0, 6.0, 3.0),
        )]);
        let scene = Scene::from_json(&json).unwrap();
        let edges = extract_edges(&scene);
        assert_eq!(edges.len(), 12, "a box has 12 convex exterior edges");
        for c in &edges {
            assert!(
                (c.wedge.exterior_angle - 1.5 * std::f64::consts::PI).abs() < 1e-9,
                "box edges are right-angle wedges, got {}",
                c.wedge.exterior_angle
            );
            assert_ne!(c.faces[0], c.faces[1]);
        }
    }

    #[test]
    fn concave_junction_is_not_a_candidate() {
        // An L-shaped sheet: two quads meeting at a 90° fold, wound so both
        // normals point into the pocket. The air side of the fold then spans
        // π/2 < π, so it must be skipped; only boundary knife edges remain.
        let json = scene_json(&[crate::testutil::object_from(
            "l-shape",
            "concrete",
            &[
                [0.0, 0.0, 0.0],
                [4.0, 0.0, 0.0],
                [4.0, 0.0, 3.0],
                [0.0, 0.0, 3.0],
                [0.0, 3.0, 0.0],
                [4.0, 3.0, 0.0],
            ],
            &[[0, 2, 1], [0, 3, 2], [0, 5, 4], [0, 1, 5]],
        )]);
        let scene = Scene::from_json(&json).unwrap();
        let edges = extract_edges(&scene);
        for c in &edges {
            assert!(
                (c.wedge.exterior_angle - std::f64::consts::TAU).abs() < 1e-9,
                "only boundary knife edges should remain, got exterior {}",
                c.wedge.exterior_angle
            );
        }
        // 6 boundary edges total: 3 on each quad (the shared fold edge and
        // the two seams are excluded).
        assert_eq!(edges.len(), 6);
    }

    #[test]
    fn stationary_point_is_symmetric_midheight() {
        // Vertical edge through the origin, symmetric endpoints at height 1.
        let p = stationary_point(
            Vec3::new(0.0, 0.0, -5.0),
            Vec3::new(0.0, 0.0, 5.0),
            Vec3::new(-10.0, 0.0, 1.0),
            Vec3::new(10.0, 0.0, 1.0),
        );
        let (point, s1, s2) = p.expect("stationary point must exist");
        assert!((point - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
        assert!((s1 - s2).abs() < 1e-12);
    }

    #[test]
    fn stationary_point_satisfies_the_cone_condition() {
        let (a, b) = (Vec3::new(-3.0, 2.0, 0.0), Vec3::new(5.0, 2.0, 8.0));
        let tx = Vec3::new(-4.0, -7.0, 2.0);
        let rx = Vec3::new(6.0, 9.0, 1.0);
        let (p, s1, s2) = stationary_point(a, b, tx, rx).unwrap();
        let e = (b - a).normalized();
        let cos_in = (p - tx).normalized().dot(e);
        let cos_out = (rx - p).normalized().dot(e);
        assert!(
            (cos_in - cos_out).abs() < 1e-9,
            "equal-angle condition violated: {cos_in} vs {cos_out}"
        );
        assert!(s1 > 0.0 && s2 > 0.0);
    }

    #[test]
    fn stationary_point_off_segment_is_rejected() {
        // Both endpoints far beyond the +z end of a short edge.
        let p = stationary_point(
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(-10.0, 0.0, 50.0),
            Vec3::new(10.0, 0.0, 50.0),
        );
        assert!(p.is_none());
    }

    #[test]
    fn stationary_point_on_edge_line_is_rejected() {
        let p = stationary_point(
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(0.0, 0.0, 7.0), // on the line
            Vec3::new(10.0, 0.0, 0.5),
        );
        assert!(p.is_none());
    }
}
