//! Triangle meshes as loaded from a scene document.

use super::vec3::Vec3;
use crate::error::SceneError;

/// Triangles smaller than this area (m²) are considered degenerate.
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

/// One named object from a scene document: an indexed triangle mesh with a
/// single surface material. Closed solids should use outward-facing winding
/// (counter-clockwise seen from outside); wedge extraction relies on it.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    pub id: String,
    pub material: String,
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    /// Validate indices and triangle geometry. Called by the scene loader.
    pub fn validate(&self) -> Result<(), SceneError> {
        let n = self.vertices.len() as u32;
        for (k, tri) in self.triangles.iter().enumerate() {
            for &i in tri {
                if i >= n {
                    return Err(SceneError::Validation(format!(
                        "object '{}': triangle {} references vertex {} but only {} vertices exist",
                        self.id, k, i, n
                    )));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(SceneError::Validation(format!(
                    "object '{}': triangle {} repeats a vertex index",
                    self.id, k
                )));
            }
            let [a, b, c] = self.triangle_vertices(k);
            if !(a.is_finite() && b.is_finite() && c.is_finite()) {
                return Err(SceneError::Validation(format!(
                    "object '{}': triangle {} has a non-finite vertex",
                    self.id, k
                )));
            }
            let area = 0.5 * (b - a).cross(c - a).norm();
            if !(area > MIN_TRIANGLE_AREA) {
                return Err(SceneError::Validation(format!(
                    "object '{}': triangle {} is degenerate (area {:.3e} m^2)",
                    self.id, k, area
                )));
            }
        }
        Ok(())
    }

    pub fn triangle_vertices(&self, k: usize) -> [Vec3; 3] {
        let [i, j, l] = self.triangles[k];
        [self.vertices[i as usize], self.vertices[j as usize], self.vertices[l as usize]]
    }

    /// Unit normal by right-hand winding.
    pub fn triangle_normal(&self, k: usize) -> Vec3 {
        let [a, b, c] = self.triangle_vertices(k);
        (b - a).cross(c - a).normalized()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad_mesh() -> TriangleMesh {
        TriangleMesh {
            id: "quad".into(),
            material: "concrete".into(),
            vertices: vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(1.0, 1.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
            ],
            triangles: vec![[0, 1, 2], [0, 2, 3]],
        }
    }

    #[test]
    fn valid_quad_passes() {
        quad_mesh().validate().unwrap();
    }

    #[test]
    fn out_of_range_index_is_rejected_with_object_id() {
        let mut m = quad_mesh();
        m.triangles.push([0, 1, 9]);
        let err = m.validate().unwrap_err().to_string();
        assert!(err.contains("quad"), "error should name the object: {err}");
        assert!(err.contains("vertex 9"), "error should name the bad index: {err}");
    }

    #[test]
    fn degenerate_triangle_is_rejected_with_object_id() {
        let mut m = quad_mesh();
        // collinear points
        m.vertices.push(Vec3::new(2.0, 0.0, 0.0));
        m.triangles.push([0, 1, 4]);
        let err = m.validate().unwrap_err().to_string();
        assert!(err.contains("quad") && err.contains("degenerate"), "{err}");
    }

    #[test]
    fn winding_gives_up_normal_for_ccw_ground_quad() {
        let m = quad_mesh();
        let n = m.triangle_normal(0);
        assert!((n - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
    }
}
