//! Geometry: vectors and rays, triangle meshes, planar-face extraction, the
//! triangle BVH, and scene assembly.

pub mod bvh;
pub mod face;
pub mod format;
pub mod mesh;
pub mod scene;
pub mod vec3;

pub use bvh::{ray_triangle, Bvh, SceneTriangle, TriHit};
pub use face::{extract_planar_faces, PlanarFace, COPLANAR_TOLERANCE, NORMAL_TOLERANCE};
pub use format::{MaterialDoc, ObjectDoc, SceneDoc};
pub use mesh::TriangleMesh;
pub use scene::{load_scene, Hit, Scene, OCCLUSION_EPSILON};
pub use vec3::{Ray, Vec3};
