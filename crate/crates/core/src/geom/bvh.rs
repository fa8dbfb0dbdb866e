//! Median-split bounding volume hierarchy over scene triangles.
//!
//! Traversal is exact with respect to exhaustive iteration: the nearest hit
//! (ordered by `(t, triangle index)`) returned by [`Bvh::intersect`] is the
//! same one a linear scan over all triangles would produce.

use super::vec3::{Ray, Vec3};

/// Triangle in scene-global storage, tagged with its owning planar face.
#[derive(Debug, Clone, Copy)]
pub struct SceneTriangle {
    pub v0: Vec3,
    pub v1: Vec3,
    pub v2: Vec3,
    /// Index into the scene's planar-face table.
    pub face: u32,
}

/// Ray/triangle intersection result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriHit {
    pub t: f64,
    pub tri: u32,
}

/// Möller–Trumbore, double-sided. Returns the ray parameter for hits with
/// `t_min < t <= t_max`.
pub fn ray_triangle(ray: &Ray, tri: &SceneTriangle, t_min: f64, t_max: f64) -> Option<f64> {
    let e1 = tri.v1 - tri.v0;
    let e2 = tri.v2 - tri.v0;
    let p = ray.dir.cross(e2);
    let det = e1.dot(p);
    if det.abs() < 1e-14 {
        return None; // parallel or degenerate
    }
    let inv_det = 1.0 / det;
    let s = ray.origin - tri.v0;
    let u = s.dot(p) * inv_det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = ray.dir.dot(q) * inv_det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(q) * inv_det;
    if t > t_min && t <= t_max {
        Some(t)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy)]
struct Aabb {
    min: Vec3,
    max: Vec3,
}

impl Aabb {
    const EMPTY: Aabb = Aabb {
        min: Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
        max: Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
    };

    fn grow(&mut self, p: Vec3) {
        self.min = Vec3::new(self.min.x.min(p.x), self.min.y.min(p.y), self.min.z.min(p.z));
        self.max = Vec3::new(self.max.x.max(p.x), self.max.y.max(p.y), self.max.z.max(p.z));
    }

    fn grow_tri(&mut self, t: &SceneTriangle) {
        self.grow(t.v0);
        self.grow(t.v1);
        self.grow(t.v2);
    }

    /// Slab test; returns the entry parameter if the ray touches the box
    /// within `(t_min, t_max]` (entry clamped up to `t_min`).
    fn entry(&self, ray: &Ray, t_min: f64, t_max: f64) -> Option<f64> {
        let mut t0 = t_min;
        let mut t1 = t_max;
        for axis in 0..3 {
            let (o, d, lo, hi) = match axis {
                0 => (ray.origin.x, ray.dir.x, self.min.x, self.max.x),
                1 => (ray.origin.y, ray.dir.y, self.min.y, self.max.y),
                _ => (ray.origin.z, ray.dir.z, self.min.z, self.max.z),
            };
            if d.abs() < 1e-300 {
                if o < lo || o > hi {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / d;
            let (mut a, mut b) = ((lo - o) * inv, (hi - o) * inv);
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            t0 = t0.max(a);
            t1 = t1.min(b);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { aabb: Aabb, start: u32, count: u32 },
    Inner { aabb: Aabb, left: u32, right: u32 },
}

impl Node {
    fn aabb(&self) -> &Aabb {
        match self {
            Node::Leaf { aabb, .. } | Node::Inner { aabb, .. } => aabb,
        }
    }
}

const LEAF_SIZE: usize = 4;

/// Flat median-split BVH. An empty triangle set builds an empty tree that
/// reports no intersections.
#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    /// Triangle ids in leaf storage order.
    order: Vec<u32>,
}

impl Bvh {
    pub fn build(tris: &[SceneTriangle]) -> Bvh {
        let mut order: Vec<u32> = (0..tris.len() as u32).collect();
        let mut nodes = Vec::new();
        if !tris.is_empty() {
            let n = order.len();
            build_node(tris, &mut order, 0, n, &mut nodes);
        }
        Bvh { nodes, order }
    }

    /// Nearest hit along the ray with `t_min < t <= t_max`, ordered by
    /// `(t, triangle index)` so coincident surfaces resolve deterministically.
    pub fn intersect(&self, tris: &[SceneTriangle], ray: &Ray, t_min: f64, t_max: f64) -> Option<TriHit> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<TriHit> = None;
        let mut stack = [0u32; 64];
        let mut sp = 0usize;
        stack[sp] = 0;
        sp += 1;
        while sp > 0 {
            sp -= 1;
            let node = &self.nodes[stack[sp] as usize];
            let limit = best.map_or(t_max, |h| h.t.min(t_max));
            // `>` keeps boxes that tie with the current best: an equal-t
            // triangle with a smaller index must still win.
            match node.aabb().entry(ray, t_min, t_max) {
                Some(entry) if entry <= limit => {}
                _ => continue,
            }
            match node {
                Node::Leaf { start, count, .. } => {
                    for &tri_id in &self.order[*start as usize..(*start + *count) as usize] {
                        if let Some(t) = ray_triangle(ray, &tris[tri_id as usize], t_min, t_max) {
                            let cand = TriHit { t, tri: tri_id };
                            best = Some(match best {
                                None => cand,
                                Some(b) if (cand.t, cand.tri) < (b.t, b.tri) => cand,
                                Some(b) => b,
                            });
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack[sp] = *left;
                    sp += 1;
                    stack[sp] = *right;
                    sp += 1;
                }
            }
        }
        best
    }

    /// Number of triangle crossings within `(t_min, t_max]`, used for
    /// inside/outside parity queries. Shared edges and vertices can double
    /// count; callers avoid that by casting along directions that miss them.
    pub fn count_hits(&self, tris: &[SceneTriangle], ray: &Ray, t_min: f64, t_max: f64) -> usize {
        if self.nodes.is_empty() {
            return 0;
        }
        let mut hits = 0;
        let mut stack = [0u32; 64];
        let mut sp = 0usize;
        stack[sp] = 0;
        sp += 1;
        while sp > 0 {
            sp -= 1;
            let node = &self.nodes[stack[sp] as usize];
            if node.aabb().entry(ray, t_min, t_max).is_none() {
                continue;
            }
            match node {
                Node::Leaf { start, count, .. } => {
                    for &tri_id in &self.order[*start as usize..(*start + *count) as usize] {
                        if ray_triangle(ray, &tris[tri_id as usize], t_min, t_max).is_some() {
                            hits += 1;
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack[sp] = *left;
                    sp += 1;
                    stack[sp] = *right;
                    sp += 1;
                }
            }
        }
        hits
    }

    /// True if anything blocks the ray within `(t_min, t_max]`.
    pub fn any_hit(&self, tris: &[SceneTriangle], ray: &Ray, t_min: f64, t_max: f64) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let mut stack = [0u32; 64];
        let mut sp = 0usize;
        stack[sp] = 0;
        sp += 1;
        while sp > 0 {
            sp -= 1;
            let node = &self.nodes[stack[sp] as usize];
            if node.aabb().entry(ray, t_min, t_max).is_none() {
                continue;
            }
            match node {
                Node::Leaf { start, count, .. } => {
                    for &tri_id in &self.order[*start as usize..(*start + *count) as usize] {
                        if ray_triangle(ray, &tris[tri_id as usize], t_min, t_max).is_some() {
                            return true;
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack[sp] = *left;
                    sp += 1;
                    stack[sp] = *right;
                    sp += 1;
                }
            }
        }
        false
    }
}

fn build_node(
    tris: &[SceneTriangle],
    order: &mut [u32],
    start: usize,
    count: usize,
    nodes: &mut Vec<Node>,
) -> u32 {
    let mut aabb = Aabb::EMPTY;
    for &id in &order[start..start + count] {
        aabb.grow_tri(&tris[id as usize]);
    }
    let my_index = nodes.len() as u32;
    if count <= LEAF_SIZE {
        nodes.push(Node::Leaf { aabb, start: start as u32, count: count as u32 });
        return my_index;
    }

    // Median split on the widest centroid axis. Sorting by (centroid, id)
    // keeps the build order-independent of the input permutation.
    let centroid = |id: u32| {
        let t = &tris[id as usize];
        (t.v0 + t.v1 + t.v2) / 3.0
    };
    let extent = aabb.max - aabb.min;
    let axis = if extent.x >= extent.y && extent.x >= extent.z {
        0
    } else if extent.y >= extent.z {
        1
    } else {
        2
    };
    let key = |id: u32| {
        let c = centroid(id);
        match axis {
            0 => c.x,
            1 => c.y,
            _ => c.z,
        }
    };
    order[start..start + count].sort_unstable_by(|&a, &b| {
        key(a).partial_cmp(&key(b)).unwrap().then(a.cmp(&b))
    });
    let mid = count / 2;

    nodes.push(Node::Inner { aabb, left: 0, right: 0 }); // patched below
    let left = build_node(tris, order, start, mid, nodes);
    let right = build_node(tris, order, start + mid, count - mid, nodes);
    if let Node::Inner { left: l, right: r, .. } = &mut nodes[my_index as usize] {
        *l = left;
        *r = right;
    }
    my_index
}
