//! Bounding-volume hierarchy over mesh triangles for nearest-distance and
//! ray-crossing queries.

use crate::geom::{Aabb, Vec3};

use super::mesh::TriangleMesh;

const LEAF_SIZE: usize = 4;

/// Barycentric slack under which a ray hit is considered to graze an edge or
/// vertex, and the ray is re-jittered.
const GRAZE_EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
enum NodeKind {
    Leaf { start: usize, count: usize },
    Inner { left: usize, right: usize },
}

#[derive(Debug, Clone)]
struct Node {
    bbox: Aabb,
    kind: NodeKind,
}

#[derive(Debug, Clone)]
pub(crate) struct Bvh {
    nodes: Vec<Node>,
    order: Vec<usize>,
    tris: Vec<[Vec3; 3]>,
}

/// Result of casting one ray against the mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RayCast {
    Crossings(usize),
    /// The ray touched an edge, a vertex, or started on the surface.
    Grazing,
}

impl Bvh {
    pub fn build(mesh: &TriangleMesh) -> Self {
        let tris: Vec<[Vec3; 3]> = (0..mesh.triangles().len()).map(|i| mesh.triangle(i)).collect();
        let centroids: Vec<Vec3> = tris.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
        let mut order: Vec<usize> = (0..tris.len()).collect();
        let mut nodes = Vec::with_capacity(2 * tris.len() / LEAF_SIZE + 1);
        if !tris.is_empty() {
            build_node(&tris, &centroids, &mut order, 0, tris.len(), &mut nodes);
        }
        Self { nodes, order, tris }
    }

    pub fn nearest_distance_squared(&self, p: Vec3) -> f64 {
        let mut best = f64::INFINITY;
        if self.nodes.is_empty() {
            return best;
        }
        let mut stack = vec![0usize];
        while let Some(ix) = stack.pop() {
            let node = &self.nodes[ix];
            if node.bbox.distance_squared(p) >= best {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &t in &self.order[start..start + count] {
                        best = best.min(point_triangle_distance_squared(p, &self.tris[t]));
                    }
                }
                NodeKind::Inner { left, right } => {
                    let dl = self.nodes[left].bbox.distance_squared(p);
                    let dr = self.nodes[right].bbox.distance_squared(p);
                    // nearer child on top of the stack
                    if dl < dr {
                        stack.push(right);
                        stack.push(left);
                    } else {
                        stack.push(left);
                        stack.push(right);
                    }
                }
            }
        }
        best
    }

    pub fn cast(&self, origin: Vec3, dir: Vec3) -> RayCast {
        if self.nodes.is_empty() {
            return RayCast::Crossings(0);
        }
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut count = 0;
        let mut stack = vec![0usize];
        while let Some(ix) = stack.pop() {
            let node = &self.nodes[ix];
            if node.bbox.inflated(1e-12).ray_interval(origin, inv, 0.0, f64::INFINITY).is_none() {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count: n } => {
                    for &t in &self.order[start..start + n] {
                        match ray_triangle(origin, dir, &self.tris[t]) {
                            Hit::Miss => {}
                            Hit::Cross => count += 1,
                            Hit::Graze => return RayCast::Grazing,
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        RayCast::Crossings(count)
    }
}

fn build_node(
    tris: &[[Vec3; 3]],
    centroids: &[Vec3],
    order: &mut [usize],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let slice = &mut order[start..end];
    let bbox = slice.iter().fold(Aabb::empty(), |b, &t| tris[t].iter().fold(b, |b, &v| b.including(v)));
    let ix = nodes.len();
    nodes.push(Node { bbox, kind: NodeKind::Leaf { start, count: end - start } });
    if end - start <= LEAF_SIZE {
        return ix;
    }
    let cbox = Aabb::from_points(slice.iter().map(|&t| &centroids[t]));
    let ext = cbox.extent();
    let axis = if ext.x >= ext.y && ext.x >= ext.z {
        0
    } else if ext.y >= ext.z {
        1
    } else {
        2
    };
    let mid = slice.len() / 2;
    slice.select_nth_unstable_by(mid, |&a, &b| centroids[a][axis].total_cmp(&centroids[b][axis]).then(a.cmp(&b)));
    let left = build_node(tris, centroids, order, start, start + mid, nodes);
    let right = build_node(tris, centroids, order, start + mid, end, nodes);
    nodes[ix].kind = NodeKind::Inner { left, right };
    ix
}

enum Hit {
    Miss,
    Cross,
    Graze,
}

/// Möller–Trumbore, reporting hits near an edge or at the ray origin as
/// grazing.
fn ray_triangle(origin: Vec3, dir: Vec3, tri: &[Vec3; 3]) -> Hit {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let pvec = dir.cross(e2);
    let det = e1.dot(pvec);
    let scale = e1.norm() * e2.norm();
    if det.abs() <= 1e-14 * scale {
        return Hit::Miss;
    }
    let inv_det = 1.0 / det;
    let tvec = origin - tri[0];
    let u = tvec.dot(pvec) * inv_det;
    if !(-GRAZE_EPS..=1.0 + GRAZE_EPS).contains(&u) {
        return Hit::Miss;
    }
    let qvec = tvec.cross(e1);
    let v = dir.dot(qvec) * inv_det;
    if v < -GRAZE_EPS || u + v > 1.0 + GRAZE_EPS {
        return Hit::Miss;
    }
    let t = e2.dot(qvec) * inv_det;
    let t_eps = 1e-12 * (1.0 + scale.sqrt());
    if t < -t_eps {
        return Hit::Miss;
    }
    if t <= t_eps || u < GRAZE_EPS || v < GRAZE_EPS || u + v > 1.0 - GRAZE_EPS {
        return Hit::Graze;
    }
    Hit::Cross
}

/// Closest-point-on-triangle by Voronoi regions.
pub(crate) fn point_triangle_distance_squared(p: Vec3, tri: &[Vec3; 3]) -> f64 {
    let [a, b, c] = *tri;
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return ap.norm_squared();
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return bp.norm_squared();
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (p - (a + ab * v)).norm_squared();
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return cp.norm_squared();
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (p - (a + ac * w)).norm_squared();
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (p - (b + (c - b) * w)).norm_squared();
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (p - (a + ab * v + ac * w)).norm_squared()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::shapes;

    #[test]
    fn point_triangle_regions() {
        let tri = [Vec3::ZERO, Vec3::X, Vec3::Y];
        assert_eq!(point_triangle_distance_squared(Vec3::new(0.2, 0.2, 1.0), &tri), 1.0);
        assert_eq!(point_triangle_distance_squared(Vec3::new(-1.0, -1.0, 0.0), &tri), 2.0);
        assert!((point_triangle_distance_squared(Vec3::new(1.0, 1.0, 0.0), &tri) - 0.5).abs() < 1e-15);
        assert_eq!(point_triangle_distance_squared(Vec3::new(0.5, -2.0, 0.0), &tri), 4.0);
    }

    #[test]
    fn bvh_distance_matches_brute_force() {
        let mesh = shapes::torus(2.0, 0.5, 24, 12);
        let bvh = Bvh::build(&mesh);
        for p in [Vec3::ZERO, Vec3::new(3.0, 1.0, 0.2), Vec3::new(-0.3, 2.2, 0.7)] {
            let brute = (0..mesh.triangles().len())
                .map(|i| point_triangle_distance_squared(p, &mesh.triangle(i)))
                .fold(f64::INFINITY, f64::min);
            assert_eq!(bvh.nearest_distance_squared(p), brute);
        }
    }

    #[test]
    fn edge_hits_graze() {
        let tri = [Vec3::ZERO, Vec3::X, Vec3::Y];
        assert!(matches!(ray_triangle(Vec3::new(0.5, 0.0, -1.0), Vec3::Z, &tri), Hit::Graze));
        assert!(matches!(ray_triangle(Vec3::new(0.2, 0.2, -1.0), Vec3::Z, &tri), Hit::Cross));
        assert!(matches!(ray_triangle(Vec3::new(0.2, 0.2, 1.0), Vec3::Z, &tri), Hit::Miss));
    }
}
