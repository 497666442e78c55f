//! Outward-oriented closed meshes for common solids.

use std::f64::consts::{PI, TAU};

use crate::geom::Vec3;

use super::mesh::TriangleMesh;

fn build(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> TriangleMesh {
    TriangleMesh::new(vertices, triangles, None).expect("generator produced an invalid mesh")
}

/// Octahedron with vertices at distance `radius` on the coordinate axes.
pub fn octahedron(radius: f64) -> TriangleMesh {
    let r = radius;
    let v = vec![
        Vec3::new(r, 0.0, 0.0),
        Vec3::new(-r, 0.0, 0.0),
        Vec3::new(0.0, r, 0.0),
        Vec3::new(0.0, -r, 0.0),
        Vec3::new(0.0, 0.0, r),
        Vec3::new(0.0, 0.0, -r),
    ];
    let t = vec![[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4], [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]];
    build(v, t)
}

/// Axis-aligned box with 8 vertices and 12 triangles.
pub fn cuboid(min: Vec3, max: Vec3) -> TriangleMesh {
    let v: Vec<Vec3> = (0..8)
        .map(|i| {
            Vec3::new(
                if i & 1 == 0 { min.x } else { max.x },
                if i & 2 == 0 { min.y } else { max.y },
                if i & 4 == 0 { min.z } else { max.z },
            )
        })
        .collect();
    let t = vec![
        [0, 2, 1],
        [1, 2, 3],
        [4, 5, 6],
        [5, 7, 6],
        [0, 1, 4],
        [1, 5, 4],
        [2, 6, 3],
        [3, 6, 7],
        [0, 4, 2],
        [2, 4, 6],
        [1, 3, 5],
        [3, 7, 5],
    ];
    build(v, t)
}

pub fn tetrahedron(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> TriangleMesh {
    let mut t = vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]];
    // flip to outward orientation if the input is left-handed
    if (b - a).dot((c - a).cross(d - a)) < 0.0 {
        for tri in &mut t {
            tri.swap(1, 2);
        }
    }
    build(vec![a, b, c, d], t)
}

/// Latitude/longitude sphere with `stacks >= 2` and `slices >= 3`.
pub fn uv_sphere(center: Vec3, radius: f64, stacks: usize, slices: usize) -> TriangleMesh {
    let mut v = vec![center + Vec3::Z * radius];
    for i in 1..stacks {
        let theta = PI * i as f64 / stacks as f64;
        for j in 0..slices {
            let phi = TAU * j as f64 / slices as f64;
            v.push(center + Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()) * radius);
        }
    }
    v.push(center - Vec3::Z * radius);
    let south = v.len() - 1;
    let ring = |i: usize, j: usize| 1 + (i - 1) * slices + j % slices;
    let mut t = Vec::new();
    for j in 0..slices {
        t.push([0, ring(1, j), ring(1, j + 1)]);
        t.push([south, ring(stacks - 1, j + 1), ring(stacks - 1, j)]);
    }
    for i in 1..stacks - 1 {
        for j in 0..slices {
            let (a, b, c, d) = (ring(i, j), ring(i, j + 1), ring(i + 1, j), ring(i + 1, j + 1));
            t.push([a, c, b]);
            t.push([b, c, d]);
        }
    }
    build(v, t)
}

/// Torus around the z axis with tube centre radius `major` and tube radius
/// `minor`.
pub fn torus(major: f64, minor: f64, segments: usize, sides: usize) -> TriangleMesh {
    let mut v = Vec::with_capacity(segments * sides);
    for i in 0..segments {
        let u = TAU * i as f64 / segments as f64;
        for j in 0..sides {
            let w = TAU * j as f64 / sides as f64;
            let r = major + minor * w.cos();
            v.push(Vec3::new(r * u.cos(), r * u.sin(), minor * w.sin()));
        }
    }
    let ix = |i: usize, j: usize| (i % segments) * sides + j % sides;
    let mut t = Vec::with_capacity(2 * segments * sides);
    for i in 0..segments {
        for j in 0..sides {
            let (a, b, c, d) = (ix(i, j), ix(i + 1, j), ix(i, j + 1), ix(i + 1, j + 1));
            t.push([a, b, d]);
            t.push([a, d, c]);
        }
    }
    build(v, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_meshes_are_outward() {
        assert!((octahedron(1.0).signed_volume() - 4.0 / 3.0).abs() < 1e-12);
        assert!((cuboid(Vec3::ZERO, Vec3::splat(2.0)).signed_volume() - 8.0).abs() < 1e-12);
        let s = uv_sphere(Vec3::ZERO, 1.0, 16, 32).signed_volume();
        assert!(s > 3.9 && s < 4.0 * PI / 3.0);
        let t = torus(2.0, 0.5, 48, 24).signed_volume();
        let exact = 2.0 * PI * PI * 2.0 * 0.25;
        assert!(t > 0.95 * exact && t < exact);
        let tet = tetrahedron(Vec3::ZERO, Vec3::Y, Vec3::X, Vec3::Z);
        assert!((tet.signed_volume() - 1.0 / 6.0).abs() < 1e-15);
    }
}
