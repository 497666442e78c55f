use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::fileio::ModelFormat;
use crate::geom::{Aabb, Vec3};

/// Triangles with area at or below this are treated as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-15;

/// An indexed triangle mesh in millimetres.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    provenance: Option<ModelFormat>,
}

impl TriangleMesh {
    /// Strict constructor: indices must be in range and no triangle may be
    /// degenerate.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>, provenance: Option<ModelFormat>) -> Result<Self> {
        if let Some(v) = vertices.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidMesh(format!("non-finite vertex {v:?}")));
        }
        for (i, t) in triangles.iter().enumerate() {
            if let Some(&bad) = t.iter().find(|&&ix| ix >= vertices.len()) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {i} references vertex {bad}, mesh has {}",
                    vertices.len()
                )));
            }
            if triangle_area(&vertices, *t) <= DEGENERATE_AREA {
                return Err(Error::InvalidMesh(format!("triangle {i} is degenerate")));
            }
        }
        Ok(Self { vertices, triangles, provenance })
    }

    /// Builds a mesh from a raw triangle soup: merges exactly coincident
    /// vertices, drops degenerate triangles and unreferenced vertices.
    pub fn from_soup(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>, provenance: Option<ModelFormat>) -> Result<Self> {
        Self::welded_soup(vertices, triangles, 0.0, provenance)
    }

    /// Like [`TriangleMesh::from_soup`], merging vertices within `tolerance`.
    pub fn welded_soup(
        vertices: Vec<Vec3>,
        triangles: Vec<[usize; 3]>,
        tolerance: f64,
        provenance: Option<ModelFormat>,
    ) -> Result<Self> {
        if let Some(v) = vertices.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidMesh(format!("non-finite vertex {v:?}")));
        }
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&i| i >= vertices.len())) {
            return Err(Error::InvalidMesh(format!("triangle {t:?} references a missing vertex")));
        }
        let remap = weld_map(&vertices, tolerance);
        let tris: Vec<[usize; 3]> = triangles
            .iter()
            .map(|t| t.map(|i| remap[i]))
            .filter(|t| t[0] != t[1] && t[1] != t[2] && t[0] != t[2])
            .filter(|t| triangle_area(&vertices, *t) > DEGENERATE_AREA)
            .collect();
        if tris.is_empty() {
            return Err(Error::EmptyModel);
        }
        // keep referenced vertices in their original order
        let mut used = vec![false; vertices.len()];
        for t in &tris {
            for &i in t {
                used[i] = true;
            }
        }
        let mut compact = vec![usize::MAX; vertices.len()];
        let mut kept = Vec::new();
        for (i, v) in vertices.iter().enumerate() {
            if used[i] {
                compact[i] = kept.len();
                kept.push(*v);
            }
        }
        let tris = tris.into_iter().map(|t| t.map(|i| compact[i])).collect();
        Ok(Self { vertices: kept, triangles: tris, provenance })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn provenance(&self) -> Option<ModelFormat> {
        self.provenance
    }

    pub fn with_provenance(mut self, provenance: Option<ModelFormat>) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn triangle(&self, i: usize) -> [Vec3; 3] {
        self.triangles[i].map(|ix| self.vertices[ix])
    }

    pub fn bounding_box(&self) -> Aabb {
        Aabb::from_points(&self.vertices)
    }

    /// Maps every vertex through `f`; the connectivity is unchanged.
    pub fn map_vertices(&self, f: impl Fn(Vec3) -> Vec3) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&v| f(v)).collect(),
            triangles: self.triangles.clone(),
            provenance: self.provenance,
        }
    }

    /// Divergence-theorem volume; positive for outward-oriented closed meshes.
    pub fn signed_volume(&self) -> f64 {
        (0..self.triangles.len())
            .map(|i| {
                let [a, b, c] = self.triangle(i);
                a.dot(b.cross(c)) / 6.0
            })
            .sum()
    }

    pub fn surface_area(&self) -> f64 {
        self.triangles.iter().map(|&t| triangle_area(&self.vertices, t)).sum()
    }

    /// Unique undirected edges with the number of incident triangles,
    /// ordered by vertex indices.
    pub fn edge_incidence(&self) -> Vec<([usize; 2], usize)> {
        let mut counts: HashMap<[usize; 2], usize> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *counts.entry([a.min(b), a.max(b)]).or_default() += 1;
            }
        }
        let mut edges: Vec<_> = counts.into_iter().collect();
        edges.sort_unstable();
        edges
    }
}

pub(crate) fn triangle_area(vertices: &[Vec3], t: [usize; 3]) -> f64 {
    let [a, b, c] = t.map(|i| vertices[i]);
    0.5 * (b - a).cross(c - a).norm()
}

/// Representative index for every vertex. With `tolerance == 0` only exact
/// duplicates merge; otherwise a vertex joins the lowest-indexed earlier
/// representative within `tolerance`.
pub fn weld_map(vertices: &[Vec3], tolerance: f64) -> Vec<usize> {
    let mut remap = Vec::with_capacity(vertices.len());
    if tolerance <= 0.0 {
        let mut seen: HashMap<[u64; 3], usize> = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            // +0.0 folds -0.0 onto 0.0
            let key = v.to_array().map(|c| (c + 0.0).to_bits());
            remap.push(*seen.entry(key).or_insert(i));
        }
        return remap;
    }
    let cell = |v: Vec3| v.to_array().map(|c| (c / tolerance).floor() as i64);
    let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (i, &v) in vertices.iter().enumerate() {
        let [cx, cy, cz] = cell(v);
        let mut best: Option<usize> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(reps) = buckets.get(&[cx + dx, cy + dy, cz + dz]) {
                        for &r in reps {
                            if vertices[r].distance(v) <= tolerance && best.is_none_or(|b| r < b) {
                                best = Some(r);
                            }
                        }
                    }
                }
            }
        }
        match best {
            Some(r) => remap.push(r),
            None => {
                buckets.entry([cx, cy, cz]).or_default().push(i);
                remap.push(i);
            }
        }
    }
    remap
}
