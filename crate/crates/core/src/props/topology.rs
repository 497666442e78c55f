use std::collections::HashMap;

use bitvec::prelude::*;

use super::{ManifoldnessReport, PropertyKind, PropertyValue, Value};
use crate::error::Result;
use crate::model::TriangleMesh;
use crate::par::map_ordered;
use crate::proxy::InteriorGrid;

/// Euler characteristic of the cubical complex spanned by the occupied
/// lattice points: a vertex per point, an edge per 6-adjacent pair, a square
/// per fully occupied 2x2 face and a cube per fully occupied 2x2x2 block.
/// This complex has the same components as the 6-connected occupancy.
pub fn euler_characteristic(grid: &InteriorGrid) -> Result<PropertyValue> {
    let [nx, ny, nz] = grid.lattice.dims;
    let occ = grid.occupancy();
    let at = |i: usize, j: usize, k: usize| i < nx && j < ny && k < nz && occ[grid.lattice.index(i, j, k)];
    let per_slab = map_ordered(nx, |i| {
        let mut chi = 0i64;
        for j in 0..ny {
            for k in 0..nz {
                if !at(i, j, k) {
                    continue;
                }
                let (x, y, z) = (at(i + 1, j, k), at(i, j + 1, k), at(i, j, k + 1));
                let xy = x && y && at(i + 1, j + 1, k);
                let yz = y && z && at(i, j + 1, k + 1);
                let xz = x && z && at(i + 1, j, k + 1);
                let cube = xy && yz && xz && at(i + 1, j + 1, k + 1);
                chi += 1 - (x as i64 + y as i64 + z as i64) + (xy as i64 + yz as i64 + xz as i64) - cube as i64;
            }
        }
        Ok(chi)
    })?;
    Ok(PropertyValue::new(PropertyKind::EulerCharacteristic, Value::Integer(per_slab.iter().sum()), 0.0))
}

/// `V - E + F` over the vertices referenced by triangles.
pub fn euler_characteristic_mesh(mesh: &TriangleMesh) -> Result<PropertyValue> {
    let mut used = bitvec![0; mesh.vertices().len()];
    for t in mesh.triangles() {
        for &v in t {
            used.set(v, true);
        }
    }
    let v = used.count_ones() as i64;
    let e = mesh.edge_incidence().len() as i64;
    let f = mesh.triangles().len() as i64;
    Ok(PropertyValue::new(PropertyKind::EulerCharacteristic, Value::Integer(v - e + f), 0.0))
}

/// Number of 6-connected components of the occupied points.
pub fn connected_components(grid: &InteriorGrid) -> PropertyValue {
    let occupied: Vec<usize> = grid.occupancy().iter_ones().collect();
    let rank = |ix: usize| occupied.binary_search(&ix).ok();
    let mut sets = UnionFind::new(occupied.len());
    let [nx, ny, nz] = grid.lattice.dims;
    for (r, &ix) in occupied.iter().enumerate() {
        let [i, j, k] = grid.lattice.coords(ix);
        for (ok, n) in [(i + 1 < nx, (i + 1, j, k)), (j + 1 < ny, (i, j + 1, k)), (k + 1 < nz, (i, j, k + 1))] {
            if ok {
                if let Some(s) = rank(grid.lattice.index(n.0, n.1, n.2)) {
                    sets.union(r, s);
                }
            }
        }
    }
    PropertyValue::new(PropertyKind::Components, Value::Integer(sets.count as i64), 0.0)
}

struct UnionFind {
    parent: Vec<usize>,
    count: usize,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), count: n }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.parent[a.max(b)] = a.min(b);
            self.count -= 1;
        }
    }
}

/// Naked edges have one incident triangle, non-manifold edges three or more.
/// A vertex is non-manifold when the triangles around it do not form a
/// single fan (a closed cycle or an open strip).
pub fn manifoldness(mesh: &TriangleMesh) -> PropertyValue {
    let mut report = ManifoldnessReport::default();
    for (_, n) in mesh.edge_incidence() {
        match n {
            1 => report.naked_edges += 1,
            n if n >= 3 => report.nonmanifold_edges += 1,
            _ => {}
        }
    }
    // link of each vertex: the opposite edge of every incident triangle
    let mut links: HashMap<usize, Vec<[usize; 2]>> = HashMap::new();
    for t in mesh.triangles() {
        for k in 0..3 {
            links.entry(t[k]).or_default().push([t[(k + 1) % 3], t[(k + 2) % 3]]);
        }
    }
    report.nonmanifold_vertices = links.values().filter(|link| !is_single_fan(link)).count();
    PropertyValue::new(PropertyKind::Manifoldness, Value::Manifold(report), 0.0)
}

/// True when the link edges form one connected path or cycle.
fn is_single_fan(link: &[[usize; 2]]) -> bool {
    let mut degree: HashMap<usize, usize> = HashMap::new();
    for e in link {
        for v in e {
            *degree.entry(*v).or_default() += 1;
        }
    }
    if degree.values().any(|&d| d > 2) {
        return false;
    }
    let ids: HashMap<usize, usize> = degree.keys().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut sets = UnionFind::new(ids.len());
    for [a, b] in link {
        sets.union(ids[a], ids[b]);
    }
    sets.count == 1
}
