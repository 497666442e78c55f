//! Query-built proxy models: an interior voxel grid, a boundary point cloud
//! and the union of balls centred on the occupied grid points.
//!
//! Everything here talks to the model only through `pmq`, so meshes and
//! analytic solids produce comparable proxies.

use bitvec::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{Aabb, Vec3};
use crate::model::{Classification, QueryableModel};
use crate::par::map_ordered;

pub const DEFAULT_CELL_BUDGET: usize = 1 << 27;
const MAX_BISECTIONS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxyOptions {
    pub cell_budget: usize,
}

impl Default for ProxyOptions {
    fn default() -> Self {
        Self { cell_budget: DEFAULT_CELL_BUDGET }
    }
}

/// A regular lattice of sample points `origin + h * (i, j, k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub origin: Vec3,
    pub spacing: f64,
    pub dims: [usize; 3],
}

impl Lattice {
    /// Lattice with spacing at most `epsilon / sqrt(3)` covering `bbox`
    /// inflated by two cells on every side. The spacing is shrunk so the
    /// longest side of the box is a whole number of cells, which keeps the
    /// lattice centred on the box along that axis.
    pub fn covering(bbox: Aabb, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidQuery(format!("ball radius {epsilon}")));
        }
        if bbox.is_empty() || !bbox.is_finite() {
            return Err(Error::EmptyModel);
        }
        let h0 = epsilon / 3f64.sqrt();
        let extent = bbox.extent();
        let longest = extent.max_component();
        let h = if longest > 0.0 { longest / (longest / h0).ceil() } else { h0 };
        let count = |e: f64| ((e + 4.0 * h) / h - 1e-9).ceil().max(0.0) + 1.0;
        let dims = [count(extent.x), count(extent.y), count(extent.z)];
        if dims.iter().any(|d| !d.is_finite() || *d > usize::MAX as f64 / 4.0) {
            return Err(Error::GridTooLarge { cells: u128::MAX, budget: 0 });
        }
        Ok(Self { origin: bbox.min - Vec3::splat(2.0 * h), spacing: h, dims: dims.map(|d| d as usize) })
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_count(&self) -> u128 {
        self.dims.iter().map(|&d| d as u128).product()
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    pub fn coords(&self, index: usize) -> [usize; 3] {
        let k = index % self.dims[2];
        let j = (index / self.dims[2]) % self.dims[1];
        let i = index / (self.dims[1] * self.dims[2]);
        [i, j, k]
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> Vec3 {
        let h = self.spacing;
        Vec3::new(self.origin.x + i as f64 * h, self.origin.y + j as f64 * h, self.origin.z + k as f64 * h)
    }

    pub fn point_at(&self, index: usize) -> Vec3 {
        let [i, j, k] = self.coords(index);
        self.point(i, j, k)
    }

    pub fn check_budget(&self, budget: usize) -> Result<()> {
        let cells = self.cell_count();
        if cells > budget as u128 {
            return Err(Error::GridTooLarge { cells, budget });
        }
        Ok(())
    }

    /// Classifies every lattice point, slab by slab, in index order.
    fn classify(&self, model: &QueryableModel, accuracy: f64) -> Result<Vec<Classification>> {
        let [nx, ny, nz] = self.dims;
        let slabs = map_ordered(nx, |i| {
            let mut slab = Vec::with_capacity(ny * nz);
            for j in 0..ny {
                for k in 0..nz {
                    slab.push(model.pmq(self.point(i, j, k), accuracy)?.classification);
                }
            }
            Ok(slab)
        })?;
        Ok(slabs.concat())
    }
}

/// Lattice points classified `Inside` (occupied) or `Boundary`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorGrid {
    pub lattice: Lattice,
    pub epsilon: f64,
    pub pmq_accuracy: f64,
    occupied: BitVec,
    boundary: BitVec,
}

impl InteriorGrid {
    pub fn spacing(&self) -> f64 {
        self.lattice.spacing
    }

    pub fn is_occupied(&self, i: usize, j: usize, k: usize) -> bool {
        self.occupied[self.lattice.index(i, j, k)]
    }

    pub fn occupancy(&self) -> &BitSlice {
        &self.occupied
    }

    pub fn boundary(&self) -> &BitSlice {
        &self.boundary
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.count_ones()
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary.count_ones()
    }

    pub fn occupied_points(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.occupied.iter_ones().map(|ix| self.lattice.point_at(ix))
    }

    /// Grid from explicit occupancy bits; used by tests and by callers that
    /// combine grids on a shared lattice.
    pub fn from_bits(lattice: Lattice, epsilon: f64, occupied: BitVec, boundary: BitVec) -> Self {
        assert_eq!(occupied.len(), lattice.len());
        assert_eq!(boundary.len(), lattice.len());
        Self { lattice, epsilon, pmq_accuracy: 0.0, occupied, boundary }
    }

    /// Occupied cells with a 6-neighbour that is not occupied.
    pub fn frontier_count(&self) -> usize {
        let [nx, ny, nz] = self.lattice.dims;
        self.occupied
            .iter_ones()
            .filter(|&ix| {
                let [i, j, k] = self.lattice.coords(ix);
                let on_edge = i == 0 || j == 0 || k == 0 || i + 1 == nx || j + 1 == ny || k + 1 == nz;
                on_edge
                    || !self.is_occupied(i - 1, j, k)
                    || !self.is_occupied(i + 1, j, k)
                    || !self.is_occupied(i, j - 1, k)
                    || !self.is_occupied(i, j + 1, k)
                    || !self.is_occupied(i, j, k - 1)
                    || !self.is_occupied(i, j, k + 1)
            })
            .count()
    }
}

pub fn build_interior_grid(model: &QueryableModel, epsilon: f64, pmq_accuracy: f64) -> Result<InteriorGrid> {
    build_interior_grid_with(model, epsilon, pmq_accuracy, &ProxyOptions::default())
}

pub fn build_interior_grid_with(
    model: &QueryableModel,
    epsilon: f64,
    pmq_accuracy: f64,
    options: &ProxyOptions,
) -> Result<InteriorGrid> {
    let lattice = Lattice::covering(model.bounding_box(), epsilon)?;
    lattice.check_budget(options.cell_budget)?;
    build_interior_grid_on(model, lattice, epsilon, pmq_accuracy)
}

/// Interior grid on a caller-supplied lattice, so several models can share
/// sample points.
pub fn build_interior_grid_on(
    model: &QueryableModel,
    lattice: Lattice,
    epsilon: f64,
    pmq_accuracy: f64,
) -> Result<InteriorGrid> {
    let classes = lattice.classify(model, pmq_accuracy)?;
    let occupied: BitVec = classes.iter().map(|c| *c == Classification::Inside).collect();
    let boundary: BitVec = classes.iter().map(|c| *c == Classification::Boundary).collect();
    Ok(InteriorGrid { lattice, epsilon, pmq_accuracy, occupied, boundary })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
    /// Every point lies within this distance of the true surface.
    pub sample_accuracy: f64,
    /// Spacing of the lattice the cloud was sampled from.
    pub spacing: f64,
}

impl PointCloud {
    pub fn translated(&self, t: Vec3) -> Self {
        Self { points: self.points.iter().map(|&p| p + t).collect(), ..self.clone() }
    }
}

pub fn build_point_cloud(model: &QueryableModel, epsilon: f64, pmq_accuracy: f64) -> Result<PointCloud> {
    build_point_cloud_with(model, epsilon, pmq_accuracy, &ProxyOptions::default())
}

/// Surface samples: every lattice edge whose endpoints classify Inside and
/// Outside is bisected until the bracket is at most `pmq_accuracy / 4` long
/// (or 20 halvings), and the bracket midpoint is emitted. Lattice points
/// lying exactly on the surface are emitted as they are.
pub fn build_point_cloud_with(
    model: &QueryableModel,
    epsilon: f64,
    pmq_accuracy: f64,
    options: &ProxyOptions,
) -> Result<PointCloud> {
    let lattice = Lattice::covering(model.bounding_box(), epsilon)?;
    lattice.check_budget(options.cell_budget)?;
    build_point_cloud_on(model, lattice, pmq_accuracy)
}

/// Point cloud sampled from the edges of a caller-supplied lattice.
pub fn build_point_cloud_on(model: &QueryableModel, lattice: Lattice, pmq_accuracy: f64) -> Result<PointCloud> {
    let signs = lattice.classify(model, 0.0)?;
    let [nx, ny, nz] = lattice.dims;
    let target = pmq_accuracy / 4.0;

    let slabs = map_ordered(nx, |i| {
        let mut pts = Vec::new();
        let mut worst = 0.0f64;
        for j in 0..ny {
            for k in 0..nz {
                let here = signs[lattice.index(i, j, k)];
                let p = lattice.point(i, j, k);
                if here == Classification::Boundary {
                    pts.push(p);
                    continue;
                }
                let neighbours = [
                    (i + 1 < nx).then(|| (i + 1, j, k)),
                    (j + 1 < ny).then(|| (i, j + 1, k)),
                    (k + 1 < nz).then(|| (i, j, k + 1)),
                ];
                for (a, b, c) in neighbours.into_iter().flatten() {
                    let there = signs[lattice.index(a, b, c)];
                    if there == Classification::Boundary || there == here {
                        continue;
                    }
                    let q = lattice.point(a, b, c);
                    let (inside, outside) = if here == Classification::Inside { (p, q) } else { (q, p) };
                    let (sample, half) = bisect(model, inside, outside, target)?;
                    worst = worst.max(half);
                    pts.push(sample);
                }
            }
        }
        Ok((pts, worst))
    })?;

    let sample_accuracy = slabs.iter().map(|s| s.1).fold(0.0, f64::max);
    let points: Vec<Vec3> = slabs.into_iter().flat_map(|s| s.0).collect();
    if points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(PointCloud { points, sample_accuracy, spacing: lattice.spacing })
}

/// Returns the bracket midpoint and its distance bound to the crossing.
fn bisect(model: &QueryableModel, mut inside: Vec3, mut outside: Vec3, target: f64) -> Result<(Vec3, f64)> {
    for _ in 0..MAX_BISECTIONS {
        if inside.distance(outside) <= target {
            break;
        }
        let mid = (inside + outside) * 0.5;
        match model.classify(mid)? {
            Classification::Inside => inside = mid,
            Classification::Outside => outside = mid,
            Classification::Boundary => return Ok((mid, 0.0)),
        }
    }
    Ok(((inside + outside) * 0.5, inside.distance(outside) * 0.5))
}

/// Balls of radius `radius` centred on the occupied points of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct UnionOfBalls {
    pub grid: InteriorGrid,
    pub radius: f64,
}

impl UnionOfBalls {
    pub fn centers(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.grid.occupied_points()
    }

    pub fn len(&self) -> usize {
        self.grid.occupied_count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, p: Vec3) -> bool {
        let l = &self.grid.lattice;
        let h = l.spacing;
        let reach = (self.radius / h).ceil() as i64;
        let rel = (p - l.origin) / h;
        let base = [rel.x.round() as i64, rel.y.round() as i64, rel.z.round() as i64];
        let r2 = self.radius * self.radius;
        for di in -reach..=reach {
            for dj in -reach..=reach {
                for dk in -reach..=reach {
                    let c = [base[0] + di, base[1] + dj, base[2] + dk];
                    if (0..3).any(|a| c[a] < 0 || c[a] >= l.dims[a] as i64) {
                        continue;
                    }
                    let [i, j, k] = c.map(|v| v as usize);
                    if self.grid.is_occupied(i, j, k) && (l.point(i, j, k) - p).norm_squared() <= r2 {
                        return true;
                    }
                }
            }
        }
        false
    }
}

pub fn build_union_of_balls(model: &QueryableModel, epsilon: f64, pmq_accuracy: f64) -> Result<UnionOfBalls> {
    let grid = build_interior_grid(model, epsilon, pmq_accuracy)?;
    Ok(UnionOfBalls { grid, radius: epsilon })
}
