use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ConvexityWitness, PropertyKind, PropertyValue, Value};
use crate::error::{Error, Result};
use crate::geom::{Aabb, Vec3};
use crate::model::{Classification, QueryableModel};
use crate::proxy::{build_interior_grid, InteriorGrid, PointCloud};

pub const DEFAULT_CONVEXITY_PAIRS: usize = 10_000;

/// Below this many point pairs the nearest-neighbour grid is not worth
/// building.
const BRUTE_FORCE_PAIRS: usize = 1 << 20;

pub fn centroid(grid: &InteriorGrid) -> Result<PropertyValue> {
    let n = grid.occupied_count();
    if n == 0 {
        return Err(Error::EmptyModel);
    }
    let sum = grid.occupied_points().fold(Vec3::ZERO, |acc, p| acc + p);
    Ok(PropertyValue::new(PropertyKind::Centroid, Value::Vector(sum / n as f64), grid.spacing() + grid.epsilon))
}

/// Symmetric Hausdorff distance between two clouds, exact over the samples.
pub fn hausdorff(a: &PointCloud, b: &PointCloud) -> Result<PropertyValue> {
    if a.points.is_empty() || b.points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let d = directed(&a.points, &b.points).max(directed(&b.points, &a.points));
    Ok(PropertyValue::new(
        PropertyKind::Hausdorff,
        Value::Scalar(d),
        a.sample_accuracy + b.sample_accuracy + 2.0 * a.spacing.max(b.spacing),
    ))
}

/// `max_{p in from} min_{q in to} |p - q|`.
fn directed(from: &[Vec3], to: &[Vec3]) -> f64 {
    if from.len().saturating_mul(to.len()) <= BRUTE_FORCE_PAIRS {
        return from
            .iter()
            .map(|p| to.iter().map(|q| p.distance(*q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
    }
    let index = NearestIndex::new(to);
    let mut worst = 0.0f64;
    for p in from {
        worst = worst.max(index.nearest(*p, worst));
    }
    worst
}

/// Uniform hash grid over a point set.
struct NearestIndex<'a> {
    points: &'a [Vec3],
    cell: f64,
    bbox: Aabb,
    buckets: HashMap<[i64; 3], Vec<usize>>,
}

impl<'a> NearestIndex<'a> {
    fn new(points: &'a [Vec3]) -> Self {
        let bbox = Aabb::from_points(points);
        let e = bbox.extent();
        // roughly a handful of points per occupied cell for surface clouds
        let area_like = (e.x * e.y + e.y * e.z + e.z * e.x).max(f64::MIN_POSITIVE);
        let cell = (2.0 * area_like / points.len() as f64).sqrt().max(e.max_component() * 1e-6).max(1e-12);
        let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        let mut index = Self { points, cell, bbox, buckets: HashMap::new() };
        for (i, p) in points.iter().enumerate() {
            buckets.entry(index.key(*p)).or_default().push(i);
        }
        index.buckets = buckets;
        index
    }

    fn key(&self, p: Vec3) -> [i64; 3] {
        [p.x, p.y, p.z].map(|c| (c / self.cell).floor() as i64)
    }

    /// Distance to the nearest point, or any value `<= floor` once the
    /// nearest is known to be within `floor` (the caller only needs the max).
    fn nearest(&self, p: Vec3, floor: f64) -> f64 {
        let [cx, cy, cz] = self.key(p);
        let mut best = f64::INFINITY;
        // rings closer than the box cannot hold points
        let start = (self.bbox.distance_squared(p).sqrt() / self.cell).floor() as i64;
        let reach = {
            let lo = self.key(self.bbox.min);
            let hi = self.key(self.bbox.max);
            (0..3).map(|a| (lo[a] - [cx, cy, cz][a]).abs().max((hi[a] - [cx, cy, cz][a]).abs())).max().unwrap_or(0)
        };
        let mut r = (start - 1).max(0);
        loop {
            for dx in -r..=r {
                for dy in -r..=r {
                    for dz in -r..=r {
                        if dx.abs() != r && dy.abs() != r && dz.abs() != r {
                            continue;
                        }
                        if let Some(ixs) = self.buckets.get(&[cx + dx, cy + dy, cz + dz]) {
                            for &i in ixs {
                                best = best.min(self.points[i].distance(p));
                            }
                        }
                    }
                }
            }
            // anything in ring r + 1 or beyond is at least r * cell away
            let shell = r as f64 * self.cell;
            if best <= shell || best <= floor || r >= reach {
                return best;
            }
            r += 1;
        }
    }
}

/// Probabilistic convexity test on the interior grid of `model`.
pub fn convexity(
    model: &QueryableModel,
    epsilon: f64,
    pmq_accuracy: f64,
    n_pairs: usize,
    seed: u64,
) -> Result<PropertyValue> {
    let grid = build_interior_grid(model, epsilon, pmq_accuracy)?;
    convexity_on(&grid, model, n_pairs, seed)
}

/// Samples `n_pairs` random pairs of occupied grid points. Any midpoint
/// classified `Outside` proves non-convexity and is returned as a witness;
/// otherwise the model is reported convex.
pub fn convexity_on(grid: &InteriorGrid, model: &QueryableModel, n_pairs: usize, seed: u64) -> Result<PropertyValue> {
    let occupied: Vec<usize> = grid.occupancy().iter_ones().collect();
    if occupied.is_empty() {
        return Err(Error::EmptyModel);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_pairs {
        let a = grid.lattice.point_at(occupied[rng.random_range(0..occupied.len())]);
        let b = grid.lattice.point_at(occupied[rng.random_range(0..occupied.len())]);
        let midpoint = (a + b) * 0.5;
        if model.pmq(midpoint, grid.pmq_accuracy)?.classification == Classification::Outside {
            return Ok(PropertyValue::new(
                PropertyKind::Convexity,
                Value::Convexity { convex: false, witness: Some(ConvexityWitness { a, b, midpoint }) },
                0.0,
            ));
        }
    }
    Ok(PropertyValue::new(PropertyKind::Convexity, Value::Convexity { convex: true, witness: None }, 0.0))
}
