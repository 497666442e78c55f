use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{PropertyKind, PropertyValue, Value};
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::model::{Classification, QueryableModel};
use crate::par::map_ordered;
use crate::proxy::InteriorGrid;

/// Maximum depth of midpoint probes between two same-sign samples that both
/// sit in the boundary band.
const BAND_PROBE_DEPTH: u32 = 2;

/// Occupied count times cell volume. The error estimate counts the cells in
/// the transition band: `Boundary` points plus occupied points with an
/// unoccupied neighbour.
pub fn volume(grid: &InteriorGrid) -> PropertyValue {
    let cell = grid.spacing().powi(3);
    let band = grid.boundary_count() + grid.frontier_count();
    PropertyValue::new(PropertyKind::Volume, Value::Scalar(grid.occupied_count() as f64 * cell), band as f64 * cell)
}

/// Cauchy–Crofton estimate from `n_rays` random lines.
///
/// Lines have isotropic directions and offsets uniform over the disc of
/// area `S` that the bounding sphere of the model's box casts orthogonally
/// to the line. Each line is sampled at `epsilon / 2`; sign changes of the
/// membership along it are its boundary crossings. Area is `2 S` times the
/// mean crossing count, and the error estimate is the standard error of
/// that mean scaled the same way.
pub fn surface_area(
    model: &QueryableModel,
    epsilon: f64,
    pmq_accuracy: f64,
    n_rays: usize,
    seed: u64,
) -> Result<PropertyValue> {
    if n_rays == 0 {
        return Err(Error::InvalidQuery("surface area needs at least one ray".into()));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidQuery(format!("ball radius {epsilon}")));
    }
    let bbox = model.bounding_box();
    let center = bbox.center();
    let radius = bbox.extent().norm() * 0.5 * (1.0 + 1e-9) + f64::EPSILON;
    let disc = PI * radius * radius;
    let steps = ((2.0 * radius) / (epsilon / 2.0)).ceil().max(1.0) as usize;

    const CHUNK: usize = 256;
    let chunks = n_rays.div_ceil(CHUNK);
    let counts = map_ordered(chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n_rays);
        (lo..hi)
            .map(|_| {
                let z: f64 = rng.random_range(-1.0..=1.0);
                let phi = rng.random::<f64>() * TAU;
                let s = (1.0 - z * z).max(0.0).sqrt();
                let dir = Vec3::new(s * phi.cos(), s * phi.sin(), z);
                let r = radius * rng.random::<f64>().sqrt();
                let theta = rng.random::<f64>() * TAU;
                let e1 = dir.any_orthonormal();
                let e2 = dir.cross(e1);
                let start = center + e1 * (r * theta.cos()) + e2 * (r * theta.sin()) - dir * radius;
                line_crossings(model, start, dir * (2.0 * radius / steps as f64), steps, pmq_accuracy)
            })
            .collect::<Result<Vec<usize>>>()
    })?;
    let counts: Vec<f64> = counts.into_iter().flatten().map(|c| c as f64).collect();
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = if counts.len() > 1 { counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Ok(PropertyValue::new(PropertyKind::SurfaceArea, Value::Scalar(2.0 * disc * mean), 2.0 * disc * (var / n).sqrt()))
}

fn line_crossings(model: &QueryableModel, start: Vec3, step: Vec3, steps: usize, accuracy: f64) -> Result<usize> {
    let sign = |p: Vec3| -> Result<bool> { Ok(model.classify(p)? == Classification::Inside) };
    let mut crossings = 0;
    let mut prev_point = start;
    let mut prev = sign(start)?;
    for j in 1..=steps {
        let p = start + step * j as f64;
        let cur = sign(p)?;
        if cur != prev {
            crossings += 1;
        } else if accuracy > 0.0 {
            crossings += band_probe(model, prev_point, p, cur, accuracy, BAND_PROBE_DEPTH)?;
        }
        prev = cur;
        prev_point = p;
    }
    Ok(crossings)
}

/// Crossings hidden between two same-sign samples. Only probed when both
/// samples are within the PMQ band, i.e. the line runs close to the surface.
fn band_probe(model: &QueryableModel, a: Vec3, b: Vec3, inside: bool, accuracy: f64, depth: u32) -> Result<usize> {
    if depth == 0 {
        return Ok(0);
    }
    let near = |p: Vec3| -> Result<bool> { Ok(model.pmq(p, accuracy)?.classification == Classification::Boundary) };
    if !(near(a)? && near(b)?) {
        return Ok(0);
    }
    let mid = (a + b) * 0.5;
    if (model.classify(mid)? == Classification::Inside) != inside {
        return Ok(2);
    }
    Ok(band_probe(model, a, mid, inside, accuracy, depth - 1)?
        + band_probe(model, mid, b, inside, accuracy, depth - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AnalyticPrimitive, CsgNode};
    use crate::proxy::build_interior_grid;

    fn csg(node: impl Into<CsgNode>) -> QueryableModel {
        QueryableModel::from_csg(node.into()).unwrap()
    }

    fn unit_cube() -> QueryableModel {
        csg(AnalyticPrimitive::cuboid(Vec3::ZERO, Vec3::splat(1.0)).unwrap())
    }

    fn unit_sphere() -> QueryableModel {
        csg(AnalyticPrimitive::sphere(Vec3::ZERO, 1.0).unwrap())
    }

    #[test]
    fn cube_volume_within_envelope() {
        let v = volume(&build_interior_grid(&unit_cube(), 0.05, 0.0).unwrap());
        let x = v.as_scalar().unwrap();
        assert!((x - 1.0).abs() <= 0.3, "{x}");
        assert!(v.error_estimate >= (x - 1.0).abs());
    }

    #[test]
    fn empty_grid_volume_is_zero() {
        let empty = csg(CsgNode::from(AnalyticPrimitive::sphere(Vec3::ZERO, 1.0).unwrap())
            .intersection(AnalyticPrimitive::sphere(Vec3::splat(1.9), 1.0).unwrap()));
        let v = volume(&build_interior_grid(&empty, 0.05, 0.0).unwrap());
        assert_eq!(v.as_scalar(), Some(0.0));
        assert_eq!(v.error_estimate, 0.0);
    }

    #[test]
    fn sphere_volume_within_area_times_eps() {
        let v = volume(&build_interior_grid(&unit_sphere(), 0.02, 0.0).unwrap());
        let exact = 4.0 * PI / 3.0;
        assert!((v.as_scalar().unwrap() - exact).abs() <= 4.0 * PI * 0.02);
    }

    #[test]
    fn cube_area() {
        let a = surface_area(&unit_cube(), 0.05, 0.0, 40_000, 0).unwrap();
        let x = a.as_scalar().unwrap();
        assert!((x - 6.0).abs() <= 3.0 * a.error_estimate, "{x} ± {}", a.error_estimate);
    }

    #[test]
    fn empty_model_area_is_zero() {
        let empty = csg(CsgNode::from(AnalyticPrimitive::sphere(Vec3::ZERO, 1.0).unwrap())
            .intersection(AnalyticPrimitive::sphere(Vec3::splat(1.9), 1.0).unwrap()));
        let a = surface_area(&empty, 0.05, 0.0, 1000, 0).unwrap();
        assert_eq!(a.as_scalar(), Some(0.0));
    }

    #[test]
    fn area_is_seed_deterministic() {
        let a = surface_area(&unit_sphere(), 0.1, 0.0, 3000, 9).unwrap();
        let b = surface_area(&unit_sphere(), 0.1, 0.0, 3000, 9).unwrap();
        let c = surface_area(&unit_sphere(), 0.1, 0.0, 3000, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn band_probe_finds_grazing_chords() {
        // a thin slab thinner than the step: plain stepping can miss it
        let slab = csg(AnalyticPrimitive::cuboid(Vec3::new(-1.0, -1.0, -0.004), Vec3::new(1.0, 1.0, 0.004)).unwrap());
        let plain = surface_area(&slab, 0.2, 0.0, 20_000, 1).unwrap().as_scalar().unwrap();
        let probed = surface_area(&slab, 0.2, 0.05, 20_000, 1).unwrap().as_scalar().unwrap();
        let exact = 2.0 * 4.0 + 4.0 * 2.0 * 0.008;
        assert!((probed - exact).abs() < (plain - exact).abs());
    }

    #[test]
    fn rejects_zero_rays() {
        assert!(surface_area(&unit_cube(), 0.1, 0.0, 0, 0).is_err());
    }
}
