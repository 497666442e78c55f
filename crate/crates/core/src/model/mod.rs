//! Queryable solids: point membership, distance and bounding box over an
//! analytic CSG tree or a closed triangle mesh.

mod bvh;
pub mod csg;
pub mod mesh;
pub mod shapes;

use std::fmt;

pub use csg::{AnalyticPrimitive, CsgNode};
pub use mesh::TriangleMesh;

use crate::error::{Error, Result};
use crate::geom::{Aabb, Vec3};
use crate::units::LengthUnit;
use bvh::{Bvh, RayCast};

/// Attempts with fresh jitter sets before a mesh point is declared ambiguous.
const RAY_ATTEMPTS: usize = 4;
/// Re-jitters of a single ray that keeps grazing edges.
const GRAZE_RETRIES: usize = 8;
/// Relative distance below which an unresolved point counts as on the surface.
const ON_SURFACE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Inside,
    Outside,
    Boundary,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Inside => "inside",
            Classification::Outside => "outside",
            Classification::Boundary => "boundary",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmqResult {
    pub classification: Classification,
    /// Half-width of the band around the surface reported as `Boundary`.
    pub band_halfwidth: f64,
}

#[derive(Debug, Clone)]
pub enum Backend {
    Csg(CsgNode),
    Mesh(MeshBackend),
}

#[derive(Debug, Clone)]
pub struct MeshBackend {
    mesh: TriangleMesh,
    bvh: Bvh,
}

impl MeshBackend {
    pub fn mesh(&self) -> &TriangleMesh {
        &self.mesh
    }
}

/// An immutable solid answering membership and distance queries. Geometry is
/// held in millimetres; `units` records the unit of the source file.
#[derive(Debug, Clone)]
pub struct QueryableModel {
    backend: Backend,
    units: LengthUnit,
    bbox: Aabb,
}

impl QueryableModel {
    pub fn from_csg(root: CsgNode) -> Result<Self> {
        root.validate()?;
        let bbox = root.bounding_box()?;
        Self::checked(Backend::Csg(root), bbox)
    }

    pub fn from_mesh(mesh: TriangleMesh) -> Result<Self> {
        if mesh.triangles().is_empty() {
            return Err(Error::EmptyModel);
        }
        let bbox = mesh.bounding_box();
        let bvh = Bvh::build(&mesh);
        Self::checked(Backend::Mesh(MeshBackend { mesh, bvh }), bbox)
    }

    fn checked(backend: Backend, bbox: Aabb) -> Result<Self> {
        if bbox.is_empty() || !bbox.is_finite() {
            return Err(Error::EmptyModel);
        }
        Ok(Self { backend, units: LengthUnit::Mm, bbox })
    }

    pub fn with_units(mut self, units: LengthUnit) -> Self {
        self.units = units;
        self
    }

    pub fn units(&self) -> LengthUnit {
        self.units
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn mesh(&self) -> Option<&TriangleMesh> {
        match &self.backend {
            Backend::Mesh(m) => Some(&m.mesh),
            Backend::Csg(_) => None,
        }
    }

    pub fn bounding_box(&self) -> Aabb {
        self.bbox
    }

    /// Point-membership query with an inclusive boundary band of half-width
    /// `accuracy`.
    pub fn pmq(&self, point: Vec3, accuracy: f64) -> Result<PmqResult> {
        if !point.is_finite() {
            return Err(Error::InvalidQuery(format!("point {point:?}")));
        }
        if !(accuracy >= 0.0 && accuracy.is_finite()) {
            return Err(Error::InvalidQuery(format!("accuracy {accuracy}")));
        }
        let classification = match &self.backend {
            Backend::Csg(root) => {
                let m = root.membership(point);
                if m.abs() <= accuracy {
                    Classification::Boundary
                } else if m > 0.0 {
                    Classification::Inside
                } else {
                    Classification::Outside
                }
            }
            Backend::Mesh(mb) => self.mesh_pmq(mb, point, accuracy)?,
        };
        Ok(PmqResult { classification, band_halfwidth: accuracy })
    }

    /// Exact classification (`pmq` with a zero band).
    pub fn classify(&self, point: Vec3) -> Result<Classification> {
        self.pmq(point, 0.0).map(|r| r.classification)
    }

    /// Unsigned distance to the surface. Exact for meshes and CSG leaves; a
    /// lower bound for CSG composites.
    pub fn distance(&self, point: Vec3) -> f64 {
        match &self.backend {
            Backend::Csg(root) => root.membership(point).abs(),
            Backend::Mesh(mb) => mb.bvh.nearest_distance_squared(point).sqrt(),
        }
    }

    fn mesh_pmq(&self, mb: &MeshBackend, p: Vec3, accuracy: f64) -> Result<Classification> {
        if self.bbox.distance_squared(p) > accuracy * accuracy {
            return Ok(Classification::Outside);
        }
        if accuracy > 0.0 && mb.bvh.nearest_distance_squared(p) <= accuracy * accuracy {
            return Ok(Classification::Boundary);
        }
        for attempt in 0..RAY_ATTEMPTS {
            let mut votes = [None; 3];
            for (axis, vote) in votes.iter_mut().enumerate() {
                *vote = (0..GRAZE_RETRIES).find_map(|retry| {
                    match mb.bvh.cast(p, jittered_axis(axis, attempt * GRAZE_RETRIES + retry)) {
                        RayCast::Crossings(n) => Some(n % 2 == 1),
                        RayCast::Grazing => None,
                    }
                });
            }
            if let [Some(a), Some(b), Some(c)] = votes {
                if a == b && b == c {
                    return Ok(if a { Classification::Inside } else { Classification::Outside });
                }
            }
        }
        // Rays that keep disagreeing from a point closer to the surface than
        // the graze tolerance resolves mean the point sits on the surface.
        let snap = ON_SURFACE * (1.0 + self.bbox.extent().norm() + p.norm());
        if mb.bvh.nearest_distance_squared(p) <= snap * snap {
            return Ok(Classification::Boundary);
        }
        Err(Error::NonClosedMesh { point: p })
    }
}

/// `axis`-aligned unit direction tilted by irrational offsets; `k` selects a
/// different tilt for retries. The tilt grows with the retry index so a ray
/// skimming an edge from a point next to it eventually clears the edge.
fn jittered_axis(axis: usize, k: usize) -> Vec3 {
    const GOLDEN: f64 = 0.618_033_988_749_894_8;
    let growth = 3f64.powi((k % GRAZE_RETRIES) as i32);
    let s = 1e-3 * growth * (1.0 + ((k as f64 + 1.0) * GOLDEN).fract());
    let a = s * std::f64::consts::SQRT_2;
    let b = s * 3f64.sqrt() * if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    match axis {
        0 => Vec3::new(1.0, a, b),
        1 => Vec3::new(b, 1.0, a),
        _ => Vec3::new(a, b, 1.0),
    }
    .normalized()
}
