//! Shape properties computed from proxies (and, for the combinatorial ones,
//! directly from meshes).

mod geometric;
mod integral;
mod topology;

use std::fmt;
use std::str::FromStr;

pub use geometric::{centroid, convexity, convexity_on, hausdorff, DEFAULT_CONVEXITY_PAIRS};
pub use integral::{surface_area, volume};
pub use topology::{connected_components, euler_characteristic, euler_characteristic_mesh, manifoldness};

use crate::error::Error;
use crate::geom::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PropertyKind {
    Volume,
    SurfaceArea,
    Centroid,
    Hausdorff,
    Convexity,
    EulerCharacteristic,
    Components,
    Manifoldness,
}

impl PropertyKind {
    pub const ALL: [PropertyKind; 8] = [
        PropertyKind::Volume,
        PropertyKind::SurfaceArea,
        PropertyKind::Hausdorff,
        PropertyKind::Centroid,
        PropertyKind::Convexity,
        PropertyKind::EulerCharacteristic,
        PropertyKind::Components,
        PropertyKind::Manifoldness,
    ];

    /// Command-line and CSV name.
    pub fn name(self) -> &'static str {
        match self {
            PropertyKind::Volume => "volume",
            PropertyKind::SurfaceArea => "surface-area",
            PropertyKind::Centroid => "centroid",
            PropertyKind::Hausdorff => "hausdorff-distance",
            PropertyKind::Convexity => "convexity",
            PropertyKind::EulerCharacteristic => "euler-characteristic",
            PropertyKind::Components => "components",
            PropertyKind::Manifoldness => "manifoldness",
        }
    }

    /// Integer and boolean properties compare by exact equality.
    pub fn is_categorical(self) -> bool {
        matches!(
            self,
            PropertyKind::Convexity
                | PropertyKind::EulerCharacteristic
                | PropertyKind::Components
                | PropertyKind::Manifoldness
        )
    }
}

impl fmt::Display for PropertyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PropertyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim().to_ascii_lowercase().replace([' ', '_'], "-");
        let kind = match s.as_str() {
            "volume" => PropertyKind::Volume,
            "surface-area" | "area" => PropertyKind::SurfaceArea,
            "centroid" => PropertyKind::Centroid,
            "hausdorff-distance" | "hausdorff" => PropertyKind::Hausdorff,
            "convexity" => PropertyKind::Convexity,
            "euler-characteristic" | "euler" => PropertyKind::EulerCharacteristic,
            "components" => PropertyKind::Components,
            "manifoldness" => PropertyKind::Manifoldness,
            _ => {
                return Err(Error::InvalidValue { field: "property".into(), reason: format!("unknown property `{s}`") })
            }
        };
        Ok(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ManifoldnessReport {
    pub naked_edges: usize,
    pub nonmanifold_edges: usize,
    pub nonmanifold_vertices: usize,
}

impl ManifoldnessReport {
    pub fn is_manifold(&self) -> bool {
        self.naked_edges == 0 && self.nonmanifold_edges == 0 && self.nonmanifold_vertices == 0
    }
}

impl fmt::Display for ManifoldnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (naked edges: {}, non-manifold edges: {}, non-manifold vertices: {})",
            if self.is_manifold() { "manifold" } else { "non-manifold" },
            self.naked_edges,
            self.nonmanifold_edges,
            self.nonmanifold_vertices
        )
    }
}

/// Two lattice points whose midpoint lies outside the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityWitness {
    pub a: Vec3,
    pub b: Vec3,
    pub midpoint: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(f64),
    Vector(Vec3),
    Integer(i64),
    Convexity { convex: bool, witness: Option<ConvexityWitness> },
    Manifold(ManifoldnessReport),
}

impl Value {
    /// Equality of the full representation: floats compare bit for bit.
    pub fn identical(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Scalar(a), Value::Scalar(b)) => a.to_bits() == b.to_bits(),
            (Value::Vector(a), Value::Vector(b)) => a.to_array().map(f64::to_bits) == b.to_array().map(f64::to_bits),
            (Value::Integer(a), Value::Integer(b)) => a == b,
            (Value::Convexity { convex: a, .. }, Value::Convexity { convex: b, .. }) => a == b,
            (Value::Manifold(a), Value::Manifold(b)) => a == b,
            _ => false,
        }
    }

    /// Shortest round-trip representation, free of commas.
    pub fn full_repr(&self) -> String {
        match self {
            Value::Scalar(v) => format!("{v:?}"),
            Value::Vector(v) => format!("{:?} {:?} {:?}", v.x, v.y, v.z),
            Value::Integer(v) => v.to_string(),
            Value::Convexity { convex, .. } => convex.to_string(),
            Value::Manifold(r) => format!(
                "naked={} nonmanifold-edges={} nonmanifold-vertices={}",
                r.naked_edges, r.nonmanifold_edges, r.nonmanifold_vertices
            ),
        }
    }
}

/// Renders with 8 decimals for reals.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Scalar(v) => write!(f, "{v:.8}"),
            Value::Vector(v) => write!(f, "({:.8}, {:.8}, {:.8})", v.x, v.y, v.z),
            Value::Integer(v) => write!(f, "{v}"),
            Value::Convexity { convex: true, .. } => f.write_str("convex"),
            Value::Convexity { convex: false, witness } => {
                f.write_str("non-convex")?;
                if let Some(w) = witness {
                    write!(
                        f,
                        " (midpoint ({:.8}, {:.8}, {:.8}) is outside)",
                        w.midpoint.x, w.midpoint.y, w.midpoint.z
                    )?;
                }
                Ok(())
            }
            Value::Manifold(r) => write!(f, "{r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyValue {
    pub kind: PropertyKind,
    pub value: Value,
    /// Same units as the value; zero for exact combinatorial results.
    pub error_estimate: f64,
}

impl PropertyValue {
    pub fn new(kind: PropertyKind, value: Value, error_estimate: f64) -> Self {
        debug_assert!(error_estimate >= 0.0);
        Self { kind, value, error_estimate }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self.value {
            Value::Scalar(v) => Some(v),
            Value::Integer(v) => Some(v as f64),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self.value {
            Value::Integer(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<Vec3> {
        match self.value {
            Value::Vector(v) => Some(v),
            _ => None,
        }
    }
}
