//! Analytic solids and set-operation trees over them.
//!
//! Every primitive exposes a signed membership value: positive inside,
//! negative outside, zero on the surface, with magnitude equal to the
//! Euclidean distance to the surface. Set operations combine memberships
//! with `max` (union), `min` (intersection) and `min(a, -b)` (difference),
//! which keeps the sign exact while the magnitude becomes a lower bound on
//! the true distance for composites.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Aabb, Vec3};

const AXIS_UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalyticPrimitive {
    Sphere { center: Vec3, radius: f64 },
    Box { min: Vec3, max: Vec3 },
    Cylinder { base: Vec3, axis: Vec3, radius: f64, height: f64 },
}

impl AnalyticPrimitive {
    pub fn sphere(center: Vec3, radius: f64) -> Result<Self> {
        let p = AnalyticPrimitive::Sphere { center, radius };
        p.validate()?;
        Ok(p)
    }

    pub fn cuboid(min: Vec3, max: Vec3) -> Result<Self> {
        let p = AnalyticPrimitive::Box { min, max };
        p.validate()?;
        Ok(p)
    }

    pub fn cylinder(base: Vec3, axis: Vec3, radius: f64, height: f64) -> Result<Self> {
        let p = AnalyticPrimitive::Cylinder { base, axis, radius, height };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidPrimitive(msg));
        match *self {
            AnalyticPrimitive::Sphere { center, radius } => {
                if !center.is_finite() || !(radius > 0.0 && radius.is_finite()) {
                    return bad(format!("sphere radius must be positive, got {radius}"));
                }
            }
            AnalyticPrimitive::Box { min, max } => {
                if !min.is_finite() || !max.is_finite() {
                    return bad("box corners must be finite".into());
                }
                if !(min.x < max.x && min.y < max.y && min.z < max.z) {
                    return bad(format!("box min {min:?} must be below max {max:?}"));
                }
            }
            AnalyticPrimitive::Cylinder { base, axis, radius, height } => {
                if !base.is_finite() || !(radius > 0.0 && radius.is_finite()) {
                    return bad(format!("cylinder radius must be positive, got {radius}"));
                }
                if !(height > 0.0 && height.is_finite()) {
                    return bad(format!("cylinder height must be positive, got {height}"));
                }
                if (axis.norm() - 1.0).abs() > AXIS_UNIT_TOLERANCE {
                    return bad(format!("cylinder axis {axis:?} is not a unit vector"));
                }
            }
        }
        Ok(())
    }

    /// Uniform scaling about the origin, used for unit conversion.
    pub fn scaled(&self, s: f64) -> AnalyticPrimitive {
        match *self {
            AnalyticPrimitive::Sphere { center, radius } => {
                AnalyticPrimitive::Sphere { center: center * s, radius: radius * s }
            }
            AnalyticPrimitive::Box { min, max } => AnalyticPrimitive::Box { min: min * s, max: max * s },
            AnalyticPrimitive::Cylinder { base, axis, radius, height } => {
                AnalyticPrimitive::Cylinder { base: base * s, axis, radius: radius * s, height: height * s }
            }
        }
    }

    /// Signed distance to the surface, positive inside.
    pub fn membership(&self, p: Vec3) -> f64 {
        match *self {
            AnalyticPrimitive::Sphere { center, radius } => radius - (p - center).norm(),
            AnalyticPrimitive::Box { min, max } => {
                let center = (min + max) * 0.5;
                let half = (max - min) * 0.5;
                let q = (p - center).abs() - half;
                let outside = q.max(Vec3::ZERO).norm();
                let inside = q.max_component().min(0.0);
                -(outside + inside)
            }
            AnalyticPrimitive::Cylinder { base, axis, radius, height } => {
                let rel = p - base;
                let t = rel.dot(axis);
                let radial = (rel - axis * t).norm();
                let dr = radial - radius;
                let dh = (t - height * 0.5).abs() - height * 0.5;
                let outside = (dr.max(0.0).powi(2) + dh.max(0.0).powi(2)).sqrt();
                let inside = dr.max(dh).min(0.0);
                -(outside + inside)
            }
        }
    }

    pub fn bounding_box(&self) -> Aabb {
        match *self {
            AnalyticPrimitive::Sphere { center, radius } => {
                Aabb::new(center - Vec3::splat(radius), center + Vec3::splat(radius))
            }
            AnalyticPrimitive::Box { min, max } => Aabb::new(min, max),
            AnalyticPrimitive::Cylinder { base, axis, radius, height } => {
                let disc = axis.map(|a| radius * (1.0 - a * a).max(0.0).sqrt());
                let top = base + axis * height;
                Aabb::new(base - disc, base + disc).hull(Aabb::new(top - disc, top + disc))
            }
        }
    }
}

/// A finite set-operation tree. Ownership through `Box` makes cycles
/// unrepresentable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CsgJson", into = "CsgJson")]
pub enum CsgNode {
    Leaf(AnalyticPrimitive),
    Union(Box<CsgNode>, Box<CsgNode>),
    Intersection(Box<CsgNode>, Box<CsgNode>),
    Difference(Box<CsgNode>, Box<CsgNode>),
}

impl From<AnalyticPrimitive> for CsgNode {
    fn from(p: AnalyticPrimitive) -> Self {
        CsgNode::Leaf(p)
    }
}

impl CsgNode {
    pub fn union(self, other: impl Into<CsgNode>) -> Self {
        CsgNode::Union(Box::new(self), Box::new(other.into()))
    }

    pub fn intersection(self, other: impl Into<CsgNode>) -> Self {
        CsgNode::Intersection(Box::new(self), Box::new(other.into()))
    }

    pub fn difference(self, other: impl Into<CsgNode>) -> Self {
        CsgNode::Difference(Box::new(self), Box::new(other.into()))
    }

    pub fn membership(&self, p: Vec3) -> f64 {
        match self {
            CsgNode::Leaf(prim) => prim.membership(p),
            CsgNode::Union(a, b) => a.membership(p).max(b.membership(p)),
            CsgNode::Intersection(a, b) => a.membership(p).min(b.membership(p)),
            CsgNode::Difference(a, b) => a.membership(p).min(-b.membership(p)),
        }
    }

    pub fn bounding_box(&self) -> Result<Aabb> {
        match self {
            CsgNode::Leaf(prim) => Ok(prim.bounding_box()),
            CsgNode::Union(a, b) => Ok(a.bounding_box()?.hull(b.bounding_box()?)),
            CsgNode::Intersection(a, b) => {
                let o = a.bounding_box()?.overlap(b.bounding_box()?);
                if o.is_empty() {
                    Err(Error::EmptyModel)
                } else {
                    Ok(o)
                }
            }
            CsgNode::Difference(a, _) => a.bounding_box(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CsgNode::Leaf(prim) => prim.validate(),
            CsgNode::Union(a, b) | CsgNode::Intersection(a, b) | CsgNode::Difference(a, b) => {
                a.validate()?;
                b.validate()
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            CsgNode::Leaf(_) => 0,
            CsgNode::Union(a, b) | CsgNode::Intersection(a, b) | CsgNode::Difference(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Applies `f` to every leaf, preserving the tree shape.
    pub fn map_leaves(&self, f: &impl Fn(&AnalyticPrimitive) -> AnalyticPrimitive) -> CsgNode {
        match self {
            CsgNode::Leaf(prim) => CsgNode::Leaf(f(prim)),
            CsgNode::Union(a, b) => CsgNode::Union(Box::new(a.map_leaves(f)), Box::new(b.map_leaves(f))),
            CsgNode::Intersection(a, b) => CsgNode::Intersection(Box::new(a.map_leaves(f)), Box::new(b.map_leaves(f))),
            CsgNode::Difference(a, b) => CsgNode::Difference(Box::new(a.map_leaves(f)), Box::new(b.map_leaves(f))),
        }
    }
}

/// On-disk shape of a CSG node. N-ary set operations fold left.
#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum CsgJson {
    Sphere { center: Vec3, radius: f64 },
    Box { min: Vec3, max: Vec3 },
    Cylinder { base: Vec3, axis: Vec3, radius: f64, height: f64 },
    Union(Vec<CsgJson>),
    Intersection(Vec<CsgJson>),
    Difference(Vec<CsgJson>),
}

impl TryFrom<CsgJson> for CsgNode {
    type Error = String;

    fn try_from(j: CsgJson) -> std::result::Result<Self, String> {
        let fold = |children: Vec<CsgJson>,
                    name: &str,
                    op: fn(Box<CsgNode>, Box<CsgNode>) -> CsgNode|
         -> std::result::Result<CsgNode, String> {
            if children.len() < 2 {
                return Err(format!("`{name}` needs at least two operands"));
            }
            let mut it = children.into_iter();
            let first = CsgNode::try_from(it.next().unwrap())?;
            it.try_fold(first, |acc, c| Ok(op(Box::new(acc), Box::new(CsgNode::try_from(c)?))))
        };
        let leaf = |p: AnalyticPrimitive| p.validate().map(|_| CsgNode::Leaf(p)).map_err(|e| e.to_string());
        match j {
            CsgJson::Sphere { center, radius } => leaf(AnalyticPrimitive::Sphere { center, radius }),
            CsgJson::Box { min, max } => leaf(AnalyticPrimitive::Box { min, max }),
            CsgJson::Cylinder { base, axis, radius, height } => {
                leaf(AnalyticPrimitive::Cylinder { base, axis, radius, height })
            }
            CsgJson::Union(c) => fold(c, "union", CsgNode::Union),
            CsgJson::Intersection(c) => fold(c, "intersection", CsgNode::Intersection),
            CsgJson::Difference(c) => fold(c, "difference", CsgNode::Difference),
        }
    }
}

impl From<CsgNode> for CsgJson {
    fn from(n: CsgNode) -> Self {
        match n {
            CsgNode::Leaf(AnalyticPrimitive::Sphere { center, radius }) => CsgJson::Sphere { center, radius },
            CsgNode::Leaf(AnalyticPrimitive::Box { min, max }) => CsgJson::Box { min, max },
            CsgNode::Leaf(AnalyticPrimitive::Cylinder { base, axis, radius, height }) => {
                CsgJson::Cylinder { base, axis, radius, height }
            }
            CsgNode::Union(a, b) => CsgJson::Union(vec![(*a).into(), (*b).into()]),
            CsgNode::Intersection(a, b) => CsgJson::Intersection(vec![(*a).into(), (*b).into()]),
            CsgNode::Difference(a, b) => CsgJson::Difference(vec![(*a).into(), (*b).into()]),
        }
    }
}
