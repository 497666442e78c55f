use std::path::PathBuf;

use thiserror::Error;

use crate::geom::Vec3;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid primitive: {0}")]
    InvalidPrimitive(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("model is empty")]
    EmptyModel,
    #[error("point membership is ambiguous at {point:?}: rays disagree after retries (mesh is not closed)")]
    NonClosedMesh { point: Vec3 },
    #[error("query argument must be finite and non-negative: {0}")]
    InvalidQuery(String),

    #[error("malformed template XML: {0}")]
    MalformedXml(String),
    #[error("template is missing mandatory field `{0}`")]
    MissingField(String),
    #[error("template field `{field}` has an invalid value: {reason}")]
    InvalidValue { field: String, reason: String },
    #[error("unknown length unit `{0}`")]
    UnknownUnit(String),
    #[error(
        "ball radius interval is empty: system noise {lower:e} mm is not below the minimum feature size {upper:e} mm"
    )]
    EmptyInterval { lower: f64, upper: f64 },

    #[error("proxy grid needs {cells} cells, over the budget of {budget}")]
    GridTooLarge { cells: u128, budget: usize },
    #[error("point cloud is empty: no sign change found on the grid")]
    EmptyCloud,

    #[error("cannot compare a {left} property with a {right} property")]
    KindMismatch { left: String, right: String },
    #[error("report has no properties")]
    NoProperties,

    #[error("round trip collapsed every triangle")]
    AllDegenerate,

    #[error("malformed Part 21 data at line {line}: {message}")]
    MalformedPart21 { line: usize, message: String },
    #[error("STEP file has no tessellated geometry (B-rep entities are not supported)")]
    NoTessellatedGeometry,
    #[error("malformed {format} data at line {line}: {message}")]
    MalformedMesh { format: &'static str, line: usize, message: String },
    #[error("malformed csg-json: {0}")]
    MalformedCsg(#[from] serde_json::Error),
    #[error("a {payload} model cannot be written as {format}")]
    CannotEncode { payload: &'static str, format: &'static str },
    #[error("unsupported model format for {0}")]
    UnsupportedFormat(PathBuf),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
