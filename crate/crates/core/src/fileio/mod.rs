//! Model file formats: OFF, STL, STEP (Part 21 tessellated subset) and
//! csg-json. Writers take an explicit [`Precision`], so a writer is the only
//! place where coordinates are quantized.

mod off;
pub mod part21;
mod step;
mod stl;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use off::{read_off, write_off, write_point_cloud_off};
pub use part21::{parse_part21, Instance, Param, Part21File, Record};
pub use step::{declared_length_unit, extract_mesh, mesh_to_part21, write_step};
pub use stl::{read_stl, write_stl};

use crate::error::{Error, Result};
use crate::model::{CsgNode, TriangleMesh};
use crate::units::LengthUnit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFormat {
    Off,
    Stl,
    Step,
    Csg,
}

impl ModelFormat {
    pub fn tag(self) -> &'static str {
        match self {
            ModelFormat::Off => "off",
            ModelFormat::Stl => "stl",
            ModelFormat::Step => "step",
            ModelFormat::Csg => "csg",
        }
    }

    /// From the file extension (`.off`, `.stl`, `.step`/`.stp`/`.p21`,
    /// `.json`/`.csg`).
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "off" => Some(ModelFormat::Off),
            "stl" => Some(ModelFormat::Stl),
            "step" | "stp" | "p21" => Some(ModelFormat::Step),
            "json" | "csg" => Some(ModelFormat::Csg),
            _ => None,
        }
    }

    /// From the leading bytes of the file.
    pub fn sniff(bytes: &[u8]) -> Option<Self> {
        let head = String::from_utf8_lossy(&bytes[..bytes.len().min(64)]);
        let head = head.trim_start();
        if head.starts_with("ISO-10303-21") {
            Some(ModelFormat::Step)
        } else if head.starts_with("OFF") {
            Some(ModelFormat::Off)
        } else if head.starts_with("solid") || bytes.len() >= 84 {
            Some(ModelFormat::Stl)
        } else if head.starts_with('{') {
            Some(ModelFormat::Csg)
        } else {
            None
        }
    }
}

impl fmt::Display for ModelFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ModelFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "off" => Ok(ModelFormat::Off),
            "stl" => Ok(ModelFormat::Stl),
            "step" | "stp" => Ok(ModelFormat::Step),
            "csg" | "csg-json" => Ok(ModelFormat::Csg),
            other => Err(Error::UnsupportedFormat(other.into())),
        }
    }
}

/// How writers print coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// Fixed point with exactly this many fractional digits.
    Digits(usize),
    /// Shortest text that reads back to the same `f64`.
    Shortest,
}

impl Precision {
    pub fn format(self, v: f64) -> String {
        match self {
            Precision::Digits(d) => {
                let s = format!("{v:.d$}");
                // -0.000 and 0.000 are the same coordinate
                if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
                    s[1..].to_string()
                } else {
                    s
                }
            }
            Precision::Shortest => {
                let v = if v == 0.0 { 0.0 } else { v };
                format!("{v:?}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelPayload {
    Mesh(TriangleMesh),
    Csg(CsgNode),
}

impl ModelPayload {
    fn kind(&self) -> &'static str {
        match self {
            ModelPayload::Mesh(_) => "mesh",
            ModelPayload::Csg(_) => "csg",
        }
    }
}

/// A loaded model file. `units` is the unit the file itself declares, if
/// any; `digest` is the SHA-256 of the bytes it was read from.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub format: ModelFormat,
    pub payload: ModelPayload,
    pub units: Option<LengthUnit>,
    pub digest: String,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// csg-json accepts either a bare tree or `{"units": .., "model": tree}`.
#[derive(Deserialize, Serialize)]
#[serde(untagged)]
enum CsgDocument {
    Wrapped { units: Option<LengthUnit>, model: CsgNode },
    Bare(CsgNode),
}

pub fn read_model(path: &Path) -> Result<ModelFile> {
    let bytes = std::fs::read(path)?;
    let format = ModelFormat::from_path(path)
        .or_else(|| ModelFormat::sniff(&bytes))
        .ok_or_else(|| Error::UnsupportedFormat(path.to_path_buf()))?;
    decode_model(&bytes, format)
}

pub fn decode_model(bytes: &[u8], format: ModelFormat) -> Result<ModelFile> {
    let text = || {
        std::str::from_utf8(bytes).map_err(|e| Error::MalformedMesh {
            format: "text",
            line: 1 + bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count(),
            message: "invalid UTF-8".into(),
        })
    };
    let (payload, units) = match format {
        ModelFormat::Off => (ModelPayload::Mesh(read_off(text()?)?), None),
        ModelFormat::Stl => (ModelPayload::Mesh(read_stl(bytes)?), None),
        ModelFormat::Step => {
            let file = parse_part21(bytes)?;
            (ModelPayload::Mesh(extract_mesh(&file)?), declared_length_unit(&file))
        }
        ModelFormat::Csg => match serde_json::from_slice::<CsgDocument>(bytes) {
            Ok(CsgDocument::Wrapped { units, model }) => (ModelPayload::Csg(model), units),
            Ok(CsgDocument::Bare(model)) => (ModelPayload::Csg(model), None),
            // re-parse as a bare tree for a precise message
            Err(_) => (ModelPayload::Csg(serde_json::from_slice::<CsgNode>(bytes)?), None),
        },
    };
    Ok(ModelFile { format, payload, units, digest: digest(bytes) })
}

/// Encodes `payload` as `format`. Meshes cannot be written as csg-json and
/// CSG trees only as csg-json.
pub fn encode_model(
    payload: &ModelPayload,
    format: ModelFormat,
    units: Option<LengthUnit>,
    precision: Precision,
) -> Result<Vec<u8>> {
    let text = match (payload, format) {
        (ModelPayload::Mesh(m), ModelFormat::Off) => write_off(m, precision),
        (ModelPayload::Mesh(m), ModelFormat::Stl) => write_stl(m, "dtest", precision),
        (ModelPayload::Mesh(m), ModelFormat::Step) => write_step(m, units, precision),
        (ModelPayload::Csg(c), ModelFormat::Csg) => {
            let doc = match units {
                Some(u) => CsgDocument::Wrapped { units: Some(u), model: c.clone() },
                None => CsgDocument::Bare(c.clone()),
            };
            let mut s = serde_json::to_string_pretty(&doc)?;
            s.push('\n');
            s
        }
        (p, f) => return Err(Error::CannotEncode { payload: p.kind(), format: f.tag() }),
    };
    Ok(text.into_bytes())
}

/// Writes the model to `path` in the format implied by its extension and
/// returns the number of bytes written.
pub fn write_model(m: &ModelFile, path: &Path, precision: Precision) -> Result<usize> {
    let format = ModelFormat::from_path(path).ok_or_else(|| Error::UnsupportedFormat(path.to_path_buf()))?;
    let bytes = encode_model(&m.payload, format, m.units, precision)?;
    std::fs::write(path, &bytes)?;
    Ok(bytes.len())
}
