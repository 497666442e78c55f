//! Repeated write/read cycles through lossy system profiles, with per-round
//! properties and the round at which each property stops changing.

use std::fmt::{self, Write as _};
use std::io::Write;

use crate::error::{Error, Result};
use crate::fileio::{digest, write_off, Precision};
use crate::geom::Vec3;
use crate::model::{QueryableModel, TriangleMesh};
use crate::props::{hausdorff, PropertyKind, PropertyValue, Value};
use crate::proxy::Lattice;
use crate::session::{measure, Estimator};
use crate::template::{child, escape, TemplateFile};
use crate::units::LengthUnit;

/// How a system writes and reads coordinates. Lengths are in mm.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemProfile {
    pub name: String,
    /// Coordinates are rounded to multiples of this on write.
    pub write_quantum: f64,
    /// Vertices this close are merged on read.
    pub weld_tolerance: f64,
    /// Unit the coordinates are written in.
    pub unit: LengthUnit,
}

impl SystemProfile {
    pub fn new(name: impl Into<String>, write_quantum: f64, weld_tolerance: f64, unit: LengthUnit) -> Result<Self> {
        for (field, v) in [("write-quantum", write_quantum), ("weld-tolerance", weld_tolerance)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidValue {
                    field: field.into(),
                    reason: format!("{v} is not a finite length >= 0"),
                });
            }
        }
        Ok(Self { name: name.into(), write_quantum, weld_tolerance, unit })
    }

    /// The profile a template describes: write precision as the quantum,
    /// read precision as the weld tolerance.
    pub fn from_template(t: &TemplateFile) -> Self {
        Self {
            name: t.system_name.clone(),
            write_quantum: t.write_precision_mm(),
            weld_tolerance: t.read_precision_mm(),
            unit: t.units,
        }
    }
}

/// Reads `<profile name=".." unit="mm">` with `<write-quantum>` and
/// `<weld-tolerance>` children, both in the profile's unit.
pub fn parse_profile(bytes: &[u8]) -> Result<SystemProfile> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::MalformedXml(e.to_string()))?;
    let doc = roxmltree::Document::parse(text).map_err(|e| Error::MalformedXml(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "profile" {
        return Err(Error::MalformedXml(format!("root element is <{}>, expected <profile>", root.tag_name().name())));
    }
    let name = root.attribute("name").ok_or_else(|| Error::MissingField("name".into()))?;
    let unit = match root.attribute("unit") {
        Some(u) => u.parse::<LengthUnit>()?,
        None => LengthUnit::Mm,
    };
    let number = |field: &str| -> Result<f64> {
        let raw = child(root, field).and_then(|n| n.text()).ok_or_else(|| Error::MissingField(field.into()))?;
        raw.trim().parse::<f64>().map_err(|_| Error::InvalidValue {
            field: field.into(),
            reason: format!("`{}` is not a number", raw.trim()),
        })
    };
    let s = unit.to_mm();
    SystemProfile::new(name, number("write-quantum")? * s, number("weld-tolerance")? * s, unit)
}

pub fn write_profile(p: &SystemProfile) -> String {
    let s = p.unit.to_mm();
    format!(
        "<profile name=\"{}\" unit=\"{}\">\n  <write-quantum>{:e}</write-quantum>\n  <weld-tolerance>{:e}</weld-tolerance>\n</profile>\n",
        escape(&p.name),
        p.unit,
        p.write_quantum / s,
        p.weld_tolerance / s
    )
}

/// Rounding to an exact decimal grid: values become `n * units * 10^-digits`
/// and are re-read from their decimal text, as a writer and reader would.
#[derive(Debug, Clone, Copy)]
struct Quantizer {
    quantum: f64,
    units: i128,
    digits: usize,
}

impl Quantizer {
    fn new(quantum: f64) -> Option<Self> {
        if !(quantum > 0.0) {
            return None;
        }
        let mut digits = 0;
        let mut scaled = quantum;
        while digits < 15 && (scaled - scaled.round()).abs() > 1e-9 * scaled.max(1.0) {
            digits += 1;
            scaled = quantum * 10f64.powi(digits as i32);
        }
        let units = (scaled.round() as i128).max(1);
        Some(Self { quantum, units, digits })
    }

    fn apply(&self, x: f64) -> f64 {
        let n = (x / self.quantum).round_ties_even();
        if !(n.abs() < 1e17) {
            return x;
        }
        let m = n as i128 * self.units;
        let mut s = m.unsigned_abs().to_string();
        if s.len() <= self.digits {
            s = format!("{}{s}", "0".repeat(self.digits + 1 - s.len()));
        }
        if self.digits > 0 {
            s.insert(s.len() - self.digits, '.');
        }
        if m < 0 {
            s.insert(0, '-');
        }
        s.parse::<f64>().expect("decimal literal")
    }
}

/// One write/read cycle: coordinates are rounded half to even on the
/// profile's decimal grid, then vertices within the weld tolerance merge and
/// collapsed triangles are dropped.
pub fn roundtrip(mesh: &TriangleMesh, profile: &SystemProfile) -> Result<TriangleMesh> {
    let s = profile.unit.to_mm();
    let quantizer = Quantizer::new(profile.write_quantum / s);
    let written: Vec<Vec3> = mesh
        .vertices()
        .iter()
        .map(|v| {
            let u = if s == 1.0 { *v } else { *v / s };
            match quantizer {
                Some(q) => u.map(|c| q.apply(c)),
                None => u,
            }
        })
        .collect();
    let read =
        TriangleMesh::welded_soup(written, mesh.triangles().to_vec(), profile.weld_tolerance / s, mesh.provenance())
            .map_err(|e| match e {
                Error::EmptyModel => Error::AllDegenerate,
                e => e,
            })?;
    Ok(if s == 1.0 { read } else { read.map_vertices(|v| v * s) })
}

/// Digest of the mesh's exact OFF text.
pub fn mesh_digest(mesh: &TriangleMesh) -> String {
    digest(write_off(mesh, Precision::Shortest).as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stabilization {
    StabilizedAt(usize),
    NotStabilized(usize),
}

/// Table form: `Round 3` or `+10`.
impl fmt::Display for Stabilization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stabilization::StabilizedAt(l) => write!(f, "Round {l}"),
            Stabilization::NotStabilized(k) => write!(f, "+{k}"),
        }
    }
}

/// Least `l >= 1` with `values[l] == values[l - 1]`; otherwise
/// `NotStabilized(values.len())`.
pub fn detect_stabilization<T: PartialEq>(values: &[T]) -> Stabilization {
    detect_stabilization_by(values, |a, b| a == b)
}

pub fn detect_stabilization_by<T>(values: &[T], same: impl Fn(&T, &T) -> bool) -> Stabilization {
    match (1..values.len()).find(|&l| same(&values[l], &values[l - 1])) {
        Some(l) => Stabilization::StabilizedAt(l),
        None => Stabilization::NotStabilized(values.len()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    /// Profile that produced this round; `None` for the input.
    pub profile: Option<String>,
    /// In the order of the requested kinds. Hausdorff is measured against
    /// round 0.
    pub properties: Vec<PropertyValue>,
    pub digest: String,
    pub vertex_count: usize,
    pub triangle_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRobinTrace {
    pub model: String,
    pub profiles: Vec<String>,
    pub kinds: Vec<PropertyKind>,
    pub rounds: Vec<RoundRecord>,
    pub stabilization: Vec<(PropertyKind, Stabilization)>,
}

/// Fixed estimator settings for every round, so drift reflects the file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundSettings {
    pub epsilon: f64,
    pub pmq_accuracy: f64,
    pub estimator: Estimator,
}

/// Runs `k` rounds. Round `j` is produced by `profiles[j % profiles.len()]`,
/// so with two profiles the second writes the odd rounds. All rounds are
/// sampled on the lattice of the input model.
pub fn run_rounds(
    name: &str,
    mesh: &TriangleMesh,
    profiles: &[SystemProfile],
    k: usize,
    kinds: &[PropertyKind],
    settings: &RoundSettings,
) -> Result<RoundRobinTrace> {
    if k == 0 {
        return Err(Error::InvalidQuery("round-robin needs at least one round".into()));
    }
    if !(1..=2).contains(&profiles.len()) {
        return Err(Error::InvalidQuery(format!("round-robin takes one or two profiles, got {}", profiles.len())));
    }
    if kinds.is_empty() {
        return Err(Error::NoProperties);
    }
    let lattice = Lattice::covering(mesh.bounding_box(), settings.epsilon)?;
    let measure_mesh = |m: &TriangleMesh| {
        let model = QueryableModel::from_mesh(m.clone())?;
        measure(&model, lattice, settings.epsilon, settings.pmq_accuracy, kinds, &settings.estimator)
    };

    let mut rounds = Vec::with_capacity(k + 1);
    let mut current = mesh.clone();
    let mut reference = None;
    for j in 0..=k {
        let profile = (j > 0).then(|| &profiles[j % profiles.len()]);
        if let Some(p) = profile {
            current = roundtrip(&current, p)?;
        }
        let m = measure_mesh(&current)?;
        if j == 0 {
            reference = m.cloud.clone();
        }
        let mut properties = Vec::with_capacity(kinds.len());
        for &kind in kinds {
            if kind == PropertyKind::Hausdorff {
                let (a, b) = (reference.as_ref(), m.cloud.as_ref());
                properties.push(hausdorff(a.expect("cloud built"), b.expect("cloud built"))?);
            } else {
                properties.push(m.get(kind).expect("value computed").clone());
            }
        }
        rounds.push(RoundRecord {
            round: j,
            profile: profile.map(|p| p.name.clone()),
            properties,
            digest: mesh_digest(&current),
            vertex_count: current.vertices().len(),
            triangle_count: current.triangles().len(),
        });
    }

    let stabilization = kinds
        .iter()
        .enumerate()
        .map(|(i, &kind)| {
            let values: Vec<&Value> = rounds.iter().map(|r| &r.properties[i].value).collect();
            let s = match detect_stabilization_by(&values, |a, b| a.identical(b)) {
                Stabilization::NotStabilized(_) => Stabilization::NotStabilized(k),
                s => s,
            };
            (kind, s)
        })
        .collect();

    Ok(RoundRobinTrace {
        model: name.to_string(),
        profiles: profiles.iter().map(|p| p.name.clone()).collect(),
        kinds: kinds.to_vec(),
        rounds,
        stabilization,
    })
}

/// CSV with columns `round,property,value,digest`; values in full precision.
pub fn write_trace_csv(trace: &RoundRobinTrace, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["round", "property", "value", "digest"])?;
    for r in &trace.rounds {
        for p in &r.properties {
            w.write_record([r.round.to_string().as_str(), p.kind.name(), &p.value.full_repr(), &r.digest])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn row_label(j: usize) -> String {
    if j == 0 {
        "M_i".to_string()
    } else {
        format!("M_i_{j}")
    }
}

/// Plain-text table: one row per round, one column per property, closed by
/// the `Stabilized in` row.
pub fn render_summary(trace: &RoundRobinTrace) -> String {
    let mut rows: Vec<Vec<String>> = Vec::with_capacity(trace.rounds.len() + 2);
    let mut head = vec!["Model".to_string()];
    head.extend(trace.kinds.iter().map(|k| k.name().to_string()));
    rows.push(head);
    for r in &trace.rounds {
        let mut row = vec![row_label(r.round)];
        row.extend(r.properties.iter().map(|p| p.value.full_repr()));
        rows.push(row);
    }
    let mut last = vec!["Stabilized in".to_string()];
    last.extend(trace.stabilization.iter().map(|(_, s)| s.to_string()));
    rows.push(last);

    let columns = rows[0].len();
    let widths: Vec<usize> =
        (0..columns).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    let mut out = format!("Round-robin of {} through {}\n", trace.model, trace.profiles.join(", "));
    for (i, row) in rows.iter().enumerate() {
        if i == rows.len() - 1 {
            let total = widths.iter().sum::<usize>() + 2 * (columns - 1);
            let _ = writeln!(out, "{}", "-".repeat(total));
        }
        let cells: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    out
}
