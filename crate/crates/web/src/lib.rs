//! Browser bindings for the proxy and round-robin demo page. Every export
//! takes model text plus a format tag (`off`, `stl`, `step`, `csg`) and
//! returns JSON.

use dtest_core::fileio::{decode_model, ModelFormat, ModelPayload};
use dtest_core::model::{Classification, QueryableModel, TriangleMesh};
use dtest_core::props::{PropertyKind, Value};
use dtest_core::proxy::Lattice;
use dtest_core::roundrobin::{run_rounds, RoundSettings, SystemProfile};
use dtest_core::session::{measure, Estimator};
use dtest_core::units::LengthUnit;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Grids past this many cells are refused; the page runs on one thread.
const WEB_CELL_BUDGET: usize = 1 << 21;

type Result<T> = std::result::Result<T, String>;

fn format_of(tag: &str) -> Result<ModelFormat> {
    match tag {
        "off" => Ok(ModelFormat::Off),
        "stl" => Ok(ModelFormat::Stl),
        "step" => Ok(ModelFormat::Step),
        "csg" => Ok(ModelFormat::Csg),
        other => Err(format!("unknown format `{other}`")),
    }
}

fn load(text: &str, format: &str) -> Result<(QueryableModel, Option<TriangleMesh>)> {
    let file = decode_model(text.as_bytes(), format_of(format)?).map_err(|e| e.to_string())?;
    let scale = file.units.unwrap_or(LengthUnit::Mm).to_mm();
    match file.payload {
        ModelPayload::Mesh(m) => {
            let m = if scale == 1.0 { m } else { m.map_vertices(|v| v * scale) };
            Ok((QueryableModel::from_mesh(m.clone()).map_err(|e| e.to_string())?, Some(m)))
        }
        ModelPayload::Csg(c) => {
            let c = c.map_leaves(&|p| p.scaled(scale));
            Ok((QueryableModel::from_csg(c).map_err(|e| e.to_string())?, None))
        }
    }
}

fn lattice(model: &QueryableModel, epsilon: f64) -> Result<Lattice> {
    let l = Lattice::covering(model.bounding_box(), epsilon).map_err(|e| e.to_string())?;
    l.check_budget(WEB_CELL_BUDGET).map_err(|e| e.to_string())?;
    Ok(l)
}

#[derive(Serialize)]
struct Slice {
    nx: usize,
    ny: usize,
    spacing: f64,
    z: f64,
    /// One string per row, `#` inside, `+` boundary, `.` outside.
    rows: Vec<String>,
}

pub fn slice_json(text: &str, format: &str, epsilon: f64, height: f64) -> Result<String> {
    let (model, _) = load(text, format)?;
    let l = lattice(&model, epsilon)?;
    let [nx, ny, nz] = l.dims;
    let k = ((height.clamp(0.0, 1.0) * (nz - 1) as f64).round()) as usize;
    let mut rows = Vec::with_capacity(ny);
    for j in (0..ny).rev() {
        let mut row = String::with_capacity(nx);
        for i in 0..nx {
            row.push(match model.classify(l.point(i, j, k)).map_err(|e| e.to_string())? {
                Classification::Inside => '#',
                Classification::Boundary => '+',
                Classification::Outside => '.',
            });
        }
        rows.push(row);
    }
    let slice = Slice { nx, ny, spacing: l.spacing, z: l.point(0, 0, k).z, rows };
    serde_json::to_string(&slice).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Property {
    name: &'static str,
    value: String,
    error: f64,
}

fn kinds_of(list: &str) -> Result<Vec<PropertyKind>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<PropertyKind>().map_err(|e| e.to_string()))
        .collect()
}

fn shown(v: &Value) -> String {
    match v {
        Value::Scalar(x) => format!("{x:.8}"),
        Value::Vector(p) => format!("({:.8}, {:.8}, {:.8})", p.x, p.y, p.z),
        other => other.to_string(),
    }
}

pub fn properties_json(text: &str, format: &str, epsilon: f64, kinds: &str, rays: usize) -> Result<String> {
    let (model, _) = load(text, format)?;
    let kinds: Vec<PropertyKind> = kinds_of(kinds)?.into_iter().filter(|k| *k != PropertyKind::Hausdorff).collect();
    if kinds.is_empty() {
        return Err("choose at least one property other than the Hausdorff distance".into());
    }
    let est = Estimator { n_rays: rays, n_pairs: rays, cell_budget: WEB_CELL_BUDGET, ..Estimator::default() };
    let m = measure(&model, lattice(&model, epsilon)?, epsilon, 0.0, &kinds, &est).map_err(|e| e.to_string())?;
    let out: Vec<Property> = m
        .values
        .iter()
        .map(|v| Property { name: v.kind.name(), value: shown(&v.value), error: v.error_estimate })
        .collect();
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Round {
    round: usize,
    profile: Option<String>,
    digest: String,
    vertices: usize,
    triangles: usize,
    values: Vec<String>,
}

#[derive(Serialize)]
struct Trace {
    kinds: Vec<&'static str>,
    rounds: Vec<Round>,
    stabilized: Vec<String>,
}

/// Quanta and weld tolerances in mm. A zero second quantum runs a single
/// profile.
pub fn round_robin_json(
    text: &str,
    format: &str,
    quantum_a: f64,
    quantum_b: f64,
    weld: f64,
    rounds: usize,
    kinds: &str,
) -> Result<String> {
    let (model, mesh) = load(text, format)?;
    let mesh = mesh.ok_or("round-robin needs a mesh model")?;
    let mut profiles = vec![SystemProfile::new("A", quantum_a, weld, LengthUnit::Mm).map_err(|e| e.to_string())?];
    if quantum_b > 0.0 {
        profiles.push(SystemProfile::new("B", quantum_b, weld, LengthUnit::Mm).map_err(|e| e.to_string())?);
    }
    let kinds = kinds_of(kinds)?;
    let epsilon = model.bounding_box().extent().norm() / 64.0;
    let settings = RoundSettings {
        epsilon,
        pmq_accuracy: 0.0,
        estimator: Estimator { n_rays: 2000, n_pairs: 2000, cell_budget: WEB_CELL_BUDGET, ..Estimator::default() },
    };
    let trace = run_rounds("model", &mesh, &profiles, rounds, &kinds, &settings).map_err(|e| e.to_string())?;
    let out = Trace {
        kinds: trace.kinds.iter().map(|k| k.name()).collect(),
        rounds: trace
            .rounds
            .iter()
            .map(|r| Round {
                round: r.round,
                profile: r.profile.clone(),
                digest: r.digest[..12].to_string(),
                vertices: r.vertex_count,
                triangles: r.triangle_count,
                values: r.properties.iter().map(|p| shown(&p.value)).collect(),
            })
            .collect(),
        stabilized: trace.stabilization.iter().map(|(_, s)| s.to_string()).collect(),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn proxy_slice(text: &str, format: &str, epsilon: f64, height: f64) -> std::result::Result<String, JsValue> {
    slice_json(text, format, epsilon, height).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn properties(
    text: &str,
    format: &str,
    epsilon: f64,
    kinds: &str,
    rays: usize,
) -> std::result::Result<String, JsValue> {
    properties_json(text, format, epsilon, kinds, rays).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn round_robin(
    text: &str,
    format: &str,
    quantum_a: f64,
    quantum_b: f64,
    weld: f64,
    rounds: usize,
    kinds: &str,
) -> std::result::Result<String, JsValue> {
    round_robin_json(text, format, quantum_a, quantum_b, weld, rounds, kinds).map_err(|e| JsValue::from_str(&e))
}
