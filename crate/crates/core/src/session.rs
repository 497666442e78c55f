//! Orchestration shared by the command line and the browser demo: loading a
//! model through its template, building proxies once per model, and turning
//! property values into an interoperability report.

use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::{compare, compare_joint, InteropReport};
use crate::fileio::{decode_model, encode_model, ModelFile, ModelFormat, ModelPayload, Precision};
use crate::model::QueryableModel;
use crate::props::{
    centroid, connected_components, convexity_on, euler_characteristic, hausdorff, manifoldness, surface_area, volume,
    ManifoldnessReport, PropertyKind, PropertyValue, Value, DEFAULT_CONVEXITY_PAIRS,
};
use crate::proxy::{build_interior_grid_on, build_point_cloud_on, Lattice, PointCloud, DEFAULT_CELL_BUDGET};
use crate::roundrobin::{roundtrip, SystemProfile};
use crate::template::{compute_ball_radius, parse_template, TemplateFile};
use crate::units::LengthUnit;

pub const DEFAULT_RAYS: usize = 10_000;

/// Knobs of the randomized estimators and the grid size guard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimator {
    pub n_rays: usize,
    pub n_pairs: usize,
    pub seed: u64,
    pub cell_budget: usize,
}

impl Default for Estimator {
    fn default() -> Self {
        Self { n_rays: DEFAULT_RAYS, n_pairs: DEFAULT_CONVEXITY_PAIRS, seed: 0, cell_budget: DEFAULT_CELL_BUDGET }
    }
}

#[derive(Debug, Clone)]
pub struct Measurement {
    /// One value per requested kind except Hausdorff, in request order.
    pub values: Vec<PropertyValue>,
    /// Present when Hausdorff was requested.
    pub cloud: Option<PointCloud>,
}

impl Measurement {
    pub fn get(&self, kind: PropertyKind) -> Option<&PropertyValue> {
        self.values.iter().find(|v| v.kind == kind)
    }
}

fn needs_grid(kind: PropertyKind) -> bool {
    matches!(
        kind,
        PropertyKind::Volume
            | PropertyKind::Centroid
            | PropertyKind::Convexity
            | PropertyKind::EulerCharacteristic
            | PropertyKind::Components
    )
}

/// Computes `kinds` on one model. The interior grid and the point cloud are
/// each built at most once, on `lattice`.
pub fn measure(
    model: &QueryableModel,
    lattice: Lattice,
    epsilon: f64,
    pmq_accuracy: f64,
    kinds: &[PropertyKind],
    est: &Estimator,
) -> Result<Measurement> {
    lattice.check_budget(est.cell_budget)?;
    let grid = if kinds.iter().any(|k| needs_grid(*k)) {
        Some(build_interior_grid_on(model, lattice, epsilon, pmq_accuracy)?)
    } else {
        None
    };
    let cloud = if kinds.contains(&PropertyKind::Hausdorff) {
        Some(build_point_cloud_on(model, lattice, pmq_accuracy)?)
    } else {
        None
    };
    let mut values = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let g = || grid.as_ref().expect("grid built for grid properties");
        let v = match kind {
            PropertyKind::Hausdorff => continue,
            PropertyKind::Volume => volume(g()),
            PropertyKind::SurfaceArea => surface_area(model, epsilon, pmq_accuracy, est.n_rays, est.seed)?,
            PropertyKind::Centroid => centroid(g())?,
            PropertyKind::Convexity => convexity_on(g(), model, est.n_pairs, est.seed)?,
            PropertyKind::EulerCharacteristic => euler_characteristic(g())?,
            PropertyKind::Components => connected_components(g()),
            PropertyKind::Manifoldness => match model.mesh() {
                Some(mesh) => manifoldness(mesh),
                // analytic solids are closed by construction
                None => PropertyValue::new(kind, Value::Manifold(ManifoldnessReport::default()), 0.0),
            },
        };
        values.push(v);
    }
    Ok(Measurement { values, cloud })
}

/// A model loaded through its template: coordinates in mm, read through the
/// system's precision profile.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub template: TemplateFile,
    /// Template file name, e.g. `Rcoil.xml`.
    pub source: String,
    /// Model name, e.g. `Rcoil`.
    pub label: String,
    pub file: ModelFile,
    pub model: QueryableModel,
}

impl LoadedModel {
    pub fn profile(&self) -> SystemProfile {
        SystemProfile::from_template(&self.template)
    }
}

fn file_label(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn stem_label(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Reads a template and the model it names. A relative model path is
/// resolved against the template's directory.
pub fn load_template(path: &Path) -> Result<LoadedModel> {
    let template = parse_template(&std::fs::read(path)?)?;
    let model_path = if template.model_path.is_absolute() {
        template.model_path.clone()
    } else {
        path.parent().unwrap_or(Path::new("")).join(&template.model_path)
    };
    let bytes = std::fs::read(&model_path)?;
    let file = decode_model(&bytes, template.model_format)?;
    let label = stem_label(&model_path);
    load_decoded(template, file_label(path), label, file)
}

/// Applies units and the reading profile to an already decoded file. A unit
/// declared in the file wins over the template's.
pub fn load_decoded(template: TemplateFile, source: String, label: String, file: ModelFile) -> Result<LoadedModel> {
    let unit = file.units.unwrap_or(template.units);
    let model = to_queryable(&file.payload, unit, &SystemProfile::from_template(&template))?;
    Ok(LoadedModel { template, source, label, file, model })
}

fn to_queryable(payload: &ModelPayload, unit: LengthUnit, profile: &SystemProfile) -> Result<QueryableModel> {
    let s = unit.to_mm();
    let model = match payload {
        ModelPayload::Mesh(mesh) => {
            let in_mm = if s == 1.0 { mesh.clone() } else { mesh.map_vertices(|v| v * s) };
            QueryableModel::from_mesh(roundtrip(&in_mm, profile)?)?
        }
        ModelPayload::Csg(root) => {
            let root = if s == 1.0 { root.clone() } else { root.map_leaves(&|p| p.scaled(s)) };
            QueryableModel::from_csg(root)?
        }
    };
    Ok(model.with_units(unit))
}

/// Decimal digits that represent `quantum` exactly, or all of them when
/// the quantum is zero.
pub fn precision_for(quantum: f64) -> Precision {
    if !(quantum > 0.0) {
        return Precision::Shortest;
    }
    let digits = (-quantum.log10() - 1e-9).ceil().clamp(0.0, 17.0) as usize;
    Precision::Digits(digits)
}

/// Writes `from`'s model the way its system would into `format`, then reads
/// the bytes back through `reader`'s template: the translation `M1 -> M1^t`.
pub fn translate(
    from: &LoadedModel,
    reader: &TemplateFile,
    format: ModelFormat,
    precision: Option<Precision>,
) -> Result<LoadedModel> {
    let unit = from.file.units.unwrap_or(from.template.units);
    let precision = precision.unwrap_or_else(|| precision_for(from.template.write_precision));
    let bytes = encode_model(&from.file.payload, format, Some(unit), precision)?;
    let mut file = decode_model(&bytes, format)?;
    // coordinates stay in the writer's units
    file.units.get_or_insert(unit);
    load_decoded(reader.clone(), from.source.clone(), from.label.clone(), file)
}

#[derive(Debug, Clone)]
pub struct CompareRequest {
    pub kinds: Vec<PropertyKind>,
    pub tolerance: f64,
    /// Overrides the ball radius derived from the templates.
    pub epsilon: Option<f64>,
    pub estimator: Estimator,
    pub translated: bool,
    /// Build the point clouds even when Hausdorff is not requested.
    pub keep_clouds: bool,
}

#[derive(Debug, Clone)]
pub struct CompareOutcome {
    pub report: InteropReport,
    pub clouds: Option<(PointCloud, PointCloud)>,
}

/// Builds both models' proxies on one lattice covering both boxes, so equal
/// models give bit-identical proxies, and compares every requested kind.
pub fn compare_models(m1: &LoadedModel, m2: &LoadedModel, req: &CompareRequest) -> Result<CompareOutcome> {
    if req.kinds.is_empty() {
        return Err(Error::NoProperties);
    }
    let interval = compute_ball_radius(&m1.template, &m2.template)?;
    let epsilon = req.epsilon.unwrap_or(interval.chosen);
    let bbox = m1.model.bounding_box().hull(m2.model.bounding_box());
    let lattice = Lattice::covering(bbox, epsilon)?;
    let mut kinds = req.kinds.clone();
    if req.keep_clouds && !kinds.contains(&PropertyKind::Hausdorff) {
        kinds.push(PropertyKind::Hausdorff);
    }
    let a = measure(&m1.model, lattice, epsilon, m1.template.pmq_accuracy_mm(), &kinds, &req.estimator)?;
    let b = measure(&m2.model, lattice, epsilon, m2.template.pmq_accuracy_mm(), &kinds, &req.estimator)?;

    let mut results = Vec::with_capacity(req.kinds.len());
    for &kind in &req.kinds {
        let r = if kind == PropertyKind::Hausdorff {
            let (ca, cb) = (a.cloud.as_ref(), b.cloud.as_ref());
            let joint = hausdorff(ca.expect("cloud built"), cb.expect("cloud built"))?;
            compare_joint(&joint, req.tolerance)?
        } else {
            let (va, vb) = (a.get(kind), b.get(kind));
            compare(va.expect("value computed"), vb.expect("value computed"), req.tolerance)?
        };
        results.push(r);
    }
    let report = InteropReport {
        system1: m1.template.system_name.clone(),
        system2: m2.template.system_name.clone(),
        model1: m1.label.clone(),
        model2: m2.label.clone(),
        source1: m1.source.clone(),
        source2: m2.source.clone(),
        tolerance: req.tolerance,
        ball_radius: epsilon,
        topological_class: Some((m1.template.topological_class.clone(), m2.template.topological_class.clone())),
        translated: req.translated,
        results,
    };
    Ok(CompareOutcome { report, clouds: a.cloud.zip(b.cloud) })
}
