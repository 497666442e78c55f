//! Command-line front end. `run` takes the argument vector and output sinks
//! and returns the process exit code, so tests can drive it in-process.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser};
use dtest_core::eval::{render_report, render_sidecar, Verdict};
use dtest_core::fileio::{encode_model, read_model, write_point_cloud_off, ModelFormat, ModelPayload, Precision};
use dtest_core::props::PropertyKind;
use dtest_core::proxy::DEFAULT_CELL_BUDGET;
use dtest_core::roundrobin::{parse_profile, render_summary, run_rounds, write_trace_csv, RoundSettings};
use dtest_core::session::{compare_models, load_template, translate, CompareRequest, Estimator, DEFAULT_RAYS};
use dtest_core::{Error, Result};

pub const EXIT_COMPATIBLE: i32 = 0;
pub const EXIT_INCOMPATIBLE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Ball radius for round-robin runs without `--epsilon`, as a fraction of
/// the model's bounding-box diagonal.
const ROUNDROBIN_EPSILON_FRACTION: f64 = 1.0 / 64.0;

#[derive(Args, Debug, Clone)]
struct EstimatorArgs {
    /// Seed for the randomized estimators.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Crofton lines for surface area.
    #[arg(long, default_value_t = DEFAULT_RAYS)]
    rays: usize,
    /// Random point pairs for the convexity test.
    #[arg(long, default_value_t = dtest_core::props::DEFAULT_CONVEXITY_PAIRS)]
    pairs: usize,
    /// Largest proxy lattice, in cells.
    #[arg(long, default_value_t = DEFAULT_CELL_BUDGET)]
    cell_budget: usize,
}

impl EstimatorArgs {
    fn estimator(&self) -> Estimator {
        Estimator { n_rays: self.rays, n_pairs: self.pairs, seed: self.seed, cell_budget: self.cell_budget }
    }
}

/// Decide whether two models are interchangeable for a shape property.
#[derive(Parser, Debug)]
#[command(name = "dtest", version, allow_negative_numbers = true)]
#[command(
    after_help = "Other modes:\n  dtest roundrobin <model> --rounds K --profile P1 [--profile P2] --properties LIST\n  dtest convert <input> <output> [--digits N]"
)]
struct CompareCli {
    template1: PathBuf,
    template2: PathBuf,
    /// volume, surface-area, hausdorff-distance, centroid, convexity,
    /// euler-characteristic, components, manifoldness, a comma list, or all.
    test_name: String,
    tolerance: f64,
    /// Ball radius in mm instead of the one derived from the templates.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Write the point-cloud proxies as OFF: model 1 to this path, model 2
    /// next to it with a `-2` suffix.
    #[arg(long, value_name = "PATH")]
    dump_proxy: Option<PathBuf>,
    /// Compare model 1 with its own translation written by system 1 and
    /// read by system 2.
    #[arg(long)]
    translated: bool,
    /// Format of the translation; defaults to template 2's model format.
    #[arg(long, requires = "translated", value_name = "FORMAT")]
    translate_format: Option<ModelFormat>,
    /// Decimal digits of the translation; defaults to system 1's write
    /// precision.
    #[arg(long, requires = "translated")]
    digits: Option<usize>,
    /// Write one key=value block per comparison to this file.
    #[arg(long, value_name = "PATH")]
    sidecar: Option<PathBuf>,
    #[command(flatten)]
    estimator: EstimatorArgs,
}

/// Repeatedly write and read a model through one or two system profiles.
#[derive(Parser, Debug)]
#[command(name = "dtest roundrobin", bin_name = "dtest roundrobin")]
struct RoundRobinCli {
    model: PathBuf,
    #[arg(long)]
    rounds: usize,
    /// Profile XML; give two to alternate between systems.
    #[arg(long = "profile", required = true, num_args = 1)]
    profiles: Vec<PathBuf>,
    /// Comma-separated property names, or all.
    #[arg(long)]
    properties: String,
    /// Ball radius in mm; defaults to 1/64 of the bounding-box diagonal.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Boundary band of the point-membership queries, in mm.
    #[arg(long, default_value_t = 0.0)]
    pmq_accuracy: f64,
    #[arg(long, default_value = "trace.csv")]
    out: PathBuf,
    #[command(flatten)]
    estimator: EstimatorArgs,
}

/// Convert a model between formats.
#[derive(Parser, Debug)]
#[command(name = "dtest convert", bin_name = "dtest convert")]
struct ConvertCli {
    input: PathBuf,
    output: PathBuf,
    /// Fixed decimal digits; shortest exact form when omitted.
    #[arg(long)]
    digits: Option<usize>,
}

enum Failure {
    Usage(clap::Error),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(Error::Io(e))
    }
}

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let sub = args.get(1).and_then(|a| a.to_str()).unwrap_or("");
    let result = match sub {
        "roundrobin" => parse::<RoundRobinCli>(&args, true).and_then(|c| roundrobin(c, out)),
        "convert" => parse::<ConvertCli>(&args, true).and_then(|c| convert(c, out)),
        _ => parse::<CompareCli>(&args, false).and_then(|c| compare(c, out)),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(e)) => {
            let text = e.render().to_string();
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{text}");
                EXIT_COMPATIBLE
            } else {
                let _ = write!(err, "{text}");
                EXIT_ERROR
            }
        }
        Err(Failure::Run(e)) => {
            let line = e.to_string().replace('\n', " ");
            let _ = writeln!(err, "dtest: error: {line}");
            EXIT_ERROR
        }
    }
}

/// `subcommand` drops the subcommand word so the positionals line up.
fn parse<C: Parser>(args: &[OsString], subcommand: bool) -> std::result::Result<C, Failure> {
    let argv: Vec<OsString> =
        if subcommand { args[..1].iter().chain(&args[2..]).cloned().collect() } else { args.to_vec() };
    C::try_parse_from(argv).map_err(Failure::Usage)
}

fn usage(message: impl Into<String>) -> Failure {
    Failure::Usage(clap::Error::raw(ErrorKind::ValueValidation, format!("{}\n", message.into())))
}

/// Parses `all` or a comma list, dropping repeats.
pub fn parse_kinds(list: &str) -> Result<Vec<PropertyKind>> {
    if list.trim() == "all" {
        return Ok(PropertyKind::ALL.to_vec());
    }
    let mut kinds = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let k: PropertyKind = name.parse()?;
        if !kinds.contains(&k) {
            kinds.push(k);
        }
    }
    if kinds.is_empty() {
        return Err(Error::NoProperties);
    }
    Ok(kinds)
}

fn compare(c: CompareCli, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let kinds = parse_kinds(&c.test_name).map_err(|e| usage(e.to_string()))?;
    let numeric = kinds.iter().any(|k| !k.is_categorical());
    if !c.tolerance.is_finite() || c.tolerance < 0.0 || (numeric && c.tolerance == 0.0) {
        return Err(usage(format!("tolerance must be positive, got {}", c.tolerance)));
    }
    if let Some(e) = c.epsilon {
        if !(e > 0.0 && e.is_finite()) {
            return Err(usage(format!("--epsilon must be positive, got {e}")));
        }
    }

    let m1 = load_template(&c.template1)?;
    let m2 = if c.translated {
        let reader = load_template_only(&c.template2)?;
        let format = c.translate_format.unwrap_or(reader.model_format);
        let mut m2 = translate(&m1, &reader, format, c.digits.map(Precision::Digits))?;
        m2.source = file_name(&c.template2);
        m2
    } else {
        load_template(&c.template2)?
    };
    let req = CompareRequest {
        kinds,
        tolerance: c.tolerance,
        epsilon: c.epsilon,
        estimator: c.estimator.estimator(),
        translated: c.translated,
        keep_clouds: c.dump_proxy.is_some(),
    };
    let outcome = compare_models(&m1, &m2, &req)?;
    out.write_all(render_report(&outcome.report)?.as_bytes())?;

    if let (Some(path), Some((a, b))) = (&c.dump_proxy, &outcome.clouds) {
        std::fs::write(path, write_point_cloud_off(&a.points, Precision::Shortest))?;
        std::fs::write(second_path(path), write_point_cloud_off(&b.points, Precision::Shortest))?;
    }
    if let Some(path) = &c.sidecar {
        std::fs::write(path, render_sidecar(&outcome.report))?;
    }
    Ok(match outcome.report.verdict() {
        Verdict::Compatible => EXIT_COMPATIBLE,
        Verdict::Incompatible => EXIT_INCOMPATIBLE,
    })
}

fn load_template_only(path: &Path) -> Result<dtest_core::template::TemplateFile> {
    dtest_core::template::parse_template(&std::fs::read(path)?)
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn second_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-2.{}", ext.to_string_lossy()),
        None => format!("{stem}-2"),
    };
    path.with_file_name(name)
}

fn roundrobin(c: RoundRobinCli, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    if c.rounds == 0 {
        return Err(usage("--rounds must be at least 1"));
    }
    if c.profiles.len() > 2 {
        return Err(usage(format!("at most two --profile options, got {}", c.profiles.len())));
    }
    let kinds = parse_kinds(&c.properties).map_err(|e| usage(e.to_string()))?;
    let profiles = c.profiles.iter().map(|p| parse_profile(&std::fs::read(p)?)).collect::<Result<Vec<_>>>()?;

    let file = read_model(&c.model)?;
    let mesh = match file.payload {
        ModelPayload::Mesh(m) => m,
        ModelPayload::Csg(_) => return Err(Error::CannotEncode { payload: "csg", format: "round-robin" }.into()),
    };
    let s = file.units.map_or(1.0, |u| u.to_mm());
    let mesh = if s == 1.0 { mesh } else { mesh.map_vertices(|v| v * s) };
    let epsilon = c.epsilon.unwrap_or_else(|| mesh.bounding_box().extent().norm() * ROUNDROBIN_EPSILON_FRACTION);
    let settings = RoundSettings { epsilon, pmq_accuracy: c.pmq_accuracy, estimator: c.estimator.estimator() };
    let trace = run_rounds(&file_name(&c.model), &mesh, &profiles, c.rounds, &kinds, &settings)?;

    let mut csv = Vec::new();
    write_trace_csv(&trace, &mut csv)?;
    std::fs::write(&c.out, csv)?;
    out.write_all(render_summary(&trace).as_bytes())?;
    Ok(EXIT_COMPATIBLE)
}

fn convert(c: ConvertCli, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let file = read_model(&c.input)?;
    let format = ModelFormat::from_path(&c.output).ok_or_else(|| Error::UnsupportedFormat(c.output.clone()))?;
    let precision = c.digits.map_or(Precision::Shortest, Precision::Digits);
    let bytes = encode_model(&file.payload, format, file.units, precision)?;
    std::fs::write(&c.output, &bytes)?;
    writeln!(out, "wrote {} bytes to {}", bytes.len(), c.output.display())?;
    Ok(EXIT_COMPATIBLE)
}
