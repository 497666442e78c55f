//! Per-model template files: system tolerances, algorithm precisions, the
//! model's minimum feature size, and the proxy ball radius derived from them.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fileio::ModelFormat;
use crate::units::LengthUnit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Query {
    Pmq,
    Distance,
    Integral,
}

impl Query {
    pub fn tag(self) -> &'static str {
        match self {
            Query::Pmq => "PMQ",
            Query::Distance => "distance",
            Query::Integral => "integral",
        }
    }
}

impl FromStr for Query {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pmq" => Ok(Query::Pmq),
            "distance" => Ok(Query::Distance),
            "integral" => Ok(Query::Integral),
            other => Err(invalid("queries", format!("unknown query `{other}`"))),
        }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Contents of one template file. Lengths are stored in `units` exactly as
/// written; the `*_mm` accessors convert.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateFile {
    pub system_name: String,
    pub api_options: Vec<String>,
    pub scripting_languages: Vec<String>,
    pub absolute_tolerance: f64,
    /// Radians. Carried for completeness; no computation uses it.
    pub angular_tolerance: f64,
    pub read_precision: f64,
    pub write_precision: f64,
    pub pmq_accuracy: f64,
    pub supported_queries: BTreeSet<Query>,
    pub units: LengthUnit,
    pub topological_class: String,
    pub min_feature_size: f64,
    pub model_path: PathBuf,
    pub model_format: ModelFormat,
}

impl TemplateFile {
    pub fn absolute_tolerance_mm(&self) -> f64 {
        self.absolute_tolerance * self.units.to_mm()
    }

    /// The larger of the read and write precisions, in mm.
    pub fn algorithm_precision_mm(&self) -> f64 {
        self.read_precision.max(self.write_precision) * self.units.to_mm()
    }

    pub fn read_precision_mm(&self) -> f64 {
        self.read_precision * self.units.to_mm()
    }

    pub fn write_precision_mm(&self) -> f64 {
        self.write_precision * self.units.to_mm()
    }

    pub fn pmq_accuracy_mm(&self) -> f64 {
        self.pmq_accuracy * self.units.to_mm()
    }

    pub fn min_feature_size_mm(&self) -> f64 {
        self.min_feature_size * self.units.to_mm()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be positive, got {v}")))
            }
        };
        let non_negative = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be non-negative, got {v}")))
            }
        };
        positive("absolute-tolerance", self.absolute_tolerance)?;
        non_negative("angular-tolerance", self.angular_tolerance)?;
        non_negative("read-precision", self.read_precision)?;
        non_negative("write-precision", self.write_precision)?;
        non_negative("pmq-accuracy", self.pmq_accuracy)?;
        positive("min-feature-size", self.min_feature_size)?;
        if !self.supported_queries.contains(&Query::Pmq) {
            return Err(invalid("queries", "PMQ must be supported".into()));
        }
        Ok(())
    }
}

fn invalid(field: &str, reason: String) -> Error {
    Error::InvalidValue { field: field.into(), reason }
}

fn missing(field: &str) -> Error {
    Error::MissingField(field.into())
}

pub fn parse_template(bytes: &[u8]) -> Result<TemplateFile> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::MalformedXml(e.to_string()))?;
    let doc = roxmltree::Document::parse(text).map_err(|e| Error::MalformedXml(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "template" {
        return Err(Error::MalformedXml(format!("root element is <{}>, expected <template>", root.tag_name().name())));
    }
    let system = child(root, "system").ok_or_else(|| missing("system"))?;
    let model = child(root, "model").ok_or_else(|| missing("model"))?;

    let attr = |node: Option<roxmltree::Node<'_, '_>>, name: &str, field: &str| -> Result<String> {
        node.and_then(|n| n.attribute(name)).map(str::to_owned).ok_or_else(|| missing(field))
    };
    let number = |node: Option<roxmltree::Node<'_, '_>>, name: &str, field: &str| -> Result<f64> {
        let raw = attr(node, name, field)?;
        raw.trim().parse::<f64>().map_err(|_| invalid(field, format!("`{raw}` is not a number")))
    };
    let text_of = |node: Option<roxmltree::Node<'_, '_>>| node.map(|n| n.text().unwrap_or("").to_owned());
    let list = |s: Option<String>| -> Vec<String> {
        s.map(|s| s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(str::to_owned).collect())
            .unwrap_or_default()
    };

    let tolerance = child(system, "tolerance");
    let precision = child(system, "precision");
    let queries = text_of(child(system, "queries")).ok_or_else(|| missing("queries"))?;
    let supported_queries =
        queries.split(',').filter(|q| !q.trim().is_empty()).map(Query::from_str).collect::<Result<BTreeSet<_>>>()?;
    let units = text_of(child(system, "units"))
        .ok_or_else(|| missing("units"))?
        .parse::<LengthUnit>()
        .map_err(|e| invalid("units", e.to_string()))?;
    let min_feature_raw = text_of(child(model, "min-feature-size")).ok_or_else(|| missing("min-feature-size"))?;
    let min_feature_size = min_feature_raw
        .trim()
        .parse::<f64>()
        .map_err(|_| invalid("min-feature-size", format!("`{min_feature_raw}` is not a number")))?;
    let format_raw = attr(Some(model), "format", "model-format")?;
    let model_format = match format_raw.trim() {
        "off" => ModelFormat::Off,
        "stl" => ModelFormat::Stl,
        "step" => ModelFormat::Step,
        "csg" => ModelFormat::Csg,
        other => return Err(invalid("model-format", format!("unknown format `{other}`"))),
    };

    let t = TemplateFile {
        system_name: attr(Some(system), "name", "system-name")?,
        api_options: list(text_of(child(system, "api"))),
        scripting_languages: list(text_of(child(system, "scripting"))),
        absolute_tolerance: number(tolerance, "absolute", "absolute-tolerance")?,
        angular_tolerance: number(tolerance, "angular", "angular-tolerance")?,
        read_precision: number(precision, "read", "read-precision")?,
        write_precision: number(precision, "write", "write-precision")?,
        pmq_accuracy: number(precision, "pmq", "pmq-accuracy")?,
        supported_queries,
        units,
        topological_class: attr(child(model, "topology"), "class", "topological-class")?,
        min_feature_size,
        model_path: PathBuf::from(attr(Some(model), "path", "model-path")?),
        model_format,
    };
    t.validate()?;
    Ok(t)
}

pub(crate) fn child<'a, 'i>(parent: roxmltree::Node<'a, 'i>, name: &str) -> Option<roxmltree::Node<'a, 'i>> {
    parent.children().find(|n| n.is_element() && n.tag_name().name() == name)
}

pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Serializes a template; numbers use the shortest exponent form that
/// parses back to the same value.
pub fn write_template(t: &TemplateFile) -> Vec<u8> {
    let mut s = String::new();
    let queries: Vec<&str> = t.supported_queries.iter().map(|q| q.tag()).collect();
    let format = match t.model_format {
        ModelFormat::Off => "off",
        ModelFormat::Stl => "stl",
        ModelFormat::Step => "step",
        ModelFormat::Csg => "csg",
    };
    let _ = writeln!(s, "<template>");
    let _ = writeln!(s, "  <system name=\"{}\">", escape(&t.system_name));
    let _ =
        writeln!(s, "    <tolerance absolute=\"{:e}\" angular=\"{:e}\"/>", t.absolute_tolerance, t.angular_tolerance);
    let _ = writeln!(
        s,
        "    <precision read=\"{:e}\" write=\"{:e}\" pmq=\"{:e}\"/>",
        t.read_precision, t.write_precision, t.pmq_accuracy
    );
    let _ = writeln!(s, "    <queries>{}</queries>", queries.join(","));
    if !t.api_options.is_empty() {
        let _ = writeln!(s, "    <api>{}</api>", escape(&t.api_options.join(",")));
    }
    if !t.scripting_languages.is_empty() {
        let _ = writeln!(s, "    <scripting>{}</scripting>", escape(&t.scripting_languages.join(",")));
    }
    let _ = writeln!(s, "    <units>{}</units>", t.units);
    let _ = writeln!(s, "  </system>");
    let _ = writeln!(s, "  <model path=\"{}\" format=\"{format}\">", escape(&t.model_path.to_string_lossy()));
    let _ = writeln!(s, "    <topology class=\"{}\"/>", escape(&t.topological_class));
    let _ = writeln!(s, "    <min-feature-size>{:e}</min-feature-size>", t.min_feature_size);
    let _ = writeln!(s, "  </model>");
    let _ = writeln!(s, "</template>");
    s.into_bytes()
}

/// Admissible ball radii: `lower < chosen < upper`, all in mm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallRadiusInterval {
    pub lower: f64,
    pub upper: f64,
    pub chosen: f64,
}

/// Lower bound is the worst system noise (tolerance plus algorithm
/// precision), upper bound the smallest model feature. The radius is the
/// geometric mean of the two.
pub fn compute_ball_radius(t1: &TemplateFile, t2: &TemplateFile) -> Result<BallRadiusInterval> {
    let lower = [t1, t2]
        .iter()
        .map(|t| t.absolute_tolerance_mm() + t.algorithm_precision_mm())
        .fold(f64::NEG_INFINITY, f64::max);
    let upper = t1.min_feature_size_mm().min(t2.min_feature_size_mm());
    ball_radius_between(lower, upper)
}

pub fn ball_radius_between(lower: f64, upper: f64) -> Result<BallRadiusInterval> {
    let empty = || Error::EmptyInterval { lower, upper };
    if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
        return Err(empty());
    }
    let strictly_inside = |e: f64| e > lower && e < upper;
    let geometric = (lower * upper).sqrt();
    let chosen = if strictly_inside(geometric) {
        geometric
    } else {
        let mid = lower + (upper - lower) / 2.0;
        if strictly_inside(mid) {
            mid
        } else {
            return Err(empty());
        }
    };
    Ok(BallRadiusInterval { lower, upper, chosen })
}
