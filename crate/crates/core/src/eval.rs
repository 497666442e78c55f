//! Comparison of property values under a user tolerance and the
//! interoperability report.

use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::props::{PropertyKind, PropertyValue, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Compatible,
    Incompatible,
}

impl Verdict {
    fn word(self) -> &'static str {
        match self {
            Verdict::Compatible => "compatible",
            Verdict::Incompatible => "incompatible",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.word())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Difference {
    /// Absolute difference, or the Euclidean norm for vectors.
    Numeric(f64),
    /// Categorical kinds only record whether the values agree.
    Equal(bool),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonResult {
    pub kind: PropertyKind,
    pub value1: PropertyValue,
    /// `None` for joint properties such as the Hausdorff distance.
    pub value2: Option<PropertyValue>,
    pub difference: Difference,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub combined_error: f64,
    /// The proxies are too coarse for the tolerance to be meaningful.
    pub warning: bool,
}

fn check_tolerance(tolerance: f64) -> Result<()> {
    if tolerance >= 0.0 && tolerance.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidQuery(format!("tolerance {tolerance}")))
    }
}

fn numeric(kind: PropertyKind, a: &Value, b: &Value) -> Option<f64> {
    match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => Some((x - y).abs()),
        (Value::Vector(x), Value::Vector(y)) => Some((*x - *y).norm()),
        (Value::Integer(x), Value::Integer(y)) if !kind.is_categorical() => Some((x - y).abs() as f64),
        _ => None,
    }
}

fn same_category(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Convexity { convex: x, .. }, Value::Convexity { convex: y, .. }) => x == y,
        _ => a == b,
    }
}

pub fn compare(p1: &PropertyValue, p2: &PropertyValue, tolerance: f64) -> Result<ComparisonResult> {
    if p1.kind != p2.kind {
        return Err(Error::KindMismatch { left: p1.kind.to_string(), right: p2.kind.to_string() });
    }
    check_tolerance(tolerance)?;
    let kind = p1.kind;
    let combined_error = p1.error_estimate + p2.error_estimate;
    let (difference, verdict) = if kind.is_categorical() {
        let eq = same_category(&p1.value, &p2.value);
        (Difference::Equal(eq), if eq { Verdict::Compatible } else { Verdict::Incompatible })
    } else {
        let d = numeric(kind, &p1.value, &p2.value).ok_or_else(|| Error::KindMismatch {
            left: format!("{kind} value {}", p1.value),
            right: format!("{kind} value {}", p2.value),
        })?;
        (Difference::Numeric(d), if d <= tolerance { Verdict::Compatible } else { Verdict::Incompatible })
    };
    Ok(ComparisonResult {
        kind,
        value1: p1.clone(),
        value2: Some(p2.clone()),
        difference,
        tolerance,
        verdict,
        combined_error,
        warning: !kind.is_categorical() && tolerance < combined_error,
    })
}

/// Verdict for a property that already measures the disagreement between
/// the two models (the Hausdorff distance).
pub fn compare_joint(p: &PropertyValue, tolerance: f64) -> Result<ComparisonResult> {
    check_tolerance(tolerance)?;
    let d = p
        .as_scalar()
        .ok_or_else(|| Error::KindMismatch { left: p.kind.to_string(), right: "joint scalar property".into() })?;
    Ok(ComparisonResult {
        kind: p.kind,
        value1: p.clone(),
        value2: None,
        difference: Difference::Numeric(d),
        tolerance,
        verdict: if d <= tolerance { Verdict::Compatible } else { Verdict::Incompatible },
        combined_error: p.error_estimate,
        warning: tolerance < p.error_estimate,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteropReport {
    pub system1: String,
    pub system2: String,
    pub model1: String,
    pub model2: String,
    /// Labels for the inputs, usually the template file names.
    pub source1: String,
    pub source2: String,
    pub tolerance: f64,
    pub ball_radius: f64,
    /// Topological classes declared by the two templates.
    pub topological_class: Option<(String, String)>,
    /// Model 2 is a translation of model 1 rather than an independent model.
    pub translated: bool,
    pub results: Vec<ComparisonResult>,
}

impl InteropReport {
    pub fn verdict(&self) -> Verdict {
        if self.results.iter().all(|r| r.verdict == Verdict::Compatible) {
            Verdict::Compatible
        } else {
            Verdict::Incompatible
        }
    }

    pub fn warning(&self) -> bool {
        self.results.iter().any(|r| r.warning)
    }

    fn second_model(&self) -> String {
        if self.translated {
            format!("translated version of {}", self.model1)
        } else {
            self.model2.clone()
        }
    }
}

/// Section title, plural noun for the comparison sentence, and the label of
/// the per-model value lines.
fn wording(kind: PropertyKind) -> (&'static str, &'static str, &'static str) {
    match kind {
        PropertyKind::Volume => ("Volume", "volumes", "Volume"),
        PropertyKind::SurfaceArea => ("Surface Area", "areas", "Surface area"),
        PropertyKind::Centroid => ("Centroid", "centroids", "Centroid"),
        PropertyKind::Hausdorff => ("Hausdorff Distance", "Hausdorff Distance", "Hausdorff Distance"),
        PropertyKind::Convexity => ("Convexity", "convexity", "Convexity"),
        PropertyKind::EulerCharacteristic => ("Euler Characteristic", "Euler characteristics", "Euler characteristic"),
        PropertyKind::Components => ("Connected Components", "component counts", "Components"),
        PropertyKind::Manifoldness => ("Manifoldness", "manifoldness", "Manifoldness"),
    }
}

pub fn render_report(r: &InteropReport) -> Result<String> {
    if r.results.is_empty() {
        return Err(Error::NoProperties);
    }
    let (a, b) = (&r.system1, &r.system2);
    let m2 = r.second_model();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Running DTest on ({}) {} and ({}) {} Property \u{3b5}={} (ball radius {})",
        r.model1, r.source1, m2, r.source2, r.tolerance, r.ball_radius
    );
    if let Some((c1, c2)) = &r.topological_class {
        let _ = writeln!(out, "Declared topological class: {c1} / {c2}");
    }
    for c in &r.results {
        let (title, noun, label) = wording(c.kind);
        let _ = writeln!(out, "{title}:");
        match (&c.value2, c.difference) {
            (None, Difference::Numeric(d)) => {
                let article = if c.verdict == Verdict::Compatible { "a" } else { "an" };
                let _ = writeln!(out, "Systems {a} and {b} have {article} {} {noun} of {d:.8}", c.verdict);
            }
            (Some(v2), Difference::Numeric(d)) => {
                let _ = writeln!(out, "Systems {a} and {b} have {} {noun} with a difference of {d:.8}", c.verdict);
                let _ = writeln!(
                    out,
                    "{label} of first proxy model: {}, {label} of second proxy model: {}",
                    c.value1.value, v2.value
                );
            }
            (v2, Difference::Equal(_)) => {
                let _ = writeln!(out, "Systems {a} and {b} have {} {noun}", c.verdict);
                if let Some(v2) = v2 {
                    let _ = writeln!(
                        out,
                        "{label} of first proxy model: {}, {label} of second proxy model: {}",
                        c.value1.value, v2.value
                    );
                }
            }
        }
        if c.warning {
            let _ = writeln!(
                out,
                "Warning: combined proxy error {:.8} exceeds the tolerance {}; the verdict is not reliable at this ball radius",
                c.combined_error, c.tolerance
            );
        }
    }
    let can = match r.verdict() {
        Verdict::Compatible => "can",
        Verdict::Incompatible => "cannot",
    };
    let m1 = &r.model1;
    let _ = writeln!(out, "Report:");
    let _ = writeln!(
        out,
        "{a} and {b} that provide the respective models, {m1} and {m2}, {can} interoperate in carrying out a task that allows using {m1} and {m2} interchangeably with the given accuracy \u{3b5}={} for the specified property.",
        r.tolerance
    );
    Ok(out)
}

/// One block of `key=value` lines per comparison, in a fixed key order,
/// separated by blank lines. Values use the round-trip representation.
pub fn render_sidecar(r: &InteropReport) -> String {
    let mut out = String::new();
    let _ =
        writeln!(out, "system1={}\nsystem2={}\nmodel1={}\nmodel2={}", r.system1, r.system2, r.model1, r.second_model());
    let _ = writeln!(out, "tolerance={:?}\nball_radius={:?}\nverdict={}", r.tolerance, r.ball_radius, r.verdict());
    for c in &r.results {
        out.push('\n');
        let _ = writeln!(out, "property={}", c.kind);
        let _ = writeln!(out, "value1={}", c.value1.value.full_repr());
        let _ = writeln!(out, "value2={}", c.value2.as_ref().map(|v| v.value.full_repr()).unwrap_or_default());
        match c.difference {
            Difference::Numeric(d) => {
                let _ = writeln!(out, "difference={d:?}");
            }
            Difference::Equal(eq) => {
                let _ = writeln!(out, "equal={eq}");
            }
        }
        let _ = writeln!(out, "tolerance={:?}", c.tolerance);
        let _ = writeln!(out, "verdict={}", c.verdict);
        let _ = writeln!(out, "combined_error={:?}", c.combined_error);
        let _ = writeln!(out, "warning={}", c.warning);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;
    use crate::props::ManifoldnessReport;
    use proptest::prelude::*;

    fn scalar(kind: PropertyKind, v: f64, err: f64) -> PropertyValue {
        PropertyValue::new(kind, Value::Scalar(v), err)
    }

    fn int(kind: PropertyKind, v: i64) -> PropertyValue {
        PropertyValue::new(kind, Value::Integer(v), 0.0)
    }

    fn coil_report(results: Vec<ComparisonResult>) -> InteropReport {
        InteropReport {
            system1: "Rhino".into(),
            system2: "OpenCASCADE".into(),
            model1: "Rcoil".into(),
            model2: "Ocoil".into(),
            source1: "Rcoil.xml".into(),
            source2: "Ocoil.xml".into(),
            tolerance: 1e-4,
            ball_radius: 1e-3,
            topological_class: None,
            translated: false,
            results,
        }
    }

    #[test]
    fn coil_volumes() {
        let c = compare(
            &scalar(PropertyKind::Volume, 476.73668518, 0.0),
            &scalar(PropertyKind::Volume, 487.79770932, 0.0),
            1e-4,
        )
        .unwrap();
        assert_eq!(c.verdict, Verdict::Incompatible);
        match c.difference {
            Difference::Numeric(d) => assert_eq!(format!("{d:.8}"), "11.06102414"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn identical_values_are_compatible() {
        let v = scalar(PropertyKind::SurfaceArea, 5720.84022219, 0.5);
        let c = compare(&v, &v, 0.0).unwrap();
        assert_eq!(c.verdict, Verdict::Compatible);
        assert_eq!(c.difference, Difference::Numeric(0.0));
        assert!(c.warning);
    }

    #[test]
    fn integers_need_equality() {
        let c = compare(&int(PropertyKind::EulerCharacteristic, 2), &int(PropertyKind::EulerCharacteristic, 0), 5.0)
            .unwrap();
        assert_eq!(c.verdict, Verdict::Incompatible);
        assert_eq!(c.difference, Difference::Equal(false));
        assert!(!c.warning);
    }

    #[test]
    fn convexity_compares_verdicts_not_witnesses() {
        let w = crate::props::ConvexityWitness { a: Vec3::X, b: -Vec3::X, midpoint: Vec3::ZERO };
        let a = PropertyValue::new(PropertyKind::Convexity, Value::Convexity { convex: false, witness: Some(w) }, 0.0);
        let b = PropertyValue::new(PropertyKind::Convexity, Value::Convexity { convex: false, witness: None }, 0.0);
        assert_eq!(compare(&a, &b, 0.0).unwrap().verdict, Verdict::Compatible);
    }

    #[test]
    fn centroid_uses_euclidean_norm() {
        let a = PropertyValue::new(PropertyKind::Centroid, Value::Vector(Vec3::ZERO), 0.0);
        let b = PropertyValue::new(PropertyKind::Centroid, Value::Vector(Vec3::new(3.0, 4.0, 0.0)), 0.0);
        assert_eq!(compare(&a, &b, 5.0).unwrap().difference, Difference::Numeric(5.0));
        assert_eq!(compare(&a, &b, 5.0).unwrap().verdict, Verdict::Compatible);
    }

    #[test]
    fn mismatched_kinds() {
        assert!(matches!(
            compare(&scalar(PropertyKind::Volume, 1.0, 0.0), &scalar(PropertyKind::SurfaceArea, 1.0, 0.0), 1.0),
            Err(Error::KindMismatch { .. })
        ));
        assert!(matches!(
            compare(&scalar(PropertyKind::Volume, 1.0, 0.0), &scalar(PropertyKind::Volume, 1.0, 0.0), -1.0),
            Err(Error::InvalidQuery(_))
        ));
    }

    const OUTPUT_1: &str = "Running DTest on (Rcoil) Rcoil.xml and (Ocoil) Ocoil.xml Property \u{3b5}=0.0001 (ball radius 0.001)
Volume:
Systems Rhino and OpenCASCADE have incompatible volumes with a difference of 11.06102414
Volume of first proxy model: 476.73668518, Volume of second proxy model: 487.79770932
Surface Area:
Systems Rhino and OpenCASCADE have incompatible areas with a difference of 132.73228961
Surface area of first proxy model: 5720.84022219, Surface area of second proxy model: 5853.57251180
Hausdorff Distance:
Systems Rhino and OpenCASCADE have an incompatible Hausdorff Distance of 1.18016199
Report:
Rhino and OpenCASCADE that provide the respective models, Rcoil and Ocoil, cannot interoperate in carrying out a task that allows using Rcoil and Ocoil interchangeably with the given accuracy \u{3b5}=0.0001 for the specified property.
";

    fn coil_results() -> Vec<ComparisonResult> {
        vec![
            compare(
                &scalar(PropertyKind::Volume, 476.73668518, 0.0),
                &scalar(PropertyKind::Volume, 487.79770932, 0.0),
                1e-4,
            )
            .unwrap(),
            compare(
                &scalar(PropertyKind::SurfaceArea, 5720.84022219, 0.0),
                &scalar(PropertyKind::SurfaceArea, 5853.57251180, 0.0),
                1e-4,
            )
            .unwrap(),
            compare_joint(&scalar(PropertyKind::Hausdorff, 1.18016199, 0.0), 1e-4).unwrap(),
        ]
    }

    #[test]
    fn golden_output() {
        let r = coil_report(coil_results());
        let text = render_report(&r).unwrap();
        assert_eq!(text, OUTPUT_1);
        assert_eq!(render_report(&r).unwrap(), text);
    }

    #[test]
    fn compatible_report_says_can() {
        let v = scalar(PropertyKind::Volume, 1.0, 0.0);
        let mut r = coil_report(vec![compare(&v, &v, 1e-4).unwrap()]);
        r.translated = true;
        let text = render_report(&r).unwrap();
        assert!(text.contains("have compatible volumes with a difference of 0.00000000"));
        assert!(text.contains(", can interoperate in carrying out a task"));
        assert!(text.contains("Rcoil and translated version of Rcoil"));
    }

    #[test]
    fn categorical_lines_and_warning() {
        let m = |n| {
            PropertyValue::new(
                PropertyKind::Manifoldness,
                Value::Manifold(ManifoldnessReport { naked_edges: n, ..Default::default() }),
                0.0,
            )
        };
        let mut r = coil_report(vec![
            compare(&m(0), &m(3), 1.0).unwrap(),
            compare(&scalar(PropertyKind::Volume, 1.0, 0.3), &scalar(PropertyKind::Volume, 1.0, 0.3), 0.1).unwrap(),
        ]);
        r.topological_class = Some(("solid".into(), "solid".into()));
        let text = render_report(&r).unwrap();
        assert!(text.contains("Systems Rhino and OpenCASCADE have incompatible manifoldness\n"));
        assert!(text.contains("naked edges: 3"));
        assert!(text.contains("Warning: combined proxy error 0.60000000 exceeds the tolerance 0.1"));
        assert!(text.contains("Declared topological class: solid / solid"));
    }

    #[test]
    fn empty_report() {
        assert!(matches!(render_report(&coil_report(vec![])), Err(Error::NoProperties)));
    }

    #[test]
    fn sidecar_is_stable() {
        let r = coil_report(coil_results());
        let s = render_sidecar(&r);
        assert_eq!(s, render_sidecar(&r));
        let first = s.split("\n\n").nth(1).unwrap();
        let keys: Vec<&str> = first.lines().map(|l| l.split('=').next().unwrap()).collect();
        assert_eq!(
            keys,
            ["property", "value1", "value2", "difference", "tolerance", "verdict", "combined_error", "warning"]
        );
        assert!(first.contains("value1=476.73668518\n"));
    }

    fn exhaustive_values() -> Vec<f64> {
        vec![-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0]
    }

    #[test]
    fn verdict_rule_on_small_cases() {
        for &x in &exhaustive_values() {
            for &y in &exhaustive_values() {
                for &t in &[0.0, 0.5, 1.0, 1.5, 4.0] {
                    let c = compare(&scalar(PropertyKind::Volume, x, 0.0), &scalar(PropertyKind::Volume, y, 0.0), t)
                        .unwrap();
                    assert_eq!(c.verdict == Verdict::Compatible, (x - y).abs() <= t, "{x} {y} {t}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn verdict_is_symmetric_and_monotone(x in -1e6..1e6f64, y in -1e6..1e6f64, t in 0.0..1e6f64, more in 0.0..1e6f64,
                                             e1 in 0.0..10.0f64, e2 in 0.0..10.0f64) {
            let a = scalar(PropertyKind::SurfaceArea, x, e1);
            let b = scalar(PropertyKind::SurfaceArea, y, e2);
            let ab = compare(&a, &b, t).unwrap();
            let ba = compare(&b, &a, t).unwrap();
            prop_assert_eq!(ab.verdict, ba.verdict);
            prop_assert_eq!(ab.difference, ba.difference);
            prop_assert_eq!(ab.verdict == Verdict::Compatible, (x - y).abs() <= t);
            if ab.verdict == Verdict::Compatible {
                prop_assert_eq!(compare(&a, &b, t + more).unwrap().verdict, Verdict::Compatible);
            }
        }

        #[test]
        fn integer_verdict_ignores_tolerance(x in -3i64..3, y in -3i64..3, t in 0.0..100.0f64) {
            let c = compare(&int(PropertyKind::Components, x), &int(PropertyKind::Components, y), t).unwrap();
            prop_assert_eq!(c.verdict == Verdict::Compatible, x == y);
        }
    }
}
