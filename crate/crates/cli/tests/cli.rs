use std::path::{Path, PathBuf};

use dtest::{run, EXIT_COMPATIBLE, EXIT_ERROR, EXIT_INCOMPATIBLE};
use dtest_core::fileio::{read_model, write_off, ModelPayload, Precision};
use dtest_core::model::shapes;
use dtest_core::Vec3;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn dtest(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("dtest").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Output { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn template(system: &str, model: &str, tolerance: &str, write: &str, feature: &str) -> String {
    format!(
        r#"<template>
  <system name="{system}">
    <tolerance absolute="{tolerance}" angular="1e-2"/>
    <precision read="1e-6" write="{write}" pmq="1e-3"/>
    <queries>PMQ,distance</queries>
    <units>mm</units>
  </system>
  <model path="{model}" format="off">
    <topology class="solid"/>
    <min-feature-size>{feature}</min-feature-size>
  </model>
</template>"#
    )
}

/// A sphere mesh and two templates whose derived ball radius is about 0.1.
fn fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let ball = shapes::uv_sphere(Vec3::new(0.01234567, 0.0, 0.0), 1.5, 10, 14);
    std::fs::write(dir.join("ball.off"), write_off(&ball, Precision::Digits(8))).unwrap();
    let a = dir.join("A.xml");
    let b = dir.join("B.xml");
    std::fs::write(&a, template("Alpha", "ball.off", "1e-2", "1e-3", "1.0")).unwrap();
    std::fs::write(&b, template("Beta", "ball.off", "1e-2", "1e-3", "1.0")).unwrap();
    (a, b)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn same_model_is_compatible_with_derived_radius() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = fixture(dir.path());
    let o = dtest(&[s(&a), s(&b), "volume", "1e-9"]);
    assert_eq!(o.code, EXIT_COMPATIBLE, "{}{}", o.stdout, o.stderr);
    assert!(o.stdout.starts_with("Running DTest on (ball) A.xml and (ball) B.xml"), "{}", o.stdout);
    assert!(o.stdout.contains("Systems Alpha and Beta have compatible volumes with a difference of 0.00000000"));
    assert!(o.stdout.contains("can interoperate in carrying out a task"));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = fixture(dir.path());
    let args = [s(&a), s(&b), "volume,surface-area,convexity", "1e-3", "--rays", "300", "--pairs", "300"];
    let first = dtest(&args);
    let second = dtest(&args);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(first.code, second.code);
}

#[test]
fn empty_interval_exits_two_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let (a, _) = fixture(dir.path());
    let c = dir.path().join("C.xml");
    std::fs::write(&c, template("Gamma", "ball.off", "1e-5", "1e-6", "1e-5")).unwrap();
    let o = dtest(&[s(&a), s(&c), "volume", "1e-3"]);
    assert_eq!(o.code, EXIT_ERROR);
    assert_eq!(o.stderr.lines().count(), 1, "{}", o.stderr);
    assert!(o.stderr.contains("ball radius interval is empty"), "{}", o.stderr);
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = fixture(dir.path());
    assert_eq!(dtest(&[s(&a), s(&b), "weight", "1e-3"]).code, EXIT_ERROR);
    assert_eq!(dtest(&[s(&a), s(&b), "volume", "-1"]).code, EXIT_ERROR);
    assert_eq!(dtest(&[s(&a), s(&b), "volume", "0"]).code, EXIT_ERROR);
    assert_eq!(dtest(&[s(&a)]).code, EXIT_ERROR);
    let missing = dtest(&[s(&a), "/nonexistent.xml", "volume", "1e-3"]);
    assert_eq!(missing.code, EXIT_ERROR);
    assert!(missing.stderr.starts_with("dtest: error:"));
    assert_eq!(dtest(&["--help"]).code, EXIT_COMPATIBLE);
}

#[test]
fn categorical_test_accepts_zero_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = fixture(dir.path());
    let o = dtest(&[s(&a), s(&b), "euler-characteristic,components", "0"]);
    assert_eq!(o.code, EXIT_COMPATIBLE, "{}", o.stderr);
    assert!(o.stdout.contains("Euler characteristic of first proxy model: 1"));
}

#[test]
fn sidecar_and_proxy_dump() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = fixture(dir.path());
    let side = dir.path().join("out.txt");
    let cloud = dir.path().join("cloud.off");
    let o = dtest(&[s(&a), s(&b), "volume", "1e-3", "--sidecar", s(&side), "--dump-proxy", s(&cloud)]);
    assert_eq!(o.code, EXIT_COMPATIBLE, "{}", o.stderr);
    let text = std::fs::read_to_string(&side).unwrap();
    assert!(text.contains("property=volume\n"), "{text}");
    assert!(text.contains("verdict=compatible\n"), "{text}");
    let first = std::fs::read_to_string(&cloud).unwrap();
    let second = std::fs::read_to_string(dir.path().join("cloud-2.off")).unwrap();
    assert!(first.starts_with("OFF\n"));
    assert_eq!(first, second);
}

#[test]
fn translation_validation() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = fixture(dir.path());
    let fine = dtest(&[s(&a), s(&b), "volume", "1e-2", "--translated", "--translate-format", "step"]);
    assert_eq!(fine.code, EXIT_COMPATIBLE, "{}{}", fine.stdout, fine.stderr);
    assert!(fine.stdout.contains("(translated version of ball) B.xml"), "{}", fine.stdout);

    let coarse = dtest(&[s(&a), s(&b), "hausdorff-distance", "1e-3", "--translated", "--digits", "1"]);
    assert_eq!(coarse.code, EXIT_INCOMPATIBLE, "{}{}", coarse.stdout, coarse.stderr);
    assert!(coarse.stdout.contains("have an incompatible Hausdorff Distance of"));

    let itself = dtest(&[s(&a), s(&a), "hausdorff-distance", "1e-9", "--translated"]);
    assert_eq!(itself.code, EXIT_COMPATIBLE, "{}{}", itself.stdout, itself.stderr);
}

fn profile(dir: &Path, name: &str, quantum: &str, weld: &str) -> PathBuf {
    let p = dir.join(format!("{name}.xml"));
    let text = format!(
        "<profile name=\"{name}\" unit=\"mm\"><write-quantum>{quantum}</write-quantum><weld-tolerance>{weld}</weld-tolerance></profile>"
    );
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn roundrobin_single_profile() {
    let dir = tempfile::tempdir().unwrap();
    let cube = shapes::cuboid(Vec3::splat(0.123456), Vec3::splat(2.0));
    let model = dir.path().join("cube.off");
    std::fs::write(&model, write_off(&cube, Precision::Shortest)).unwrap();
    let sys_a = profile(dir.path(), "sysA", "1e-4", "1e-6");
    let trace = dir.path().join("trace.csv");
    let o = dtest(&[
        "roundrobin",
        s(&model),
        "--rounds",
        "5",
        "--profile",
        s(&sys_a),
        "--properties",
        "volume,surface-area,centroid",
        "--rays",
        "500",
        "--out",
        s(&trace),
    ]);
    assert_eq!(o.code, EXIT_COMPATIBLE, "{}", o.stderr);
    let last = o.stdout.lines().last().unwrap();
    assert!(last.starts_with("Stabilized in"), "{}", o.stdout);
    for cell in last.trim_start_matches("Stabilized in").split_whitespace().collect::<Vec<_>>().chunks(2) {
        assert!(cell == ["Round", "1"] || cell == ["Round", "2"], "{last}");
    }
    let csv = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(csv.lines().next(), Some("round,property,value,digest"));
    assert_eq!(csv.lines().count(), 1 + 6 * 3);
}

#[test]
fn roundrobin_alternates_and_rejects_zero_rounds() {
    let dir = tempfile::tempdir().unwrap();
    let cube = shapes::cuboid(Vec3::splat(0.123456), Vec3::splat(2.0));
    let model = dir.path().join("cube.off");
    std::fs::write(&model, write_off(&cube, Precision::Shortest)).unwrap();
    let sys_a = profile(dir.path(), "sysA", "1e-4", "1e-6");
    let sys_b = profile(dir.path(), "sysB", "3e-4", "1e-6");
    let trace = dir.path().join("t.csv");
    let args = |rounds: &'static str| {
        vec![
            "roundrobin".to_string(),
            s(&model).to_string(),
            "--rounds".into(),
            rounds.into(),
            "--profile".into(),
            s(&sys_a).to_string(),
            "--profile".into(),
            s(&sys_b).to_string(),
            "--properties".into(),
            "hausdorff-distance".into(),
            "--out".into(),
            s(&trace).to_string(),
        ]
    };
    let o = dtest(&args("3").iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(o.code, EXIT_COMPATIBLE, "{}", o.stderr);
    assert!(o.stdout.starts_with("Round-robin of cube.off through sysA, sysB"), "{}", o.stdout);
    let zero = dtest(&args("0").iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(zero.code, EXIT_ERROR);
    assert!(zero.stderr.contains("--rounds"), "{}", zero.stderr);
}

#[test]
fn convert_round_trips_through_step() {
    let dir = tempfile::tempdir().unwrap();
    let ball = shapes::uv_sphere(Vec3::ZERO, 1.0, 6, 8);
    let off = dir.path().join("ball.off");
    std::fs::write(&off, write_off(&ball, Precision::Shortest)).unwrap();
    let step = dir.path().join("ball.stp");
    let o = dtest(&["convert", s(&off), s(&step)]);
    assert_eq!(o.code, EXIT_COMPATIBLE, "{}", o.stderr);
    match read_model(&step).unwrap().payload {
        ModelPayload::Mesh(m) => assert_eq!(m, ball.with_provenance(m.provenance())),
        ModelPayload::Csg(_) => panic!("expected a mesh"),
    }
    let bad = dtest(&["convert", s(&off), s(&dir.path().join("ball.json"))]);
    assert_eq!(bad.code, EXIT_ERROR);
}
