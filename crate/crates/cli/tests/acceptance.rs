//! Acceptance run. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use dtest::{run, EXIT_COMPATIBLE, EXIT_INCOMPATIBLE};
use dtest_core::error::Error;
use dtest_core::eval::{compare, compare_joint, render_report, Difference, InteropReport, Verdict};
use dtest_core::fileio::{extract_mesh, parse_part21, write_off, Precision};
use dtest_core::model::{shapes, AnalyticPrimitive, CsgNode, QueryableModel, TriangleMesh};
use dtest_core::props::{
    connected_components, euler_characteristic, euler_characteristic_mesh, hausdorff, manifoldness, surface_area,
    volume, PropertyKind, PropertyValue, Value,
};
use dtest_core::proxy::{build_interior_grid, build_point_cloud};
use dtest_core::roundrobin::{render_summary, run_rounds, RoundSettings, Stabilization, SystemProfile};
use dtest_core::session::Estimator;
use dtest_core::template::{compute_ball_radius, parse_template};
use dtest_core::units::LengthUnit;
use dtest_core::Vec3;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        match $cond {
            true => {}
            false => return Err(format!($($msg)+)),
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: std::result::Result<T, E>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn csg(p: AnalyticPrimitive) -> QueryableModel {
    QueryableModel::from_csg(CsgNode::from(p)).unwrap()
}

fn unit_sphere() -> QueryableModel {
    csg(AnalyticPrimitive::sphere(Vec3::ZERO, 1.0).unwrap())
}

fn unit_cube() -> QueryableModel {
    csg(AnalyticPrimitive::cuboid(Vec3::ZERO, Vec3::splat(1.0)).unwrap())
}

fn analytic_volume() -> Outcome {
    let pool = ok(rayon::ThreadPoolBuilder::new().num_threads(1).build())?;
    let start = Instant::now();
    let v = pool.install(|| build_interior_grid(&unit_sphere(), 0.02, 0.0).map(|g| volume(&g)));
    let elapsed = start.elapsed();
    let v = ok(v)?.as_scalar().unwrap();
    let exact = 4.0 * PI / 3.0;
    let err = (v - exact).abs();
    ensure!(err <= 0.26, "volume {v:.6} is {err:.4} from {exact:.6}");
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?} on one thread");
    Ok(format!("volume {v:.6}, |error| {err:.4} <= 0.26, {:.2}s on one thread", elapsed.as_secs_f64()))
}

fn crofton_area() -> Outcome {
    let mut lines = Vec::new();
    for (name, model, exact) in [("sphere", unit_sphere(), 4.0 * PI), ("cube", unit_cube(), 6.0)] {
        let a = ok(surface_area(&model, 0.02, 0.0, 100_000, 0))?;
        let v = a.as_scalar().unwrap();
        let se = a.error_estimate;
        ensure!(se > 0.0, "{name}: no standard error reported");
        ensure!((v - exact).abs() <= 3.0 * se, "{name}: {v:.5} vs {exact:.5}, 3 SE = {:.5}", 3.0 * se);
        lines.push(format!("{name} {v:.4} ({:.2} SE)", (v - exact).abs() / se));
    }
    Ok(lines.join(", "))
}

fn hausdorff_translate() -> Outcome {
    let pmq = 0.01;
    let a = ok(build_point_cloud(&unit_cube(), 0.05, pmq))?;
    let b = a.translated(Vec3::new(0.5, 0.0, 0.0));
    let d = ok(hausdorff(&a, &b))?.as_scalar().unwrap();
    let back = ok(hausdorff(&b, &a))?.as_scalar().unwrap();
    let zero = ok(hausdorff(&a, &a.clone()))?.as_scalar().unwrap();
    let band = 2.0 * a.spacing + 2.0 * pmq;
    ensure!((d - 0.5).abs() <= band, "distance {d} outside 0.5 +- {band}");
    ensure!(d.to_bits() == back.to_bits(), "asymmetric: {d} vs {back}");
    ensure!(zero == 0.0, "identical clouds at distance {zero}");
    Ok(format!("d = {d:.6} within 0.5 +- {band:.4}, symmetric, identical = 0"))
}

fn topology() -> Outcome {
    let chi = |m: &TriangleMesh| ok(euler_characteristic_mesh(m)).map(|p| p.as_integer().unwrap());
    let oct = chi(&shapes::octahedron(1.0))?;
    let torus = chi(&shapes::torus(2.0, 0.5, 24, 12))?;
    let box_grid = ok(build_interior_grid(&unit_cube(), 0.1, 0.0))?;
    let box_chi = ok(euler_characteristic(&box_grid))?.as_integer().unwrap();
    let pair = CsgNode::from(AnalyticPrimitive::sphere(Vec3::ZERO, 1.0).unwrap())
        .union(AnalyticPrimitive::sphere(Vec3::new(3.0, 0.0, 0.0), 1.0).unwrap());
    let pair_grid = ok(build_interior_grid(&QueryableModel::from_csg(pair).unwrap(), 0.1, 0.0))?;
    let comps = connected_components(&pair_grid).as_integer().unwrap();
    ensure!(
        (oct, torus, box_chi, comps) == (2, 0, 1, 2),
        "octahedron {oct}, torus {torus}, box {box_chi}, components {comps}"
    );
    Ok("octahedron 2, torus 0, voxel box 1, two spheres 2 components".into())
}

fn naked_edges() -> Outcome {
    let oct = shapes::octahedron(1.0);
    let open = ok(TriangleMesh::new(oct.vertices().to_vec(), oct.triangles()[1..].to_vec(), None))?;
    let report = match manifoldness(&open).value {
        Value::Manifold(r) => r,
        other => return Err(format!("unexpected value {other:?}")),
    };
    ensure!(report.naked_edges == 3, "{} naked edges", report.naked_edges);
    let text = report.to_string();
    ensure!(text.contains("naked edges: 3"), "display `{text}`");
    ensure!(text.contains("non-manifold edges: 0") && text.contains("non-manifold vertices: 0"), "display `{text}`");
    Ok(format!("`{text}`"))
}

fn scalar(kind: PropertyKind, v: f64) -> PropertyValue {
    PropertyValue::new(kind, Value::Scalar(v), 0.0)
}

fn verdict_of(a: f64, b: f64, t: f64) -> std::result::Result<(Verdict, f64), String> {
    let c = ok(compare(&scalar(PropertyKind::Volume, a), &scalar(PropertyKind::Volume, b), t))?;
    match c.difference {
        Difference::Numeric(d) => Ok((c.verdict, d)),
        other => Err(format!("{other:?}")),
    }
}

fn verdict_rule() -> Outcome {
    let grid: Vec<f64> = (-8..=8).map(|i| i as f64 * 0.25).collect();
    let tolerances = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0];
    let mut cases = 0;
    for &a in &grid {
        for &b in &grid {
            for (i, &t) in tolerances.iter().enumerate() {
                let (v, d) = verdict_of(a, b, t)?;
                let expected = if (a - b).abs() <= t { Verdict::Compatible } else { Verdict::Incompatible };
                ensure!(v == expected, "({a}, {b}, {t}) gave {v}");
                ensure!(verdict_of(b, a, t)? == (v, d), "({a}, {b}, {t}) is not symmetric");
                for &looser in &tolerances[i..] {
                    let (w, _) = verdict_of(a, b, looser)?;
                    ensure!(
                        v == Verdict::Incompatible || w == Verdict::Compatible,
                        "({a}, {b}) not monotone at {looser}"
                    );
                }
                cases += 1;
            }
        }
    }
    for (x, y, t) in [(Vec3::ZERO, Vec3::new(3.0, 4.0, 0.0), 5.0), (Vec3::ZERO, Vec3::new(3.0, 4.0, 0.0), 4.75)] {
        let c = ok(compare(
            &PropertyValue::new(PropertyKind::Centroid, Value::Vector(x), 0.0),
            &PropertyValue::new(PropertyKind::Centroid, Value::Vector(y), 0.0),
            t,
        ))?;
        ensure!((c.verdict == Verdict::Compatible) == (t >= 5.0), "centroid at tolerance {t}: {}", c.verdict);
        cases += 1;
    }

    let mut runner = TestRunner::new_with_rng(
        Config { cases: 10_000, failure_persistence: None, ..Config::default() },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let strategy = (-1e3f64..1e3, -1e3f64..1e3, 0.0f64..2e3, 0.0f64..1e3);
    let result = runner.run(&strategy, |(a, b, t, extra)| {
        let (v, d) = verdict_of(a, b, t).map_err(TestCaseError::fail)?;
        prop_assert_eq!(v == Verdict::Compatible, (a - b).abs() <= t);
        prop_assert_eq!(verdict_of(b, a, t).map_err(TestCaseError::fail)?, (v, d));
        let (w, _) = verdict_of(a, b, t + extra).map_err(TestCaseError::fail)?;
        prop_assert!(v == Verdict::Incompatible || w == Verdict::Compatible);
        Ok(())
    });
    ok(result)?;
    Ok(format!("{cases} exhaustive cases and 10000 random cases"))
}

const COIL_OUTPUT: &str = "Running DTest on (Rcoil) Rcoil.xml and (Ocoil) Ocoil.xml Property \u{3b5}=0.0001 (ball radius 0.001)
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

fn report_text() -> Outcome {
    let pair = |kind, a, b| ok(compare(&scalar(kind, a), &scalar(kind, b), 1e-4));
    let report = InteropReport {
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
        results: vec![
            pair(PropertyKind::Volume, 476.73668518, 487.79770932)?,
            pair(PropertyKind::SurfaceArea, 5720.84022219, 5853.57251180)?,
            ok(compare_joint(&scalar(PropertyKind::Hausdorff, 1.18016199), 1e-4))?,
        ],
    };
    let text = ok(render_report(&report))?;
    if text != COIL_OUTPUT {
        let first = text.lines().zip(COIL_OUTPUT.lines()).find(|(a, b)| a != b);
        return Err(format!("golden mismatch at {first:?}"));
    }
    ensure!(text.contains("have incompatible volumes with a difference of"), "volume phrase");
    ensure!(text.contains("cannot interoperate in carrying out a task"), "closing phrase");
    Ok("coil report matches byte for byte".into())
}

fn random_template(rng: &mut ChaCha8Rng) -> (String, f64, f64) {
    let units = [LengthUnit::Mm, LengthUnit::Cm, LengthUnit::M, LengthUnit::In];
    let unit = units[rng.random_range(0..units.len())];
    let log = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| 10f64.powf(rng.random_range(lo..hi));
    let tol = log(rng, -8.0, -1.0);
    let read = if rng.random_bool(0.1) { 0.0 } else { log(rng, -9.0, -1.0) };
    let write = log(rng, -9.0, -1.0);
    let feature = log(rng, -6.0, 1.0);
    let xml = format!(
        r#"<template><system name="S"><tolerance absolute="{tol:e}" angular="0"/><precision read="{read:e}" write="{write:e}" pmq="0"/><queries>PMQ</queries><units>{}</units></system><model path="m.off" format="off"><topology class="solid"/><min-feature-size>{feature:e}</min-feature-size></model></template>"#,
        unit.tag()
    );
    let to_mm = match unit {
        LengthUnit::Mm => 1.0,
        LengthUnit::Cm => 10.0,
        LengthUnit::M => 1000.0,
        LengthUnit::In => 25.4,
    };
    (xml, (tol + read.max(write)) * to_mm, feature * to_mm)
}

fn ball_radius() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (mut inside, mut empty) = (0, 0);
    for i in 0..10_000 {
        let (x1, lo1, up1) = random_template(&mut rng);
        let (x2, lo2, up2) = random_template(&mut rng);
        let t1 = ok(parse_template(x1.as_bytes()))?;
        let t2 = ok(parse_template(x2.as_bytes()))?;
        let (lower, upper) = (lo1.max(lo2), up1.min(up2));
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs();
        match compute_ball_radius(&t1, &t2) {
            Ok(r) => {
                ensure!(
                    close(r.lower, lower) && close(r.upper, upper),
                    "case {i}: interval {r:?} vs [{lower}, {upper}]"
                );
                ensure!(r.lower < r.chosen && r.chosen < r.upper, "case {i}: {r:?}");
                inside += 1;
            }
            Err(Error::EmptyInterval { lower: l, upper: u }) => {
                ensure!(l >= u, "case {i}: rejected a non-empty interval [{l}, {u}]");
                ensure!(close(l, lower) && close(u, upper), "case {i}: interval [{l}, {u}] vs [{lower}, {upper}]");
                empty += 1;
            }
            Err(e) => return Err(format!("case {i}: {e}")),
        }
    }
    ensure!(inside > 0 && empty > 0, "sample did not cover both outcomes: {inside}/{empty}");
    Ok(format!("{inside} strictly inside, {empty} rejected as empty"))
}

fn rr_settings() -> RoundSettings {
    RoundSettings {
        epsilon: 0.2,
        pmq_accuracy: 0.0,
        estimator: Estimator { n_rays: 500, n_pairs: 500, ..Estimator::default() },
    }
}

fn two_boxes() -> TriangleMesh {
    let off = Vec3::splat(1.234e-5);
    let a = shapes::cuboid(off, Vec3::splat(1.0) + off);
    let b = shapes::cuboid(Vec3::new(1.0003, 0.0, 0.0) + off, Vec3::new(2.0, 1.0, 1.0) + off);
    let n = a.vertices().len();
    let mut vs = a.vertices().to_vec();
    vs.extend_from_slice(b.vertices());
    let mut ts = a.triangles().to_vec();
    ts.extend(b.triangles().iter().map(|t| t.map(|i| i + n)));
    TriangleMesh::new(vs, ts, None).unwrap()
}

fn last_line(summary: &str) -> String {
    summary.lines().last().unwrap_or_default().to_string()
}

fn round_robin() -> Outcome {
    let ball = shapes::uv_sphere(Vec3::new(0.0123456, 0.0, 0.0), 1.0, 8, 12);
    let mm = |name: &str, q, w| SystemProfile::new(name, q, w, LengthUnit::Mm).unwrap();

    let single = ok(run_rounds("ball", &ball, &[mm("A", 1e-4, 1e-6)], 5, &PropertyKind::ALL, &rr_settings()))?;
    for (kind, s) in &single.stabilization {
        ensure!(matches!(s, Stabilization::StabilizedAt(l) if *l <= 2), "single profile: {kind} {s}");
    }
    let first = &single.rounds[1].digest;
    ensure!(single.rounds[1..].iter().all(|r| &r.digest == first), "single profile files differ after round 1");

    let alt = ok(run_rounds(
        "ball",
        &ball,
        &[mm("A", 1e-4, 1e-6), mm("B", 3e-4, 1e-6)],
        6,
        &[PropertyKind::Hausdorff],
        &rr_settings(),
    ))?;
    let drift = alt.rounds[1].properties[0].as_scalar().unwrap();
    ensure!(alt.rounds[0].digest != alt.rounds[1].digest && drift > 0.0, "alternating profiles: no drift in round 1");
    let alt_s = alt.stabilization[0].1;
    ensure!(matches!(alt_s, Stabilization::StabilizedAt(l) if l >= 2), "alternating profiles: {alt_s}");

    let late = ok(run_rounds(
        "boxes",
        &two_boxes(),
        &[mm("weld", 1e-4, 5e-4), mm("quantize", 1e-4, 1e-6)],
        4,
        &[PropertyKind::Hausdorff],
        &rr_settings(),
    ))?;
    let late_line = last_line(&render_summary(&late));
    ensure!(
        late_line.split_whitespace().collect::<Vec<_>>() == ["Stabilized", "in", "Round", "3"],
        "weld scenario: `{late_line}`"
    );

    let inch = SystemProfile::new("in", 25.4e-4, 0.0, LengthUnit::In).unwrap();
    let cycle =
        ok(run_rounds("ball", &ball, &[mm("mm", 1e-3, 0.0), inch], 10, &[PropertyKind::Hausdorff], &rr_settings()))?;
    let cycle_line = last_line(&render_summary(&cycle));
    ensure!(
        cycle_line.split_whitespace().collect::<Vec<_>>() == ["Stabilized", "in", "+10"],
        "unit cycle: `{cycle_line}`"
    );

    Ok(format!(
        "single profile settles by round 2 with one file, alternating drifts {drift:.2e} then `{alt_s}`, weld `Round 3`, unit cycle `+10`"
    ))
}

const CUBE_STEP: &[u8] = include_bytes!("../../core/tests/fixtures/cube_tessellated.stp");

fn mutate(rng: &mut ChaCha8Rng, bytes: &mut Vec<u8>) {
    const ALPHABET: &[u8] = b"#=();,'.$*/\\-+0123456789EeX_ \n\"&ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    for _ in 0..rng.random_range(1..=3) {
        let len = bytes.len();
        match rng.random_range(0..6) {
            0 if len > 0 => {
                let i = rng.random_range(0..len);
                bytes[i] = rng.random();
            }
            1 if len > 0 => {
                let i = rng.random_range(0..len);
                bytes[i] = ALPHABET[rng.random_range(0..ALPHABET.len())];
            }
            2 if len > 0 => {
                let i = rng.random_range(0..len);
                let n = rng.random_range(1..=16).min(len - i);
                bytes.drain(i..i + n);
            }
            3 => {
                let i = rng.random_range(0..=len);
                let insert: Vec<u8> =
                    (0..rng.random_range(1..=8)).map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())]).collect();
                bytes.splice(i..i, insert);
            }
            4 if len > 0 => {
                let i = rng.random_range(0..len);
                let n = rng.random_range(1..=64).min(len - i);
                let copy = bytes[i..i + n].to_vec();
                let at = rng.random_range(0..=len);
                bytes.splice(at..at, copy);
            }
            _ => bytes.truncate(rng.random_range(0..=len)),
        }
    }
}

fn step_fuzz() -> Outcome {
    let file = ok(parse_part21(CUBE_STEP))?;
    let cube = ok(extract_mesh(&file))?;
    ensure!(
        cube.vertices().len() == 8 && cube.triangles().len() == 12,
        "cube has {}/{}",
        cube.vertices().len(),
        cube.triangles().len()
    );
    let chi = ok(euler_characteristic_mesh(&cube))?.as_integer().unwrap();
    ensure!(chi == 2, "cube boundary chi {chi}");

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (mut parsed, mut malformed, mut other, mut crashed) = (0usize, 0usize, Vec::new(), 0usize);
    let hook = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    for _ in 0..100_000 {
        let mut bytes = CUBE_STEP.to_vec();
        mutate(&mut rng, &mut bytes);
        let r = panic::catch_unwind(AssertUnwindSafe(|| {
            let r = parse_part21(&bytes);
            if let Ok(f) = &r {
                let _ = extract_mesh(f);
            }
            r.map(|_| ())
        }));
        match r {
            Ok(Ok(())) => parsed += 1,
            Ok(Err(Error::MalformedPart21 { .. })) => malformed += 1,
            Ok(Err(e)) => other.push(e.to_string()),
            Err(_) => crashed += 1,
        }
    }
    panic::set_hook(hook);
    ensure!(crashed == 0, "{crashed} mutations panicked");
    ensure!(other.is_empty(), "{} failures were not MalformedPart21, first: {}", other.len(), other[0]);
    Ok(format!("cube 8/12 chi 2; 100000 mutations: {parsed} parsed, {malformed} MalformedPart21, 0 crashes"))
}

fn table1_template(dir: &Path, file: &str, system: &str, write: &str) -> String {
    let text = format!(
        r#"<template>
  <system name="{system}">
    <tolerance absolute="1e-5" angular="1e-2"/>
    <precision read="1e-6" write="{write}" pmq="2e-1"/>
    <queries>PMQ,distance,integral</queries>
    <api>C++</api><scripting>Python</scripting><units>mm</units>
  </system>
  <model path="ball.off" format="off">
    <topology class="non-convex solid"/>
    <min-feature-size>1.0</min-feature-size>
  </model>
</template>"#
    );
    let path = dir.join(file);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn end_to_end() -> Outcome {
    let dir = ok(tempfile::tempdir())?;
    let ball = shapes::uv_sphere(Vec3::new(0.01234567, -0.00765432, 0.0), 2.0, 12, 16);
    ok(std::fs::write(dir.path().join("ball.off"), write_off(&ball, Precision::Digits(9))))?;
    let fine = table1_template(dir.path(), "fine.xml", "OpenCASCADE", "1e-6");
    let twin = table1_template(dir.path(), "twin.xml", "OpenCASCADE", "1e-6");
    let coarse = table1_template(dir.path(), "coarse.xml", "Rhino", "1e-2");
    let dtest = |other: &str| {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let args = ["dtest", &fine, other, "all", "0.0001", "--epsilon", "0.1", "--rays", "2000"];
        let code = run(args, &mut out, &mut err);
        (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
    };
    let (code, out, err) = dtest(&coarse);
    ensure!(code == EXIT_INCOMPATIBLE, "differing quanta exited {code}: {err}");
    ensure!(out.contains("have an incompatible Hausdorff Distance of"), "no incompatible Hausdorff line:\n{out}");
    let (same, _, err) = dtest(&twin);
    ensure!(same == EXIT_COMPATIBLE, "identical profiles exited {same}: {err}");
    Ok("quanta 1e-6 vs 1e-2 exit 1 with Hausdorff incompatible, identical profiles exit 0".into())
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("analytic volume", analytic_volume),
        ("analytic area", crofton_area),
        ("hausdorff", hausdorff_translate),
        ("topology", topology),
        ("manifoldness", naked_edges),
        ("verdict rule", verdict_rule),
        ("report text", report_text),
        ("ball radius", ball_radius),
        ("round-robin", round_robin),
        ("step parser", step_fuzz),
        ("end to end", end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
