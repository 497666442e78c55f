//! Tessellated geometry in STEP files: extraction into a triangle mesh and a
//! writer that emits a single `TRIANGULATED_FACE_SET`.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::model::TriangleMesh;
use crate::units::LengthUnit;

use super::part21::{Instance, Param, Part21File, Record};
use super::{ModelFormat, Precision};

const TESSELLATED: [&str; 8] = [
    "TRIANGULATED_FACE_SET",
    "TRIANGULATED_SURFACE_SET",
    "TRIANGULATED_FACE",
    "COMPLEX_TRIANGULATED_FACE_SET",
    "COMPLEX_TRIANGULATED_SURFACE_SET",
    "COMPLEX_TRIANGULATED_FACE",
    "COORDINATES_LIST",
    "POLY_LOOP",
];

fn bad(inst: &Instance, message: impl Into<String>) -> Error {
    Error::MalformedPart21 { line: inst.line, message: message.into() }
}

/// Collects every triangulated face set and every planar `POLY_LOOP` into
/// one mesh, merging coincident vertices.
pub fn extract_mesh(file: &Part21File) -> Result<TriangleMesh> {
    if !file.entities.values().any(|e| TESSELLATED.contains(&e.keyword())) {
        return Err(Error::NoTessellatedGeometry);
    }
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let reversed = reversed_loops(file);

    for (id, inst) in &file.entities {
        let kw = inst.keyword();
        let params = inst.params();
        match kw {
            "TRIANGULATED_FACE_SET" | "TRIANGULATED_SURFACE_SET" | "TRIANGULATED_FACE" => {
                let (coords, pnindex) = coordinates_and_index(file, inst)?;
                let base = vertices.len();
                vertices.extend_from_slice(&coords);
                let tris = params.last().and_then(Param::as_list).ok_or_else(|| bad(inst, "missing triangle list"))?;
                for t in tris {
                    let ix = index_list(inst, t)?;
                    if ix.len() != 3 {
                        return Err(bad(inst, "triangle with other than 3 indices"));
                    }
                    triangles.push(resolve(inst, [ix[0], ix[1], ix[2]], &pnindex, coords.len(), base)?);
                }
            }
            "COMPLEX_TRIANGULATED_FACE_SET" | "COMPLEX_TRIANGULATED_SURFACE_SET" | "COMPLEX_TRIANGULATED_FACE" => {
                let (coords, pnindex) = coordinates_and_index(file, inst)?;
                let base = vertices.len();
                vertices.extend_from_slice(&coords);
                let n = params.len();
                if n < 2 {
                    return Err(bad(inst, "missing strips and fans"));
                }
                let strips = params[n - 2].as_list().ok_or_else(|| bad(inst, "strips must be a list"))?;
                let fans = params[n - 1].as_list().ok_or_else(|| bad(inst, "fans must be a list"))?;
                for s in strips {
                    let ix = index_list(inst, s)?;
                    for w in 0..ix.len().saturating_sub(2) {
                        let t = if w % 2 == 0 { [ix[w], ix[w + 1], ix[w + 2]] } else { [ix[w + 1], ix[w], ix[w + 2]] };
                        triangles.push(resolve(inst, t, &pnindex, coords.len(), base)?);
                    }
                }
                for f in fans {
                    let ix = index_list(inst, f)?;
                    for w in 1..ix.len().saturating_sub(1) {
                        triangles.push(resolve(inst, [ix[0], ix[w], ix[w + 1]], &pnindex, coords.len(), base)?);
                    }
                }
            }
            "POLY_LOOP" => {
                let refs =
                    params.get(1).and_then(Param::as_list).ok_or_else(|| bad(inst, "POLY_LOOP needs a point list"))?;
                let mut corners = Vec::with_capacity(refs.len());
                for r in refs {
                    let target = r.as_ref_id().and_then(|id| file.entities.get(&id));
                    match target {
                        Some(p) if p.keyword() == "CARTESIAN_POINT" => corners.push(cartesian_point(p)?),
                        _ => return Err(bad(inst, "POLY_LOOP entries must reference CARTESIAN_POINTs")),
                    }
                }
                if reversed.contains(id) {
                    corners.reverse();
                }
                let base = vertices.len();
                vertices.extend_from_slice(&corners);
                for w in 1..corners.len().saturating_sub(1) {
                    triangles.push([base, base + w, base + w + 1]);
                }
            }
            _ => {}
        }
    }
    if vertices.is_empty() || triangles.is_empty() {
        return Err(Error::EmptyModel);
    }
    TriangleMesh::from_soup(vertices, triangles, Some(ModelFormat::Step))
}

/// Loops used by a `FACE_BOUND`/`FACE_OUTER_BOUND` with orientation `.F.`.
fn reversed_loops(file: &Part21File) -> HashSet<u64> {
    file.entities
        .values()
        .filter(|e| matches!(e.keyword(), "FACE_BOUND" | "FACE_OUTER_BOUND"))
        .filter(|e| e.params().get(2).and_then(Param::as_enum) == Some("F"))
        .filter_map(|e| e.params().get(1).and_then(Param::as_ref_id))
        .collect()
}

fn cartesian_point(inst: &Instance) -> Result<Vec3> {
    let c = inst.params().get(1).and_then(Param::as_list).ok_or_else(|| bad(inst, "point without coordinates"))?;
    let xs: Option<Vec<f64>> = c.iter().map(Param::as_real).collect();
    match xs.as_deref() {
        Some([x, y, z]) => Ok(Vec3::new(*x, *y, *z)),
        Some([x, y]) => Ok(Vec3::new(*x, *y, 0.0)),
        _ => Err(bad(inst, "point needs 2 or 3 real coordinates")),
    }
}

/// The referenced `COORDINATES_LIST` and the optional `pnindex` remapping.
fn coordinates_and_index(file: &Part21File, inst: &Instance) -> Result<(Vec<Vec3>, Vec<usize>)> {
    let params = inst.params();
    let list = params
        .iter()
        .filter_map(Param::as_ref_id)
        .filter_map(|id| file.entities.get(&id))
        .find(|e| e.keyword() == "COORDINATES_LIST")
        .ok_or_else(|| bad(inst, "no COORDINATES_LIST reference"))?;
    let points = list
        .params()
        .get(2)
        .and_then(Param::as_list)
        .ok_or_else(|| bad(list, "COORDINATES_LIST needs a point list"))?;
    let mut coords = Vec::with_capacity(points.len());
    for p in points {
        let xs: Option<Vec<f64>> = p.as_list().map(|c| c.iter().map(Param::as_real).collect()).unwrap_or(None);
        match xs.as_deref() {
            Some([x, y, z]) => coords.push(Vec3::new(*x, *y, *z)),
            _ => return Err(bad(list, "coordinate triple expected")),
        }
    }
    // pnindex sits just before the triangle data
    let trailing = if inst.keyword().starts_with("COMPLEX_") { 3 } else { 2 };
    let pnindex = match params.len().checked_sub(trailing).and_then(|i| params.get(i)) {
        Some(Param::List(items)) => {
            let ix = index_list(inst, &Param::List(items.clone()))?;
            for &i in &ix {
                if i >= coords.len() {
                    return Err(bad(inst, format!("pnindex entry {} is out of range", i + 1)));
                }
            }
            ix
        }
        _ => Vec::new(),
    };
    Ok((coords, pnindex))
}

/// 1-based positive integers to 0-based indices.
fn index_list(inst: &Instance, p: &Param) -> Result<Vec<usize>> {
    let items = p.as_list().ok_or_else(|| bad(inst, "index list expected"))?;
    items
        .iter()
        .map(|i| match i.as_integer() {
            Some(v) if v >= 1 => usize::try_from(v - 1).map_err(|_| bad(inst, "index out of range")),
            _ => Err(bad(inst, "indices must be positive integers")),
        })
        .collect()
}

fn resolve(inst: &Instance, t: [usize; 3], pnindex: &[usize], n: usize, base: usize) -> Result<[usize; 3]> {
    let mut out = [0; 3];
    for (o, &i) in out.iter_mut().zip(&t) {
        let j = if pnindex.is_empty() {
            i
        } else {
            *pnindex.get(i).ok_or_else(|| bad(inst, format!("triangle index {} exceeds pnindex", i + 1)))?
        };
        if j >= n {
            return Err(bad(inst, format!("triangle index {} exceeds the coordinate list", j + 1)));
        }
        *o = base + j;
    }
    Ok(out)
}

/// Length unit declared by the first `SI_UNIT` metre or inch conversion unit.
pub fn declared_length_unit(file: &Part21File) -> Option<LengthUnit> {
    for inst in file.entities.values() {
        let is_length = inst.records.iter().any(|r| r.keyword == "LENGTH_UNIT") || !inst.is_complex();
        if !is_length {
            continue;
        }
        if let Some(si) = inst.record("SI_UNIT") {
            if si.params.get(1).and_then(Param::as_enum) != Some("METRE") {
                continue;
            }
            return match si.params.first() {
                Some(Param::Enum(p)) if p == "MILLI" => Some(LengthUnit::Mm),
                Some(Param::Enum(p)) if p == "CENTI" => Some(LengthUnit::Cm),
                Some(Param::Unset) => Some(LengthUnit::M),
                _ => None,
            };
        }
        if let Some(conv) = inst.record("CONVERSION_BASED_UNIT") {
            if let Some(Param::String(name)) = conv.params.first() {
                if name.eq_ignore_ascii_case("inch") {
                    return Some(LengthUnit::In);
                }
            }
        }
    }
    None
}

/// A Part 21 file holding `mesh` as one triangulated face set.
pub fn mesh_to_part21(mesh: &TriangleMesh, units: Option<LengthUnit>) -> Part21File {
    let rec = |keyword: &str, params: Vec<Param>| Record { keyword: keyword.to_string(), params };
    let s = |v: &str| Param::String(v.to_string());
    let mut file = Part21File {
        header: vec![
            rec("FILE_DESCRIPTION", vec![Param::List(vec![s("tessellated model")]), s("2;1")]),
            rec(
                "FILE_NAME",
                vec![s(""), s(""), Param::List(vec![s("")]), Param::List(vec![s("")]), s(""), s("dtest"), s("")],
            ),
            rec("FILE_SCHEMA", vec![Param::List(vec![s("AP242_MANAGED_MODEL_BASED_3D_ENGINEERING_MIM_LF")])]),
        ],
        ..Default::default()
    };
    let points: Vec<Param> = mesh
        .vertices()
        .iter()
        .map(|v| Param::List(vec![Param::Real(v.x), Param::Real(v.y), Param::Real(v.z)]))
        .collect();
    let tris: Vec<Param> = mesh
        .triangles()
        .iter()
        .map(|t| Param::List(t.iter().map(|&i| Param::Integer(i as i64 + 1)).collect()))
        .collect();
    let n = points.len() as i64;
    file.entities.insert(
        1,
        Instance {
            records: vec![rec("COORDINATES_LIST", vec![s(""), Param::Integer(n), Param::List(points)])],
            line: 0,
        },
    );
    file.entities.insert(
        2,
        Instance {
            records: vec![rec(
                "TRIANGULATED_FACE_SET",
                vec![
                    s(""),
                    Param::Ref(1),
                    Param::Integer(0),
                    Param::List(vec![]),
                    Param::List(vec![]),
                    Param::List(tris),
                ],
            )],
            line: 0,
        },
    );
    if let Some(unit) = units {
        let si = match unit {
            LengthUnit::Mm => Some(Param::Enum("MILLI".into())),
            LengthUnit::Cm => Some(Param::Enum("CENTI".into())),
            LengthUnit::M => Some(Param::Unset),
            LengthUnit::In => None,
        };
        let records = match si {
            Some(prefix) => vec![
                rec("LENGTH_UNIT", vec![]),
                rec("NAMED_UNIT", vec![Param::Derived]),
                rec("SI_UNIT", vec![prefix, Param::Enum("METRE".into())]),
            ],
            None => vec![
                rec("CONVERSION_BASED_UNIT", vec![s("INCH"), Param::Ref(4)]),
                rec("LENGTH_UNIT", vec![]),
                rec("NAMED_UNIT", vec![Param::Ref(5)]),
            ],
        };
        file.entities.insert(3, Instance { records, line: 0 });
        if unit == LengthUnit::In {
            file.entities.insert(
                4,
                Instance {
                    records: vec![rec(
                        "LENGTH_MEASURE_WITH_UNIT",
                        vec![Param::Typed("LENGTH_MEASURE".into(), vec![Param::Real(25.4)]), Param::Ref(6)],
                    )],
                    line: 0,
                },
            );
            file.entities.insert(
                5,
                Instance {
                    records: vec![rec(
                        "DIMENSIONAL_EXPONENTS",
                        [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0].iter().map(|&v| Param::Real(v)).collect(),
                    )],
                    line: 0,
                },
            );
            file.entities.insert(
                6,
                Instance {
                    records: vec![
                        rec("LENGTH_UNIT", vec![]),
                        rec("NAMED_UNIT", vec![Param::Derived]),
                        rec("SI_UNIT", vec![Param::Enum("MILLI".into()), Param::Enum("METRE".into())]),
                    ],
                    line: 0,
                },
            );
        }
    }
    file
}

pub fn write_step(mesh: &TriangleMesh, units: Option<LengthUnit>, precision: Precision) -> String {
    mesh_to_part21(mesh, units).to_text(precision)
}
