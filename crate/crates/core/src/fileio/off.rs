use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::model::TriangleMesh;

use super::{ModelFormat, Precision};

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::MalformedMesh { format: "OFF", line, message: message.into() }
}

/// Reads an ASCII OFF file. Polygons are fan-triangulated; trailing colour
/// values on face lines are ignored.
pub fn read_off(text: &str) -> Result<TriangleMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line, header) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let mut words = header.split_whitespace();
    if words.next() != Some("OFF") {
        return Err(bad(line, "missing `OFF` header"));
    }
    // counts may share the header line
    let rest: Vec<&str> = words.collect();
    let (line, counts) = if rest.is_empty() {
        let (l, c) = lines.next().ok_or_else(|| bad(line, "missing counts"))?;
        (l, c.split_whitespace().collect::<Vec<_>>())
    } else {
        (line, rest)
    };
    if counts.len() < 2 {
        return Err(bad(line, "counts line needs vertex and face counts"));
    }
    let parse_count = |s: &str| s.parse::<usize>().map_err(|_| bad(line, format!("bad count `{s}`")));
    let nv = parse_count(counts[0])?;
    let nf = parse_count(counts[1])?;

    let mut vertices = Vec::with_capacity(nv.min(1 << 20));
    for _ in 0..nv {
        let (line, l) = lines.next().ok_or_else(|| bad(line, "file ends inside the vertex list"))?;
        let xs: Vec<f64> = l
            .split_whitespace()
            .take(3)
            .map(|w| w.parse::<f64>().map_err(|_| bad(line, format!("bad coordinate `{w}`"))))
            .collect::<Result<_>>()?;
        if xs.len() != 3 {
            return Err(bad(line, "vertex needs three coordinates"));
        }
        vertices.push(Vec3::new(xs[0], xs[1], xs[2]));
    }

    let mut triangles = Vec::with_capacity(nf.min(1 << 20));
    for _ in 0..nf {
        let (line, l) = lines.next().ok_or_else(|| bad(line, "file ends inside the face list"))?;
        let mut words = l.split_whitespace();
        let n: usize = words
            .next()
            .and_then(|w| w.parse().ok())
            .ok_or_else(|| bad(line, "face must start with its vertex count"))?;
        if n < 3 {
            return Err(bad(line, format!("face with {n} vertices")));
        }
        let ix: Vec<usize> = words
            .take(n)
            .map(|w| match w.parse::<usize>() {
                Ok(i) if i < nv => Ok(i),
                _ => Err(bad(line, format!("bad vertex index `{w}`"))),
            })
            .collect::<Result<_>>()?;
        if ix.len() != n {
            return Err(bad(line, format!("face lists {} of {n} vertices", ix.len())));
        }
        for w in 1..n - 1 {
            triangles.push([ix[0], ix[w], ix[w + 1]]);
        }
    }
    TriangleMesh::from_soup(vertices, triangles, Some(ModelFormat::Off))
}

pub fn write_off(mesh: &TriangleMesh, precision: Precision) -> String {
    let mut out = String::with_capacity(32 * (mesh.vertices().len() + mesh.triangles().len()) + 16);
    let _ = writeln!(out, "OFF\n{} {} 0", mesh.vertices().len(), mesh.triangles().len());
    for v in mesh.vertices() {
        let _ = writeln!(out, "{} {} {}", precision.format(v.x), precision.format(v.y), precision.format(v.z));
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    out
}

/// Points only, no faces: a cloud viewers can open.
pub fn write_point_cloud_off(points: &[Vec3], precision: Precision) -> String {
    let mut out = format!("OFF\n{} 0 0\n", points.len());
    for p in points {
        let _ = writeln!(out, "{} {} {}", precision.format(p.x), precision.format(p.y), precision.format(p.z));
    }
    out
}
