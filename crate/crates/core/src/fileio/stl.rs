use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::model::TriangleMesh;

use super::{ModelFormat, Precision};

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::MalformedMesh { format: "STL", line, message: message.into() }
}

/// Binary files are recognised by their length matching the declared
/// triangle count; everything else is parsed as ASCII.
pub fn read_stl(bytes: &[u8]) -> Result<TriangleMesh> {
    if bytes.len() >= 84 {
        let n = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as usize;
        if n.checked_mul(50).and_then(|b| b.checked_add(84)) == Some(bytes.len()) {
            return read_binary(&bytes[84..], n);
        }
    }
    let text = std::str::from_utf8(bytes).map_err(|_| bad(1, "not UTF-8 and not a binary STL"))?;
    read_ascii(text)
}

fn read_binary(body: &[u8], n: usize) -> Result<TriangleMesh> {
    let mut vertices = Vec::with_capacity(3 * n);
    for rec in body.chunks_exact(50) {
        for k in 0..3 {
            let at = 12 + 12 * k;
            let f =
                |o: usize| f32::from_le_bytes([rec[at + o], rec[at + o + 1], rec[at + o + 2], rec[at + o + 3]]) as f64;
            vertices.push(Vec3::new(f(0), f(4), f(8)));
        }
    }
    let triangles = (0..n).map(|i| [3 * i, 3 * i + 1, 3 * i + 2]).collect();
    TriangleMesh::from_soup(vertices, triangles, Some(ModelFormat::Stl))
}

/// Facet normals in the file are ignored; orientation comes from the vertex
/// order alone.
fn read_ascii(text: &str) -> Result<TriangleMesh> {
    let mut words = text.lines().enumerate().flat_map(|(i, l)| l.split_whitespace().map(move |w| (i + 1, w)));
    let expect = |want: &str, words: &mut dyn Iterator<Item = (usize, &str)>| -> Result<usize> {
        match words.next() {
            Some((line, w)) if w.eq_ignore_ascii_case(want) => Ok(line),
            Some((line, w)) => Err(bad(line, format!("expected `{want}`, found `{w}`"))),
            None => Err(bad(text.lines().count().max(1), format!("expected `{want}` before end of file"))),
        }
    };
    expect("solid", &mut words)?;
    let mut vertices = Vec::new();
    // skip the optional solid name
    let mut pending = loop {
        match words.next() {
            Some((_, w)) if w.eq_ignore_ascii_case("facet") || w.eq_ignore_ascii_case("endsolid") => break Some(w),
            Some(_) => continue,
            None => break None,
        }
    };
    loop {
        match pending {
            Some(w) if w.eq_ignore_ascii_case("endsolid") => break,
            Some(_) => {
                let line = expect("normal", &mut words)?;
                for _ in 0..3 {
                    number(&mut words, line)?;
                }
                expect("outer", &mut words)?;
                expect("loop", &mut words)?;
                for _ in 0..3 {
                    let line = expect("vertex", &mut words)?;
                    let x = number(&mut words, line)?;
                    let y = number(&mut words, line)?;
                    let z = number(&mut words, line)?;
                    vertices.push(Vec3::new(x, y, z));
                }
                expect("endloop", &mut words)?;
                expect("endfacet", &mut words)?;
            }
            None => return Err(bad(text.lines().count().max(1), "missing `endsolid`")),
        }
        pending = match words.next() {
            Some((_, w)) if w.eq_ignore_ascii_case("facet") || w.eq_ignore_ascii_case("endsolid") => Some(w),
            Some((line, w)) => return Err(bad(line, format!("expected `facet` or `endsolid`, found `{w}`"))),
            None => None,
        };
    }
    let n = vertices.len() / 3;
    let triangles = (0..n).map(|i| [3 * i, 3 * i + 1, 3 * i + 2]).collect();
    TriangleMesh::from_soup(vertices, triangles, Some(ModelFormat::Stl))
}

fn number(words: &mut dyn Iterator<Item = (usize, &str)>, line: usize) -> Result<f64> {
    match words.next() {
        Some((l, w)) => w.parse::<f64>().map_err(|_| bad(l, format!("bad number `{w}`"))),
        None => Err(bad(line, "file ends inside a facet")),
    }
}

/// ASCII STL with normals recomputed from the vertex order.
pub fn write_stl(mesh: &TriangleMesh, name: &str, precision: Precision) -> String {
    let name: String = name.chars().filter(|c| !c.is_whitespace()).collect();
    let mut out = format!("solid {name}\n");
    let f = |v: f64| precision.format(v);
    for i in 0..mesh.triangles().len() {
        let [a, b, c] = mesh.triangle(i);
        let n = (b - a).cross(c - a);
        let n = if n.norm() > 0.0 { n.normalized() } else { Vec3::ZERO };
        let _ = writeln!(out, "  facet normal {} {} {}", f(n.x), f(n.y), f(n.z));
        out.push_str("    outer loop\n");
        for p in [a, b, c] {
            let _ = writeln!(out, "      vertex {} {} {}", f(p.x), f(p.y), f(p.z));
        }
        out.push_str("    endloop\n  endfacet\n");
    }
    let _ = writeln!(out, "endsolid {name}");
    out
}
