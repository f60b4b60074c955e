//! Plain-text mesh format and CSV field export.
//!
//! ```text
//! n_vertices n_cells n_bedges
//! x y            (n_vertices lines)
//! i j k          (n_cells lines, counter-clockwise)
//! v0 v1 D|N      (n_bedges lines)
//! ```
//! Blank lines and lines starting with `#` are skipped.

use std::fmt::Write as _;
use std::path::Path;

use super::mesh::{BoundaryEdge, BoundaryTag, Mesh};
use super::solver::DiscreteField;
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { location: format!("line {line}"), message: message.into() }
}

fn fields<T: std::str::FromStr>(line: usize, parts: &[&str], n: usize, what: &str) -> Result<Vec<T>> {
    if parts.len() != n {
        return Err(parse_err(line, format!("expected {n} fields for {what}, found {}", parts.len())));
    }
    parts.iter().map(|s| s.parse::<T>().map_err(|_| parse_err(line, format!("cannot read {s:?} in {what}")))).collect()
}

pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut lines =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "empty mesh file"))?;
    let counts: Vec<usize> = fields(hl, &header.split_whitespace().collect::<Vec<_>>(), 3, "the header")?;
    let mut next = |what: &str| lines.next().ok_or_else(|| parse_err(0, format!("unexpected end of file while reading {what}")));
    let mut vertices = Vec::with_capacity(counts[0]);
    for _ in 0..counts[0] {
        let (ln, l) = next("vertices")?;
        let v: Vec<f64> = fields(ln, &l.split_whitespace().collect::<Vec<_>>(), 2, "a vertex")?;
        vertices.push([v[0], v[1]]);
    }
    let mut cells = Vec::with_capacity(counts[1]);
    for _ in 0..counts[1] {
        let (ln, l) = next("cells")?;
        let c: Vec<usize> = fields(ln, &l.split_whitespace().collect::<Vec<_>>(), 3, "a cell")?;
        cells.push([c[0], c[1], c[2]]);
    }
    let mut edges = Vec::with_capacity(counts[2]);
    for _ in 0..counts[2] {
        let (ln, l) = next("boundary edges")?;
        let parts: Vec<&str> = l.split_whitespace().collect();
        let v: Vec<usize> = fields(ln, &parts[..parts.len().min(2)], 2, "a boundary edge")?;
        let tag = match parts.get(2) {
            Some(t) if parts.len() == 3 => {
                BoundaryTag::parse(t).ok_or_else(|| parse_err(ln, format!("unknown tag {t:?} (use D or N)")))?
            }
            _ => return Err(parse_err(ln, "expected `v0 v1 D|N`")),
        };
        edges.push(BoundaryEdge { vertices: [v[0], v[1]], tag });
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content after the declared counts"));
    }
    Mesh::new(vertices, cells, edges)
}

pub fn format_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {} {}", mesh.n_vertices(), mesh.n_cells(), mesh.boundary_edges().len());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{} {}", p[0], p[1]);
    }
    for c in mesh.cells() {
        let _ = writeln!(s, "{} {} {}", c[0], c[1], c[2]);
    }
    for e in mesh.boundary_edges() {
        let _ = writeln!(s, "{} {} {}", e.vertices[0], e.vertices[1], e.tag.letter());
    }
    s
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mesh(&text).map_err(|e| match e {
        Error::Parse { location, message } => Error::Parse { location: format!("{}:{location}", path.display()), message },
        other => other,
    })
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_mesh(mesh)).map_err(|e| Error::io(path, e))
}

/// `vertex_id,x,y,value` rows with shortest round-trip floats.
pub fn field_csv(mesh: &Mesh, field: &DiscreteField) -> String {
    let mut s = String::from("vertex_id,x,y,value\n");
    for (i, (p, v)) in mesh.vertices().iter().zip(&field.values).enumerate() {
        let _ = writeln!(s, "{i},{},{},{v}", p[0], p[1]);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::mesh::{build_disk, build_structured_square, SquareTags};

    #[test]
    fn round_trip() {
        for mesh in [build_structured_square(3, &SquareTags::dirichlet_left()).unwrap(), build_disk(3).unwrap()] {
            let back = parse_mesh(&format_mesh(&mesh)).unwrap();
            assert_eq!(back.content_hash(), mesh.content_hash());
        }
        let dir = tempfile::tempdir().unwrap();
        let m = build_structured_square(2, &SquareTags::dirichlet_left()).unwrap();
        let p = dir.path().join("m.txt");
        write_mesh(&m, &p).unwrap();
        assert_eq!(read_mesh(&p).unwrap().content_hash(), m.content_hash());
    }

    #[test]
    fn diagnostics_name_the_line() {
        let text = "3 1 3\n0 0\n1 0\n0 1\n0 1 2\n0 1 D\n1 2 X\n2 0 N\n";
        let e = parse_mesh(text).unwrap_err().to_string();
        assert!(e.contains("line 7"), "{e}");
        let e = parse_mesh("3 1 3\n0 0\n1 zero\n").unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
    }

    #[test]
    fn csv_layout() {
        let m = build_structured_square(2, &SquareTags::dirichlet_left()).unwrap();
        let csv = field_csv(&m, &DiscreteField::zeros(m.n_vertices()));
        assert!(csv.starts_with("vertex_id,x,y,value\n0,0,0,0\n"));
        assert_eq!(csv.lines().count(), 10);
    }
}
