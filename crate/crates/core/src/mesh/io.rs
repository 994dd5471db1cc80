use std::fmt::Write;

use super::{CellKind, Mesh};
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Parses the line-oriented mesh format; `#` starts a comment.
pub fn load_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut next = |what: &str| lines.next().ok_or_else(|| parse_err(0, format!("unexpected end of file, expected {what}")));

    let (ln, header) = next("header")?;
    if header.split_whitespace().collect::<Vec<_>>() != ["meshformat", "1"] {
        return Err(parse_err(ln, "expected `meshformat 1`"));
    }
    let (ln, torus) = next("torus line")?;
    let tok: Vec<&str> = torus.split_whitespace().collect();
    if tok.len() != 3 || tok[0] != "torus" {
        return Err(parse_err(ln, "expected `torus <Lx> <Ly>`"));
    }
    let lx = parse_f64(ln, tok[1])?;
    let ly = parse_f64(ln, tok[2])?;

    let (ln, vline) = next("vertices line")?;
    let nv = parse_count(ln, vline, "vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = next("vertex")?;
        let tok: Vec<&str> = l.split_whitespace().collect();
        if tok.len() != 2 {
            return Err(parse_err(ln, "expected `<x> <y>`"));
        }
        vertices.push([parse_f64(ln, tok[0])?, parse_f64(ln, tok[1])?]);
    }
    let (ln, cline) = next("cells line")?;
    let nc = parse_count(ln, cline, "cells")?;
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, l) = next("cell")?;
        let tok: Vec<&str> = l.split_whitespace().collect();
        let expected = match tok.first() {
            Some(&"tri") => 3,
            Some(&"quad") => 4,
            _ => return Err(parse_err(ln, "expected `tri` or `quad`")),
        };
        if tok.len() != expected + 1 {
            return Err(parse_err(ln, format!("expected {expected} vertex indices")));
        }
        let mut ids = Vec::with_capacity(expected);
        for t in &tok[1..] {
            let v: usize = t.parse().map_err(|_| parse_err(ln, format!("bad vertex index `{t}`")))?;
            if v >= nv {
                return Err(parse_err(ln, format!("vertex index {v} out of range")));
            }
            ids.push(v);
        }
        cells.push(ids);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content after cells"));
    }
    Mesh::new(lx, ly, vertices, cells)
}

fn parse_f64(line: usize, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_err(line, format!("bad number `{s}`")))
}

fn parse_count(line: usize, l: &str, keyword: &str) -> Result<usize> {
    let tok: Vec<&str> = l.split_whitespace().collect();
    if tok.len() != 2 || tok[0] != keyword {
        return Err(parse_err(line, format!("expected `{keyword} <count>`")));
    }
    tok[1].parse().map_err(|_| parse_err(line, format!("bad count `{}`", tok[1])))
}

/// Serializes a mesh; sides are derived on load and not written.
pub fn save_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "meshformat 1");
    let _ = writeln!(s, "torus {:?} {:?}", mesh.lx, mesh.ly);
    let _ = writeln!(s, "vertices {}", mesh.vertices.len());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{:?} {:?}", v[0], v[1]);
    }
    let _ = writeln!(s, "cells {}", mesh.cells.len());
    for c in &mesh.cells {
        let tag = match c.kind {
            CellKind::Triangle => "tri",
            CellKind::Quad => "quad",
        };
        let ids: Vec<String> = c.vertices.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{tag} {}", ids.join(" "));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_line_numbers() {
        let text = "meshformat 1\ntorus 1 1\nvertices 1\n0 zero\n";
        match load_mesh(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(matches!(load_mesh("meshformat 2\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let m = crate::mesh::generate_cartesian(3, 3, 1.0, 1.0).unwrap();
        let text = format!("# header comment\n\n{}", save_mesh(&m).replace("cells", "# c\ncells"));
        assert_eq!(load_mesh(&text).unwrap(), m);
    }
}
