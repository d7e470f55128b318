//! Plain-text mesh format.
//!
//! ```text
//! smesh <dim> <nv> <nc>
//! <x> <y> [<z>]          # nv lines
//! <i0> <i1> <i2> [<i3>]  # nc lines, 1-based vertex indices
//! ```
//! Boundary facets are never stored; they are derived on read.

use std::fmt::Write as _;

use super::{cell_orientation, Mesh, Orientation};
use crate::error::{Error, Result};

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Parses a mesh; inverted cells are repaired and counted in
/// [`Mesh::repaired_cells`].
pub fn read_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (header_line, header) = lines.next().ok_or_else(|| parse_error(1, "empty input"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "smesh" {
        return Err(parse_error(header_line, "expected header 'smesh <dim> <nv> <nc>'"));
    }
    let parse_count = |s: &str| s.parse::<usize>().map_err(|_| parse_error(header_line, format!("bad count '{s}'")));
    let dim = parse_count(fields[1])?;
    let nv = parse_count(fields[2])?;
    let nc = parse_count(fields[3])?;
    if dim != 2 && dim != 3 {
        return Err(parse_error(header_line, format!("dimension must be 2 or 3, got {dim}")));
    }

    let mut coords = Vec::with_capacity(nv * dim);
    for _ in 0..nv {
        let (line, text) = lines.next().ok_or_else(|| parse_error(header_line, "unexpected end of file in vertex block"))?;
        let values: Vec<&str> = text.split_whitespace().collect();
        if values.len() != dim {
            return Err(parse_error(line, format!("expected {dim} coordinates, found {}", values.len())));
        }
        for v in values {
            let x: f64 = v.parse().map_err(|_| parse_error(line, format!("bad coordinate '{v}'")))?;
            if !x.is_finite() {
                return Err(parse_error(line, "non-finite coordinate"));
            }
            coords.push(x);
        }
    }

    let mut cells = Vec::with_capacity(nc * (dim + 1));
    for _ in 0..nc {
        let (line, text) = lines.next().ok_or_else(|| parse_error(header_line, "unexpected end of file in cell block"))?;
        let values: Vec<&str> = text.split_whitespace().collect();
        if values.len() != dim + 1 {
            return Err(parse_error(line, format!("expected {} vertex indices, found {}", dim + 1, values.len())));
        }
        let start = cells.len();
        for v in values {
            let index: usize = v.parse().map_err(|_| parse_error(line, format!("bad vertex index '{v}'")))?;
            if index == 0 || index > nv {
                return Err(parse_error(line, format!("vertex index {index} out of range 1..={nv}")));
            }
            cells.push(index - 1);
        }
        if let Orientation::Degenerate = cell_orientation(dim, &coords, &cells[start..]) {
            return Err(parse_error(line, "cell has non-positive volume"));
        }
    }
    if let Some((line, _)) = lines.next() {
        return Err(parse_error(line, "trailing data after cell block"));
    }
    Mesh::new(dim, coords, cells)
}

/// Serializes a mesh. Coordinates use the shortest representation that
/// round-trips exactly.
pub fn write_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    let dim = mesh.dim();
    writeln!(out, "smesh {} {} {}", dim, mesh.n_vertices(), mesh.n_cells()).unwrap();
    for v in 0..mesh.n_vertices() {
        let line: Vec<String> = mesh.vertex(v).iter().map(|x| format!("{x:?}")).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    for c in 0..mesh.n_cells() {
        let line: Vec<String> = mesh.cell(c).iter().map(|i| (i + 1).to_string()).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    out
}
