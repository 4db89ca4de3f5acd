//! Plain-text mesh files and `index value` column files.
//!
//! Mesh files hold up to four sections, each a header `name count`
//! followed by `count` rows that start with their 0-based row index:
//!
//! ```text
//! # unit square
//! nodes 4
//! 0 0 0
//! 1 1 0
//! 2 1 1
//! 3 0 1
//! triangles 2
//! 0 0 1 2
//! 1 0 2 3
//! boundary 4
//! 0 0 1
//! 1 1 2
//! 2 2 3
//! 3 3 0
//! omega0 1
//! 0 1
//! ```
//!
//! `omega0` lists triangle indices and may be omitted (whole domain).
//! `#` starts a comment. Numbers are written in shortest round-trip
//! scientific form, so output is byte-identical for identical meshes.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{FemError, Result};
use crate::mesh::Mesh;

fn parse_err(line: usize, message: impl Into<String>) -> FemError {
    FemError::Parse {
        line,
        message: message.into(),
    }
}

/// Non-empty lines with comments stripped, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn field<T: FromStr>(line: usize, tok: Option<&str>, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from {tok:?}")))
}

fn finite(line: usize, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(parse_err(line, format!("non-finite value {v}")))
    }
}

struct Section<'a, I: Iterator<Item = (usize, &'a str)>> {
    lines: std::iter::Peekable<I>,
}

impl<'a, I: Iterator<Item = (usize, &'a str)>> Section<'a, I> {
    /// Reads `name count` and then `count` indexed rows of `width` fields.
    fn read<T>(
        &mut self,
        name: &str,
        width: usize,
        mut row: impl FnMut(usize, &[&str]) -> Result<T>,
    ) -> Result<Vec<T>> {
        let (ln, header) = self
            .lines
            .next()
            .ok_or_else(|| parse_err(0, format!("missing section '{name}'")))?;
        let mut toks = header.split_whitespace();
        if toks.next() != Some(name) {
            return Err(parse_err(
                ln,
                format!("expected section '{name}', found {header:?}"),
            ));
        }
        let count: usize = field(ln, toks.next(), "section size")?;
        if toks.next().is_some() {
            return Err(parse_err(ln, "trailing tokens after section size"));
        }
        let mut out = Vec::new();
        for expected in 0..count {
            let (ln, l) = self.lines.next().ok_or_else(|| {
                parse_err(
                    ln,
                    format!("section '{name}' ends after {expected} of {count} rows"),
                )
            })?;
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() != width + 1 {
                return Err(parse_err(
                    ln,
                    format!("expected {} fields, found {}", width + 1, toks.len()),
                ));
            }
            let idx: usize = field(ln, Some(toks[0]), "row index")?;
            if idx != expected {
                return Err(parse_err(
                    ln,
                    format!("row index {idx} out of sequence (expected {expected})"),
                ));
            }
            out.push(row(ln, &toks[1..])?);
        }
        Ok(out)
    }
}

/// Parses a mesh file and validates the mesh.
pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut sec = Section {
        lines: content_lines(text).peekable(),
    };
    let nodes = sec.read("nodes", 2, |ln, t| {
        Ok([
            finite(ln, field(ln, Some(t[0]), "x")?)?,
            finite(ln, field(ln, Some(t[1]), "y")?)?,
        ])
    })?;
    let triangles = sec.read("triangles", 3, |ln, t| {
        Ok([
            field(ln, Some(t[0]), "node")?,
            field(ln, Some(t[1]), "node")?,
            field(ln, Some(t[2]), "node")?,
        ])
    })?;
    let boundary = sec.read("boundary", 2, |ln, t| {
        Ok([
            field(ln, Some(t[0]), "node")?,
            field(ln, Some(t[1]), "node")?,
        ])
    })?;
    let omega0 = if sec.lines.peek().is_some() {
        Some(sec.read("omega0", 1, |ln, t| {
            field::<usize>(ln, Some(t[0]), "triangle")
        })?)
    } else {
        None
    };
    if let Some((ln, l)) = sec.lines.next() {
        return Err(parse_err(ln, format!("unexpected content {l:?}")));
    }
    let mesh = Mesh::new(nodes, triangles, boundary)?;
    match omega0 {
        Some(elements) => mesh.with_omega0_elements(elements),
        None => Ok(mesh),
    }
}

/// Serializes a mesh; `omega0` is written only when it is a proper subset.
pub fn format_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "nodes {}", mesh.n_nodes());
    for (i, p) in mesh.nodes().iter().enumerate() {
        let _ = writeln!(s, "{i} {:e} {:e}", p[0], p[1]);
    }
    let _ = writeln!(s, "triangles {}", mesh.n_triangles());
    for (i, t) in mesh.triangles().iter().enumerate() {
        let _ = writeln!(s, "{i} {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "boundary {}", mesh.boundary_edges().len());
    for (i, e) in mesh.boundary_edges().iter().enumerate() {
        let _ = writeln!(s, "{i} {} {}", e[0], e[1]);
    }
    if mesh.omega0_elements().len() < mesh.n_triangles() {
        let _ = writeln!(s, "omega0 {}", mesh.omega0_elements().len());
        for (i, k) in mesh.omega0_elements().iter().enumerate() {
            let _ = writeln!(s, "{i} {k}");
        }
    }
    s
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    parse_mesh(&std::fs::read_to_string(path)?)
}

pub fn write_mesh(path: impl AsRef<Path>, mesh: &Mesh) -> Result<()> {
    Ok(std::fs::write(path, format_mesh(mesh))?)
}

/// Parses `index value` rows. Indices need not be sorted.
pub fn parse_columns(text: &str) -> Result<Vec<(usize, f64)>> {
    content_lines(text)
        .map(|(ln, l)| {
            let mut toks = l.split_whitespace();
            let idx = field(ln, toks.next(), "index")?;
            let val = finite(ln, field(ln, toks.next(), "value")?)?;
            if toks.next().is_some() {
                return Err(parse_err(ln, "expected exactly two fields"));
            }
            Ok((idx, val))
        })
        .collect()
}

/// Scatters columns into a vector of length `n`; every index in `0..n`
/// must appear exactly once.
pub fn columns_to_dense(cols: &[(usize, f64)], n: usize) -> Result<Vec<f64>> {
    let mut out = vec![f64::NAN; n];
    for &(i, v) in cols {
        match out.get_mut(i) {
            None => {
                return Err(FemError::InvalidArgument(format!(
                    "index {i} out of range for length {n}"
                )))
            }
            Some(slot) if !slot.is_nan() => {
                return Err(FemError::InvalidArgument(format!(
                    "index {i} appears twice"
                )))
            }
            Some(slot) => *slot = v,
        }
    }
    if let Some(i) = out.iter().position(|v| v.is_nan()) {
        return Err(FemError::InvalidArgument(format!("index {i} is missing")));
    }
    Ok(out)
}

pub fn format_columns(indices: &[usize], values: &[f64]) -> Result<String> {
    if indices.len() != values.len() {
        return Err(FemError::InvalidArgument(format!(
            "{} indices but {} values",
            indices.len(),
            values.len()
        )));
    }
    let mut s = String::new();
    for (i, v) in indices.iter().zip(values) {
        let _ = writeln!(s, "{i} {v:e}");
    }
    Ok(s)
}

pub fn read_columns(path: impl AsRef<Path>) -> Result<Vec<(usize, f64)>> {
    parse_columns(&std::fs::read_to_string(path)?)
}

pub fn write_columns(path: impl AsRef<Path>, indices: &[usize], values: &[f64]) -> Result<()> {
    Ok(std::fs::write(path, format_columns(indices, values)?)?)
}
