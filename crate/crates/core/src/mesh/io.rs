//! Plain-text mesh format.
//!
//! ```text
//! nodes <N>
//! <x> <y> <is_boundary>      (N lines)
//! triangles <T>
//! <i> <j> <k>                (T lines, 0-based, counterclockwise)
//! boundary_loops <L>
//! loop <len>
//! <index>                    (len lines, in loop order)
//! ```
//!
//! Coordinates are written with the shortest decimal representation that
//! round-trips, so writing and re-reading a mesh reproduces it bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{BoundaryShape, Mesh};
use crate::error::{Error, Result};

pub fn write_mesh_text(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "nodes {}", mesh.vertex_count());
    for (v, p) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(s, "{} {} {}", p[0], p[1], u8::from(mesh.is_boundary(v)));
    }
    let _ = writeln!(s, "triangles {}", mesh.triangles().len());
    for t in mesh.triangles() {
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "boundary_loops 1");
    let _ = writeln!(s, "loop {}", mesh.boundary_count());
    for b in mesh.boundary_nodes() {
        let _ = writeln!(s, "{b}");
    }
    s
}

pub fn write_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    std::fs::write(path, write_mesh_text(mesh))?;
    Ok(())
}

pub fn read_mesh(path: &Path) -> Result<Mesh> {
    parse_mesh_text(&std::fs::read_to_string(path)?)
}

/// SHA-256 of the text serialization, as lowercase hex.
pub fn mesh_hash(mesh: &Mesh) -> String {
    let digest = Sha256::digest(write_mesh_text(mesh).as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut acc, b| {
        let _ = write!(acc, "{b:02x}");
        acc
    })
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next_tokens(&mut self) -> Result<Vec<&'a str>> {
        for (i, l) in self.inner.by_ref() {
            self.line = i + 1;
            let toks: Vec<&str> = l.split_whitespace().collect();
            if !toks.is_empty() {
                return Ok(toks);
            }
        }
        Err(self.err("unexpected end of file"))
    }

    fn err(&self, reason: impl Into<String>) -> Error {
        Error::MeshFormat {
            line: self.line,
            reason: reason.into(),
        }
    }

    fn header(&mut self, key: &str) -> Result<usize> {
        let toks = self.next_tokens()?;
        match toks.as_slice() {
            [k, n] if *k == key => n.parse().map_err(|_| self.err(format!("bad count `{n}`"))),
            _ => Err(self.err(format!("expected `{key} <count>`"))),
        }
    }

    fn parse<T: std::str::FromStr>(&self, tok: &str) -> Result<T> {
        tok.parse().map_err(|_| self.err(format!("cannot parse `{tok}`")))
    }
}

pub fn parse_mesh_text(text: &str) -> Result<Mesh> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let n = lines.header("nodes")?;
    let mut vertices = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    for _ in 0..n {
        let toks = lines.next_tokens()?;
        let [x, y, b] = toks.as_slice() else {
            return Err(lines.err("expected `x y is_boundary`"));
        };
        vertices.push([lines.parse::<f64>(x)?, lines.parse::<f64>(y)?]);
        flags.push(match *b {
            "0" => false,
            "1" => true,
            other => return Err(lines.err(format!("boundary flag must be 0 or 1, got `{other}`"))),
        });
    }

    let t = lines.header("triangles")?;
    let mut triangles = Vec::with_capacity(t);
    for _ in 0..t {
        let toks = lines.next_tokens()?;
        let [i, j, k] = toks.as_slice() else {
            return Err(lines.err("expected `i j k`"));
        };
        triangles.push([lines.parse(i)?, lines.parse(j)?, lines.parse(k)?]);
    }

    let loops = lines.header("boundary_loops")?;
    if loops != 1 {
        return Err(lines.err(format!("exactly one boundary loop supported, got {loops}")));
    }
    let len = lines.header("loop")?;
    let mut boundary = Vec::with_capacity(len);
    while boundary.len() < len {
        for tok in lines.next_tokens()? {
            boundary.push(lines.parse::<usize>(tok)?);
        }
    }
    if boundary.len() != len {
        return Err(lines.err("loop length mismatch"));
    }
    let mesh = Mesh::from_parts(vertices, triangles, boundary, BoundaryShape::Polygon)?;
    if let Some(v) = (0..mesh.vertex_count()).find(|&v| mesh.is_boundary(v) != flags[v]) {
        return Err(Error::MeshFormat {
            line: 0,
            reason: format!("boundary flag of node {v} disagrees with the loop"),
        });
    }
    Ok(mesh)
}
