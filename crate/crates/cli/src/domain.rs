//! Domain recipes. The recipe string is stored in every basis file so that a
//! later command can rebuild exactly the same mesh.

use std::fmt;
use std::path::{Path, PathBuf};

use steklov_core::mesh::{build_polygon_mesh, disk_mesh_for_spacing, read_mesh};
use steklov_core::{Mesh, Point};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    Disk { radius: f64, h: f64 },
    Polygon { vertices: Vec<Point>, h: f64 },
    MeshFile { path: PathBuf },
}

impl DomainSpec {
    pub fn build(&self) -> Result<Mesh, CliError> {
        Ok(match self {
            DomainSpec::Disk { radius, h } => disk_mesh_for_spacing(*radius, *h)?,
            DomainSpec::Polygon { vertices, h } => build_polygon_mesh(vertices, *h)?,
            DomainSpec::MeshFile { path } => read_mesh(path)?,
        })
    }

    /// Mesh spacing when the recipe has one.
    pub fn h(&self) -> Option<f64> {
        match self {
            DomainSpec::Disk { h, .. } | DomainSpec::Polygon { h, .. } => Some(*h),
            DomainSpec::MeshFile { .. } => None,
        }
    }

    pub fn is_disk(&self) -> Option<f64> {
        match self {
            DomainSpec::Disk { radius, .. } => Some(*radius),
            _ => None,
        }
    }

    /// Inverse of the `Display` form: `disk(R=1,h=0.02)`,
    /// `polygon(h=0.05;0,0;1,0;1,1;0,1)` or `mesh(path)`.
    pub fn parse_recipe(s: &str) -> Result<DomainSpec, CliError> {
        let bad = || CliError::Input(format!("unrecognized domain recipe `{s}`"));
        let (kind, rest) = s.split_once('(').ok_or_else(bad)?;
        let body = rest.strip_suffix(')').ok_or_else(bad)?;
        match kind {
            "disk" => {
                let mut radius = None;
                let mut h = None;
                for part in body.split(',') {
                    match part.split_once('=') {
                        Some(("R", v)) => radius = Some(parse_f64(v)?),
                        Some(("h", v)) => h = Some(parse_f64(v)?),
                        _ => return Err(bad()),
                    }
                }
                Ok(DomainSpec::Disk {
                    radius: radius.ok_or_else(bad)?,
                    h: h.ok_or_else(bad)?,
                })
            }
            "polygon" => {
                let mut parts = body.split(';');
                let h = parts.next().and_then(|p| p.strip_prefix("h=")).ok_or_else(bad)?;
                let vertices = parts.map(parse_point).collect::<Result<Vec<_>, _>>()?;
                Ok(DomainSpec::Polygon {
                    vertices,
                    h: parse_f64(h)?,
                })
            }
            "mesh" => Ok(DomainSpec::MeshFile { path: PathBuf::from(body) }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `{}` prints the shortest string that parses back to the same f64.
        match self {
            DomainSpec::Disk { radius, h } => write!(f, "disk(R={radius},h={h})"),
            DomainSpec::Polygon { vertices, h } => {
                write!(f, "polygon(h={h}")?;
                for p in vertices {
                    write!(f, ";{},{}", p[0], p[1])?;
                }
                write!(f, ")")
            }
            DomainSpec::MeshFile { path } => write!(f, "mesh({})", path.display()),
        }
    }
}

pub fn parse_f64(s: &str) -> Result<f64, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Input(format!("`{s}` is not a number")))
}

/// `x,y`
pub fn parse_point(s: &str) -> Result<Point, CliError> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| CliError::Input(format!("expected a point `x,y`, got `{s}`")))?;
    Ok([parse_f64(x)?, parse_f64(y)?])
}

/// One vertex per line as `x y` or `x,y`; blank lines and `#` comments are skipped.
pub fn read_vertex_file(path: &Path) -> Result<Vec<Point>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|c| !c.is_empty()).collect();
        if cols.len() != 2 {
            return Err(CliError::Input(format!("{}: expected two coordinates per line, got `{line}`", path.display())));
        }
        out.push([parse_f64(cols[0])?, parse_f64(cols[1])?]);
    }
    Ok(out)
}
