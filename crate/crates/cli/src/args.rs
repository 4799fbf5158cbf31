//! Flags, the optional TOML config file and their merge. Config keys use the
//! flag names; a flag on the command line wins over the file, which wins
//! over the built-in default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::domain::{read_vertex_file, DomainSpec};
use crate::error::CliError;

pub const DEFAULT_MODES: usize = 40;
pub const DEFAULT_H: f64 = 0.02;
pub const DEFAULT_RADIUS: f64 = 1.0;

#[derive(Debug, Parser)]
#[command(name = "steklov", version, about = "DBS eigenpairs, harmonic Bergman kernels and Poisson extension on planar domains")]
pub struct Cli {
    /// TOML file supplying defaults for any flag (same key names as the flags).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a mesh and write it in the text format.
    Mesh(MeshArgs),
    /// Solve for DBS eigenpairs and write the basis JSON.
    Dbs(SolveArgs),
    /// Solve the harmonic Steklov problem.
    Steklov(SolveArgs),
    /// Dirichlet Laplacian eigenpairs with their boundary fluxes.
    LaplaceEigs(SolveArgs),
    /// Slice of the truncated Poisson kernel, or the Bergman kernel on the mesh.
    Kernel(KernelArgs),
    /// Truncated harmonic extension of a boundary function with its error report.
    Extend(ExtendArgs),
    /// Bergman projection and biharmonic potential of an interior function.
    Project(ProjectArgs),
    /// Run invariant checks and report pass/fail for each.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct DomainArgs {
    /// `disk`, `polygon` (with --vertices) or `mesh` (with --mesh).
    #[arg(long)]
    pub domain: Option<String>,
    /// Disk radius.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Polygon vertex file, one `x y` pair per line, counterclockwise.
    #[arg(long)]
    pub vertices: Option<PathBuf>,
    /// Mesh file in the text format.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Target mesh spacing.
    #[arg(long)]
    pub h: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct MeshArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Number of modes.
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    /// Basis JSON written by `dbs`.
    #[arg(long)]
    pub basis: Option<PathBuf>,
    /// Interior point `x,y`.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Modes to use; defaults to min(40, modes in the basis).
    #[arg(long)]
    pub modes: Option<usize>,
    /// `poisson` (boundary slice, `z_arclength,value`) or `bergman` (mesh grid, `x,y,value`).
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExtendArgs {
    #[arg(long)]
    pub basis: Option<PathBuf>,
    /// Boundary function: `const`, `cos:K`, `sin:K` (angle about the centroid) or `file:PATH`.
    #[arg(long)]
    pub g: Option<String>,
    /// Truncation rank; defaults to min(40, modes in the basis − 1).
    #[arg(long)]
    pub modes: Option<usize>,
    /// Truncation report JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional CSV `x,y,value` of the truncated extension.
    #[arg(long)]
    pub field_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    pub basis: Option<PathBuf>,
    /// Interior function: `one`, `x`, `y`, `xy`, `x2-y2`, `r2`, `r2-1` or `file:PATH`.
    #[arg(long)]
    pub f: Option<String>,
    /// Modes to use; defaults to min(40, modes in the basis).
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    /// `all`, `spectra`, `bergman` or `poisson`.
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long)]
    pub modes: Option<usize>,
    /// Report JSON; the pass/fail lines always go to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override an allowed value, e.g. `--tol spectra.gram_h=1e-6`; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub domain: Option<String>,
    pub radius: Option<f64>,
    pub vertices: Option<PathBuf>,
    pub mesh: Option<PathBuf>,
    pub h: Option<f64>,
    pub modes: Option<usize>,
    pub out: Option<PathBuf>,
    pub basis: Option<PathBuf>,
    pub x: Option<String>,
    pub kind: Option<String>,
    pub g: Option<String>,
    pub f: Option<String>,
    pub field_out: Option<PathBuf>,
    pub suite: Option<String>,
    #[serde(default)]
    pub tol: BTreeMap<String, f64>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<ConfigFile, CliError> {
        match path {
            None => Ok(ConfigFile::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Input(format!("cannot read config {}: {e}", p.display())))?;
                Ok(toml::from_str(&text)?)
            }
        }
    }
}

pub fn pick<T: Clone>(flag: &Option<T>, config: &Option<T>) -> Option<T> {
    flag.clone().or_else(|| config.clone())
}

pub fn required<T: Clone>(flag: &Option<T>, config: &Option<T>, name: &str) -> Result<T, CliError> {
    pick(flag, config).ok_or_else(|| CliError::Input(format!("missing required option --{name}")))
}

pub fn positive_modes(m: usize) -> Result<usize, CliError> {
    if m == 0 {
        return Err(CliError::Input("--modes must be at least 1".into()));
    }
    Ok(m)
}

impl DomainArgs {
    pub fn resolve(&self, config: &ConfigFile) -> Result<DomainSpec, CliError> {
        let kind = pick(&self.domain, &config.domain).unwrap_or_else(|| "disk".into());
        let h = pick(&self.h, &config.h).unwrap_or(DEFAULT_H);
        if !(h > 0.0 && h.is_finite()) {
            return Err(CliError::Input(format!("--h must be positive, got {h}")));
        }
        match kind.as_str() {
            "disk" => Ok(DomainSpec::Disk {
                radius: pick(&self.radius, &config.radius).unwrap_or(DEFAULT_RADIUS),
                h,
            }),
            "polygon" => {
                let path = required(&self.vertices, &config.vertices, "vertices")?;
                Ok(DomainSpec::Polygon {
                    vertices: read_vertex_file(&path)?,
                    h,
                })
            }
            "mesh" => Ok(DomainSpec::MeshFile {
                path: required(&self.mesh, &config.mesh, "mesh")?,
            }),
            other => Err(CliError::Input(format!("unknown domain `{other}`; expected disk, polygon or mesh"))),
        }
    }
}
