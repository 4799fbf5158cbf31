//! Command pipelines behind the `steklov` binary.

pub mod args;
pub mod domain;
pub mod error;
pub mod output;
pub mod verify;

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use clap::Parser;
use serde::Serialize;
use steklov_core::bergman::{biharmonic_potential, TruncatedKernel};
use steklov_core::mesh::write_mesh_text;
use steklov_core::poisson::{extend_harmonic_svd, kernel_slice_csv, truncation_error_report};
use steklov_core::spectra::{dbs_eigensolve, dirichlet_laplacian_eigensolve, harmonic_steklov_eigensolve};
use steklov_core::{BasisFile, BoundaryField, FemSpace, InteriorField, PoissonSvd, SpectralBasis};

use args::{
    pick, positive_modes, required, Cli, Command, ConfigFile, ExtendArgs, KernelArgs, MeshArgs, ProjectArgs, SolveArgs,
    DEFAULT_MODES,
};
use domain::{parse_f64, parse_point, DomainSpec};
pub use error::CliError;
use output::{emit, emit_json};

/// Parses `argv` and runs the selected command. Returns the process exit
/// status: 0 on success, 2 when a verification check fails, 1 otherwise.
pub fn main_with_args<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let config = ConfigFile::load(cli.config.as_deref())?;
    match cli.command {
        Command::Mesh(a) => mesh(&a, &config),
        Command::Dbs(a) => dbs(&a, &config),
        Command::Steklov(a) => steklov(&a, &config),
        Command::LaplaceEigs(a) => laplace_eigs(&a, &config),
        Command::Kernel(a) => kernel(&a, &config),
        Command::Extend(a) => extend(&a, &config),
        Command::Project(a) => project(&a, &config),
        Command::Verify(a) => verify::run(&a, &config),
    }
}

fn space_for(spec: &DomainSpec) -> Result<Arc<FemSpace>, CliError> {
    Ok(Arc::new(FemSpace::new(spec.build()?)?))
}

fn mesh(a: &MeshArgs, config: &ConfigFile) -> Result<(), CliError> {
    let spec = a.domain.resolve(config)?;
    let mesh = spec.build()?;
    eprintln!(
        "mesh {spec}: {} nodes ({} on the boundary), {} triangles, max edge {:.4}",
        mesh.vertex_count(),
        mesh.boundary_count(),
        mesh.triangles().len(),
        mesh.max_edge_length()
    );
    emit(pick(&a.out, &config.out).as_deref(), write_mesh_text(&mesh).as_bytes())
}

fn solve_modes(a: &SolveArgs, config: &ConfigFile) -> Result<usize, CliError> {
    positive_modes(pick(&a.modes, &config.modes).unwrap_or(DEFAULT_MODES))
}

fn dbs(a: &SolveArgs, config: &ConfigFile) -> Result<(), CliError> {
    let spec = a.domain.resolve(config)?;
    let m = solve_modes(a, config)?;
    let space = space_for(&spec)?;
    let basis = dbs_eigensolve(&space, m)?;
    let q = basis.q();
    eprintln!("dbs {spec}: M={m}, q[0..{}] = {:?}", q.len().min(5), &q[..q.len().min(5)]);
    let json = BasisFile::from_basis(&basis, &spec.to_string()).to_json()?;
    emit(pick(&a.out, &config.out).as_deref(), json.as_bytes())
}

/// Echoed run parameters, flattened into every JSON output without a fixed schema.
#[derive(Serialize)]
struct Meta {
    domain: String,
    h: Option<f64>,
    #[serde(rename = "M")]
    m: usize,
}

fn steklov(a: &SolveArgs, config: &ConfigFile) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Out<'a> {
        #[serde(flatten)]
        meta: Meta,
        delta: Vec<f64>,
        s: Vec<&'a [f64]>,
    }
    let spec = a.domain.resolve(config)?;
    let m = solve_modes(a, config)?;
    let space = space_for(&spec)?;
    let pairs = harmonic_steklov_eigensolve(&space, m)?;
    eprintln!("steklov {spec}: M={m}");
    let out = Out {
        meta: Meta { domain: spec.to_string(), h: spec.h(), m },
        delta: pairs.iter().map(|p| p.delta).collect(),
        s: pairs.iter().map(|p| p.s.0.as_slice()).collect(),
    };
    emit_json(pick(&a.out, &config.out).as_deref(), &out)
}

fn laplace_eigs(a: &SolveArgs, config: &ConfigFile) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Out<'a> {
        #[serde(flatten)]
        meta: Meta,
        lambda: Vec<f64>,
        e: Vec<&'a [f64]>,
        flux: Vec<&'a [f64]>,
    }
    let spec = a.domain.resolve(config)?;
    let m = solve_modes(a, config)?;
    let space = space_for(&spec)?;
    let pairs = dirichlet_laplacian_eigensolve(&space, m)?;
    eprintln!("laplace-eigs {spec}: M={m}, lambda[0] = {}", pairs[0].lambda);
    let out = Out {
        meta: Meta { domain: spec.to_string(), h: spec.h(), m },
        lambda: pairs.iter().map(|p| p.lambda).collect(),
        e: pairs.iter().map(|p| p.e.0.as_slice()).collect(),
        flux: pairs.iter().map(|p| p.flux.0.as_slice()).collect(),
    };
    emit_json(pick(&a.out, &config.out).as_deref(), &out)
}

/// Reads a basis file and rebuilds its mesh from the stored domain recipe.
pub fn load_basis(path: &Path) -> Result<(SpectralBasis, DomainSpec), CliError> {
    let file = BasisFile::read(path)?;
    let spec = DomainSpec::parse_recipe(&file.domain)?;
    let space = space_for(&spec)?;
    Ok((file.into_basis(space)?, spec))
}

/// Explicit `--modes`, else min(40, `cap`).
fn modes_within(flag: &Option<usize>, config: &ConfigFile, cap: usize) -> Result<usize, CliError> {
    positive_modes(pick(flag, &config.modes).unwrap_or(DEFAULT_MODES.min(cap)))
}

fn kernel(a: &KernelArgs, config: &ConfigFile) -> Result<(), CliError> {
    let (basis, spec) = load_basis(&required(&a.basis, &config.basis, "basis")?)?;
    let x = parse_point(&required(&a.x, &config.x, "x")?)?;
    let m = modes_within(&a.modes, config, basis.len())?;
    let kind = pick(&a.kind, &config.kind).unwrap_or_else(|| "poisson".into());
    let csv = match kind.as_str() {
        "poisson" => kernel_slice_csv(&PoissonSvd::new(&basis)?, m, x)?,
        "bergman" => TruncatedKernel::new(&basis, m)?.grid_csv(x)?,
        other => return Err(CliError::Input(format!("unknown kernel kind `{other}`; expected poisson or bergman"))),
    };
    eprintln!("kernel {spec}: kind={kind}, M={m}, x=({},{})", x[0], x[1]);
    emit(pick(&a.out, &config.out).as_deref(), csv.as_bytes())
}

/// `const`, `cos:K`, `sin:K` with the angle measured about the mesh
/// centroid, or `file:PATH` with one value per boundary node in loop order.
fn boundary_function(spec: &str, space: &FemSpace) -> Result<BoundaryField, CliError> {
    let c = space.mesh().centroid();
    let angle = move |p: [f64; 2]| (p[1] - c[1]).atan2(p[0] - c[0]);
    let order = |k: &str| {
        k.parse::<u32>()
            .map(f64::from)
            .map_err(|_| CliError::Input(format!("bad frequency in `{spec}`")))
    };
    let field = match spec.split_once(':') {
        None if spec == "const" => space.boundary_interpolate(|_| 1.0),
        Some(("cos", k)) => {
            let k = order(k)?;
            space.boundary_interpolate(|p| (k * angle(p)).cos())
        }
        Some(("sin", k)) => {
            let k = order(k)?;
            space.boundary_interpolate(|p| (k * angle(p)).sin())
        }
        Some(("file", path)) => BoundaryField(read_values(Path::new(path), space.boundary_count())?),
        _ => return Err(CliError::Input(format!("unknown boundary function `{spec}`"))),
    };
    Ok(field)
}

/// Named interior functions in absolute coordinates, or `file:PATH` with one
/// value per mesh vertex.
fn interior_function(spec: &str, space: &FemSpace) -> Result<InteriorField, CliError> {
    let f: fn([f64; 2]) -> f64 = match spec {
        "one" => |_| 1.0,
        "x" => |p| p[0],
        "y" => |p| p[1],
        "xy" => |p| p[0] * p[1],
        "x2-y2" => |p| p[0] * p[0] - p[1] * p[1],
        "r2" => |p| p[0] * p[0] + p[1] * p[1],
        "r2-1" => |p| p[0] * p[0] + p[1] * p[1] - 1.0,
        _ => match spec.strip_prefix("file:") {
            Some(path) => return Ok(InteriorField(read_values(Path::new(path), space.vertex_count())?)),
            None => return Err(CliError::Input(format!("unknown interior function `{spec}`"))),
        },
    };
    Ok(space.interpolate(f))
}

/// One number per line; an optional non-numeric header line is skipped.
fn read_values(path: &Path, expected: usize) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty()).peekable();
    if lines.peek().is_some_and(|l| l.parse::<f64>().is_err()) {
        lines.next();
    }
    let values = lines.map(parse_f64).collect::<Result<Vec<_>, _>>()?;
    if values.len() != expected {
        return Err(CliError::Input(format!("{}: expected {expected} values, found {}", path.display(), values.len())));
    }
    Ok(values)
}

fn field_csv(space: &FemSpace, field: &InteriorField) -> String {
    let mut s = String::from("x,y,value\n");
    for (p, v) in space.mesh().vertices().iter().zip(&field.0) {
        let _ = writeln!(s, "{},{},{}", p[0], p[1], v);
    }
    s
}

fn extend(a: &ExtendArgs, config: &ConfigFile) -> Result<(), CliError> {
    let (basis, spec) = load_basis(&required(&a.basis, &config.basis, "basis")?)?;
    let space = basis.space();
    let g_spec = pick(&a.g, &config.g).unwrap_or_else(|| "cos:1".into());
    let g = boundary_function(&g_spec, space)?;
    let m = modes_within(&a.modes, config, basis.len().saturating_sub(1))?;
    let svd = PoissonSvd::new(&basis)?;
    let report = truncation_error_report(&g, &svd, m)?;
    eprintln!("extend {spec}: g={g_spec}, M={m}, error={:e}, bound={:e}, ratio={}", report.error, report.bound, report.ratio);
    if let Some(path) = pick(&a.field_out, &config.field_out) {
        let field = extend_harmonic_svd(&g, &svd, m)?;
        emit(Some(&path), field_csv(space, &field).as_bytes())?;
    }
    emit(pick(&a.out, &config.out).as_deref(), report.to_json()?.as_bytes())
}

fn project(a: &ProjectArgs, config: &ConfigFile) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Out<'a> {
        #[serde(flatten)]
        meta: Meta,
        f: String,
        coefficients: Vec<f64>,
        relative_flux: f64,
        projection_change: f64,
        converged: bool,
        harmonic: &'a [f64],
        potential: &'a [f64],
    }
    let (basis, spec) = load_basis(&required(&a.basis, &config.basis, "basis")?)?;
    let m = modes_within(&a.modes, config, basis.len())?;
    if m > basis.len() {
        return Err(steklov_core::Error::Capacity { requested: m, available: basis.len() }.into());
    }
    let basis = basis.truncated(m);
    let f_spec = pick(&a.f, &config.f).unwrap_or_else(|| "r2-1".into());
    let f = interior_function(&f_spec, basis.space())?;
    let d = biharmonic_potential(&f, &basis);
    eprintln!(
        "project {spec}: f={f_spec}, M={m}, relative flux {:e}, converged {}",
        d.relative_flux, d.converged
    );
    let out = Out {
        meta: Meta { domain: spec.to_string(), h: spec.h(), m },
        f: f_spec,
        coefficients: basis.coefficients(&f),
        relative_flux: d.relative_flux,
        projection_change: d.projection_change,
        converged: d.converged,
        harmonic: &d.harmonic.0,
        potential: &d.potential.0,
    };
    emit_json(pick(&a.out, &config.out).as_deref(), &out)
}
