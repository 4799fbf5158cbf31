//! Invariant checks behind `steklov verify`. Every check reports its measured
//! value against an allowed value, which `--tol NAME=VALUE` or the config
//! `[tol]` table may override.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;
use steklov_core::bergman::{bergman_project, TruncatedKernel};
use steklov_core::poisson::{extension_norm, poisson_kernel_slice, truncation_error_report};
use steklov_core::spectra::dbs_eigensolve;
use steklov_core::{FemSpace, Point, PoissonSvd, SpectralBasis};

use crate::args::{pick, positive_modes, ConfigFile, VerifyArgs, DEFAULT_MODES};
use crate::domain::parse_f64;
use crate::error::CliError;
use crate::output::emit_json;
use crate::space_for;

const SUITES: [&str; 3] = ["spectra", "bergman", "poisson"];

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub allowed: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    domain: String,
    h: Option<f64>,
    #[serde(rename = "M")]
    m: usize,
    suite: &'a str,
    checks: &'a [Check],
    passed: bool,
}

struct Checks {
    overrides: BTreeMap<String, f64>,
    used: Vec<String>,
    list: Vec<Check>,
}

impl Checks {
    fn record(&mut self, name: &str, measured: f64, default_allowed: f64) {
        let allowed = self.overrides.get(name).copied().unwrap_or(default_allowed);
        self.used.push(name.to_string());
        self.list.push(Check {
            name: name.to_string(),
            measured,
            allowed,
            // NaN fails.
            pass: measured <= allowed,
        });
    }
}

pub fn run(a: &VerifyArgs, config: &ConfigFile) -> Result<(), CliError> {
    let spec = a.domain.resolve(config)?;
    let m = positive_modes(pick(&a.modes, &config.modes).unwrap_or(DEFAULT_MODES))?;
    if m < 2 {
        return Err(CliError::Input("verify needs --modes of at least 2".into()));
    }
    let suite = pick(&a.suite, &config.suite).unwrap_or_else(|| "all".into());
    let selected: Vec<&str> = match suite.as_str() {
        "all" => SUITES.to_vec(),
        s if SUITES.contains(&s) => vec![s],
        other => return Err(CliError::Input(format!("unknown suite `{other}`; expected all, spectra, bergman or poisson"))),
    };
    let mut overrides = config.tol.clone();
    for item in &a.tol {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("--tol expects NAME=VALUE, got `{item}`")))?;
        overrides.insert(name.to_string(), parse_f64(value)?);
    }

    let space = space_for(&spec)?;
    let basis = dbs_eigensolve(&space, m)?;
    let mut checks = Checks {
        overrides,
        used: Vec::new(),
        list: Vec::new(),
    };
    let radius = spec.is_disk();
    for s in &selected {
        match *s {
            "spectra" => spectra_checks(&basis, radius, &mut checks),
            "bergman" => bergman_checks(&basis, radius, &mut checks)?,
            _ => poisson_checks(&basis, radius, &mut checks)?,
        }
    }
    if let Some(unknown) = checks.overrides.keys().find(|k| !checks.used.contains(k)) {
        return Err(CliError::Input(format!("--tol names an unknown check `{unknown}`")));
    }

    let failed = checks.list.iter().filter(|c| !c.pass).count();
    println!("verify {spec}: M={m}, suite={suite}");
    for c in &checks.list {
        println!(
            "{} {}: measured {:.3e}, allowed {:.3e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.allowed
        );
    }
    println!("{} of {} checks passed", checks.list.len() - failed, checks.list.len());
    if let Some(path) = pick(&a.out, &config.out) {
        let report = Report {
            domain: spec.to_string(),
            h: spec.h(),
            m,
            suite: &suite,
            checks: &checks.list,
            passed: failed == 0,
        };
        emit_json(Some(&path), &report)?;
    }
    if failed > 0 {
        return Err(CliError::Verification { failed });
    }
    Ok(())
}

fn spectra_checks(basis: &SpectralBasis, radius: Option<f64>, checks: &mut Checks) {
    let space = basis.space();
    let pairs = basis.pairs();
    let len = basis.boundary_length();
    let (mut gram_h, mut gram_w, mut trace, mut flux) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (i, a) in pairs.iter().enumerate() {
        for b in &pairs[i..] {
            let delta = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
            gram_h = gram_h.max((space.l2_inner(&a.h, &b.h) - delta).abs());
            gram_w = gram_w.max((space.boundary_inner(&a.w, &b.w) - delta).abs());
        }
        trace = trace.max(space.boundary_norm(&space.trace(&a.h).axpy(-(a.q / len).sqrt(), &a.w)));
        flux = flux.max((basis.flux_functional(&a.b, &a.h) * a.q - 1.0).abs());
    }
    checks.record("spectra.gram_h", gram_h, 1e-8);
    checks.record("spectra.gram_w", gram_w, 1e-8);
    checks.record("spectra.trace_identity", trace, 1e-6);
    checks.record("spectra.flux_functional", flux, 1e-6);
    let q = basis.q();
    let decrease = q.windows(2).map(|w| (w[0] - w[1]) / w[0]).fold(0.0, f64::max);
    checks.record("spectra.q_order", decrease, 1e-12);
    if let Some(r) = radius {
        // q = (2k + 2)/R with multiplicity 2 for k ≥ 1.
        let exact = (0..7.min(q.len())).map(|j| (2.0 * (j / 2 + j % 2) as f64 + 2.0) / r);
        let err = q.iter().zip(exact).map(|(a, b)| (a - b).abs() / b).fold(0.0, f64::max);
        checks.record("spectra.disk_eigenvalues", err, 2e-2);
    }
}

/// The centroid and points halfway from it to four boundary nodes spread
/// along the loop.
fn probe_points(space: &FemSpace) -> Vec<Point> {
    let c = space.mesh().centroid();
    let boundary = space.mesh().boundary_points();
    let mut out = vec![c];
    for i in 0..4 {
        let b = boundary[i * boundary.len() / 4];
        out.push([0.5 * (c[0] + b[0]), 0.5 * (c[1] + b[1])]);
    }
    out
}

fn bergman_checks(basis: &SpectralBasis, radius: Option<f64>, checks: &mut Checks) -> Result<(), CliError> {
    let space = basis.space();
    let f = space.interpolate(|p| (2.0 * p[0]).sin() * p[1] + p[0] * p[0] * p[1] * p[1]);
    let pf = bergman_project(&f, basis);
    let ppf = bergman_project(&pf, basis);
    let total = space.l2_inner(&f, &f);
    checks.record("bergman.idempotence", space.l2_norm(&ppf.axpy(-1.0, &pf)) / total.sqrt(), 1e-10);
    let rest = f.axpy(-1.0, &pf);
    let pyth = (total - space.l2_inner(&pf, &pf) - space.l2_inner(&rest, &rest)).abs() / total;
    checks.record("bergman.pythagoras", pyth, 1e-10);

    let kernel = TruncatedKernel::new(basis, basis.len())?;
    let polys: [fn(Point) -> f64; 4] = [|_| 1.0, |p| p[0], |p| p[0] * p[0] - p[1] * p[1], |p| p[0] * p[1]];
    let mut worst = 0.0f64;
    for k in polys {
        let field = space.interpolate(k);
        for x in probe_points(space) {
            worst = worst.max((kernel.apply(x, &field)? - k(x)).abs() / field.max_abs());
        }
    }
    checks.record("bergman.delta_property", worst, 2e-2);

    if let Some(r) = radius {
        // The harmonic part of r² on a centered disk is its mean R²/2.
        let f = space.interpolate(|p| p[0] * p[0] + p[1] * p[1]);
        let target = space.constant(r * r / 2.0);
        let err = space.l2_norm(&bergman_project(&f, basis).axpy(-1.0, &target)) / space.l2_norm(&target);
        checks.record("bergman.disk_projection", err, 2e-2);
    }
    Ok(())
}

fn poisson_checks(basis: &SpectralBasis, radius: Option<f64>, checks: &mut Checks) -> Result<(), CliError> {
    let space = basis.space();
    let svd = PoissonSvd::new(basis)?;
    let c = space.mesh().centroid();
    let mut worst_ratio = 0.0f64;
    for k in 0..10u32 {
        let (a, b) = (f64::from(k), 0.5 + f64::from(k % 3));
        let g = space.boundary_interpolate(|p| {
            let t = (p[1] - c[1]).atan2(p[0] - c[0]);
            (a * t).cos() + (b * t + 0.3).sin() + 0.1 * (7.0 * p[0]).sin()
        });
        let m = 1 + (k as usize * 7) % (basis.len() - 1);
        worst_ratio = worst_ratio.max(truncation_error_report(&g, &svd, m)?.ratio);
    }
    checks.record("poisson.truncation_ratio", worst_ratio, 1.0 + 1e-6);
    let mut tail = 0.0f64;
    for m in [1, basis.len() / 2, basis.len() - 1] {
        let ratio = truncation_error_report(&basis.pairs()[m].w, &svd, m)?.ratio;
        tail = tail.max((ratio - 1.0).abs());
    }
    checks.record("poisson.tail_mode_ratio", tail, 1e-6);

    if let Some(r) = radius {
        checks.record("poisson.disk_extension_norm", (extension_norm(&svd) / (r / 2.0).sqrt() - 1.0).abs(), 2e-2);
        let uniform = 1.0 / (2.0 * PI * r);
        let center = poisson_kernel_slice(&svd, basis.len(), [0.0, 0.0])?
            .into_iter()
            .map(|v| (v - uniform).abs() / uniform)
            .fold(0.0, f64::max);
        checks.record("poisson.disk_center_kernel", center, 1e-2);
    }
    Ok(())
}
