//! Singular value decomposition of the harmonic extension (Poisson) operator.
//!
//! With `ĝ_j = ⟨g, w_j⟩_∂Ω` the extension is
//! `E g = √|∂Ω| Σ ĝ_j q_j^{-1/2} h_j`, so from `L²(∂Ω, dσ)` to `L²(Ω)` the
//! singular values are `1/√q_j`, with right vectors `w_j / √|∂Ω|` and left
//! vectors `h_j`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::bergman::{expand, mode_values_at};
use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::solver::{BoundaryField, InteriorField};
use crate::spectra::SpectralBasis;

#[derive(Debug, Clone, Copy)]
pub struct PoissonSvd<'a> {
    basis: &'a SpectralBasis,
}

impl<'a> PoissonSvd<'a> {
    pub fn new(basis: &'a SpectralBasis) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::Capacity {
                requested: 1,
                available: 0,
            });
        }
        Ok(PoissonSvd { basis })
    }

    pub fn basis(&self) -> &'a SpectralBasis {
        self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// `1/√q_j`: singular values for `L²(∂Ω, dσ) → L²(Ω)`.
    pub fn singular_values(&self) -> Vec<f64> {
        self.basis.pairs().iter().map(|p| 1.0 / p.q.sqrt()).collect()
    }

    /// `√(|∂Ω|/q_j)`: singular values when the boundary carries the
    /// normalized measure `dσ/|∂Ω|`.
    pub fn singular_values_normalized(&self) -> Vec<f64> {
        let len = self.basis.boundary_length();
        self.basis.pairs().iter().map(|p| (len / p.q).sqrt()).collect()
    }

    fn check_rank(&self, m: usize) -> Result<()> {
        if m > self.rank() {
            return Err(Error::Capacity {
                requested: m,
                available: self.rank(),
            });
        }
        Ok(())
    }
}

/// `E_M g = √|∂Ω| Σ_{j≤M} ĝ_j q_j^{-1/2} h_j`.
pub fn extend_harmonic_svd(g: &BoundaryField, svd: &PoissonSvd<'_>, m: usize) -> Result<InteriorField> {
    svd.check_rank(m)?;
    let basis = svd.basis;
    let len = basis.boundary_length().sqrt();
    let coeffs: Vec<f64> = basis
        .boundary_coefficients(g)
        .iter()
        .zip(basis.pairs())
        .take(m)
        .map(|(c, p)| len * c / p.q.sqrt())
        .collect();
    Ok(expand(&coeffs, basis))
}

/// `P_M(x, z) = Σ_{j≤M} (|∂Ω| q_j)^{-1/2} h_j(x) w_j(z)` for a boundary node
/// with loop position `z`. `x` must keep the largest element diameter from
/// the boundary.
pub fn poisson_kernel_eval(svd: &PoissonSvd<'_>, m: usize, x: Point, z: usize) -> Result<f64> {
    Ok(poisson_kernel_slice(svd, m, x)?[z])
}

/// `P_M(x, z)` for every boundary node `z`, in loop order.
pub fn poisson_kernel_slice(svd: &PoissonSvd<'_>, m: usize, x: Point) -> Result<Vec<f64>> {
    svd.check_rank(m)?;
    if m == 0 {
        return Err(Error::param("M", "must be at least 1"));
    }
    let margin = svd.basis.space().mesh().max_edge_length();
    let hx = mode_values_at(svd.basis, x, margin)?;
    let len = svd.basis.boundary_length();
    let mut out = vec![0.0; svd.basis.space().boundary_count()];
    for (hj, p) in hx.iter().zip(svd.basis.pairs()).take(m) {
        let a = hj / (len * p.q).sqrt();
        out.iter_mut().zip(&p.w.0).for_each(|(o, w)| *o += a * w);
    }
    Ok(out)
}

/// CSV with header `z_arclength,value` for `P_M(x, ·)` along the boundary.
pub fn kernel_slice_csv(svd: &PoissonSvd<'_>, m: usize, x: Point) -> Result<String> {
    let values = poisson_kernel_slice(svd, m, x)?;
    let arclength = svd.basis.space().mesh().boundary_arclength();
    let mut s = String::from("z_arclength,value\n");
    for (a, v) in arclength.iter().zip(values) {
        let _ = writeln!(s, "{a},{v}");
    }
    Ok(s)
}

/// `‖E_H‖ = 1/√q₁` from `L²(∂Ω, dσ)` to `L²(Ω)`.
pub fn extension_norm(svd: &PoissonSvd<'_>) -> f64 {
    1.0 / svd.basis.pairs()[0].q.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationReport {
    #[serde(rename = "M")]
    pub m: usize,
    /// `‖E g − E_M g‖` with `E` the finite element harmonic extension.
    pub error: f64,
    /// `√(|∂Ω|/q_{M+1}) ‖g − g_M‖_∂Ω`
    pub bound: f64,
    /// `error / bound`, or 0 when there is no tail.
    pub ratio: f64,
    pub norm_convention: &'static str,
}

impl TruncationReport {
    pub fn to_json(&self) -> Result<String> {
        crate::json::to_string(self)
    }
}

/// Compares the rank-`M` extension with the finite element harmonic extension
/// on the same mesh, so only truncation error is measured.
pub fn truncation_error_report(g: &BoundaryField, svd: &PoissonSvd<'_>, m: usize) -> Result<TruncationReport> {
    if m + 1 > svd.rank() {
        return Err(Error::Capacity {
            requested: m + 1,
            available: svd.rank(),
        });
    }
    let space = svd.basis.space();
    let exact = space.harmonic_extension(g);
    let approx = extend_harmonic_svd(g, svd, m)?;
    let error = space.l2_norm(&exact.axpy(-1.0, &approx));

    let pairs = svd.basis.pairs();
    let mut g_m = BoundaryField::zeros(space.boundary_count());
    for (c, p) in svd.basis.boundary_coefficients(g).iter().zip(pairs).take(m) {
        g_m = g_m.axpy(*c, &p.w);
    }
    let tail = space.boundary_norm(&g.axpy(-1.0, &g_m));
    let factor = (svd.basis.boundary_length() / pairs[m].q).sqrt();
    let bound = factor * tail;
    let negligible = 1e-12 * factor * space.boundary_norm(g);
    let ratio = if bound <= negligible { 0.0 } else { error / bound };
    Ok(TruncationReport {
        m,
        error,
        bound,
        ratio,
        norm_convention: "dsigma",
    })
}
