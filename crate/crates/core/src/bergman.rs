//! Harmonic Bergman space constructions built on a [`SpectralBasis`]: the
//! projection onto harmonic fields, the truncated reproducing kernel,
//! biharmonic potentials and the harmonic trace.
//!
//! The Laplacians `h_j = Δb_j` of the DBS eigenfields form an orthonormal
//! basis of the harmonic fields, so the projection is the truncated
//! expansion `𝒫_H f = Σ ⟨f, h_j⟩ h_j` and the kernel is
//! `R_M(x, y) = Σ h_j(x) h_j(y)`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::solver::{BoundaryField, InteriorField};
use crate::spectra::SpectralBasis;

/// `Σ ⟨f, h_j⟩ h_j` over the whole basis.
pub fn bergman_project(f: &InteriorField, basis: &SpectralBasis) -> InteriorField {
    expand(&basis.coefficients(f), basis)
}

/// `Σ c_j h_j`.
pub fn expand(coeffs: &[f64], basis: &SpectralBasis) -> InteriorField {
    let mut out = InteriorField::zeros(basis.space().vertex_count());
    for (c, p) in coeffs.iter().zip(basis.pairs()) {
        out = out.axpy(*c, &p.h);
    }
    out
}

/// Values `h_j(x)` of every basis field at an interior point, by linear
/// interpolation. Points outside the mesh or closer than `margin` to the
/// boundary are rejected.
pub(crate) fn mode_values_at(basis: &SpectralBasis, x: Point, margin: f64) -> Result<Vec<f64>> {
    let mesh = basis.space().mesh();
    let Some((t, l)) = mesh.locate(x) else {
        return Err(Error::OutsideDomain {
            x: x[0],
            y: x[1],
            reason: "point is not inside the mesh".into(),
        });
    };
    let d = mesh.distance_to_boundary(x);
    if d < margin {
        return Err(Error::OutsideDomain {
            x: x[0],
            y: x[1],
            reason: format!("distance {d:.3e} to the boundary is below the margin {margin:.3e}"),
        });
    }
    let tri = mesh.triangles()[t];
    Ok(basis
        .pairs()
        .iter()
        .map(|p| l[0] * p.h.0[tri[0]] + l[1] * p.h.0[tri[1]] + l[2] * p.h.0[tri[2]])
        .collect())
}

/// Rank-`M` truncation of the reproducing kernel of the harmonic Bergman space.
#[derive(Debug, Clone)]
pub struct TruncatedKernel<'a> {
    basis: &'a SpectralBasis,
    rank: usize,
    margin: f64,
}

impl<'a> TruncatedKernel<'a> {
    /// Uses the first `m` modes of `basis`. The evaluation margin defaults to
    /// the largest element diameter.
    pub fn new(basis: &'a SpectralBasis, m: usize) -> Result<Self> {
        if m == 0 || m > basis.len() {
            return Err(Error::Capacity {
                requested: m,
                available: basis.len(),
            });
        }
        let margin = basis.space().mesh().max_edge_length();
        Ok(TruncatedKernel { basis, rank: m, margin })
    }

    pub fn with_margin(mut self, margin: f64) -> Result<Self> {
        if !(margin >= 0.0) {
            return Err(Error::param("margin", format!("must be non-negative, got {margin}")));
        }
        self.margin = margin;
        Ok(self)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// `(h_1(x), …, h_M(x))`; reuse it when evaluating many kernel values at `x`.
    pub fn features(&self, x: Point) -> Result<Vec<f64>> {
        let mut v = mode_values_at(self.basis, x, self.margin)?;
        v.truncate(self.rank);
        Ok(v)
    }

    pub fn eval(&self, x: Point, y: Point) -> Result<f64> {
        let fx = self.features(x)?;
        let fy = self.features(y)?;
        Ok(fx.iter().zip(&fy).map(|(a, b)| a * b).sum())
    }

    /// `R_M(x, ·)` as a field on the mesh vertices.
    pub fn section(&self, x: Point) -> Result<InteriorField> {
        Ok(expand(&self.features(x)?, self.basis))
    }

    /// `∫ R_M(x, y) k(y) dy`; reproduces `k(x)` for harmonic `k` as `M` grows.
    pub fn apply(&self, x: Point, k: &InteriorField) -> Result<f64> {
        let fx = self.features(x)?;
        Ok(fx.iter().zip(self.basis.coefficients(k)).map(|(a, c)| a * c).sum())
    }

    /// Gram matrix `R_M(x_i, x_j)`, row-major.
    pub fn gram(&self, points: &[Point]) -> Result<Vec<Vec<f64>>> {
        let feats = points.iter().map(|&p| self.features(p)).collect::<Result<Vec<_>>>()?;
        Ok(feats
            .iter()
            .map(|a| feats.iter().map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum()).collect())
            .collect())
    }

    /// CSV with header `x,y,value` listing `R_M(x, ·)` at every mesh vertex.
    pub fn grid_csv(&self, x: Point) -> Result<String> {
        let section = self.section(x)?;
        let mut s = String::from("x,y,value\n");
        for (p, v) in self.basis.space().mesh().vertices().iter().zip(&section.0) {
            let _ = writeln!(s, "{},{},{}", p[0], p[1], v);
        }
        Ok(s)
    }
}

/// `R_M(x, y)` using every mode of `basis` and the default margin.
pub fn reproducing_kernel_eval(basis: &SpectralBasis, x: Point, y: Point) -> Result<f64> {
    TruncatedKernel::new(basis, basis.len())?.eval(x, y)
}

/// Relative flux tolerance for accepting a biharmonic potential.
pub const POTENTIAL_FLUX_TOL: f64 = 1e-2;

/// `f = 𝒫_H f + Δψ̃` with `ψ̃` zero on the boundary.
#[derive(Debug, Clone)]
pub struct BergmanDecomposition {
    pub harmonic: InteriorField,
    pub potential: InteriorField,
    /// `Δψ̃ = f − 𝒫_H f`
    pub remainder: InteriorField,
    /// `‖D_ν ψ̃‖_∂Ω / ‖f‖`; vanishes when the basis captures the harmonic part.
    pub relative_flux: f64,
    /// `‖𝒫_M f − 𝒫_{M−5} f‖ / ‖f‖`, the change over the last five modes.
    pub projection_change: f64,
    pub converged: bool,
}

/// Splits `f` into its harmonic projection and the Laplacian of its biharmonic
/// potential. The potential should have zero flux; the decomposition is
/// marked as not converged when the relative flux or the change over the last
/// five modes exceeds [`POTENTIAL_FLUX_TOL`].
pub fn biharmonic_potential(f: &InteriorField, basis: &SpectralBasis) -> BergmanDecomposition {
    let space = basis.space();
    let coeffs = basis.coefficients(f);
    let harmonic = expand(&coeffs, basis);
    let remainder = f.axpy(-1.0, &harmonic);
    let potential = space.solve_dirichlet_poisson(&remainder, &BoundaryField::zeros(space.boundary_count()));
    let flux = space.normal_flux(&potential, &remainder);
    let scale = space.l2_norm(f);
    let (relative_flux, projection_change) = if scale > 0.0 {
        let tail: f64 = coeffs.iter().skip(coeffs.len().saturating_sub(5)).map(|c| c * c).sum();
        (space.boundary_norm(&flux) / scale, tail.sqrt() / scale)
    } else {
        (0.0, 0.0)
    };
    BergmanDecomposition {
        harmonic,
        potential,
        remainder,
        relative_flux,
        projection_change,
        converged: relative_flux <= POTENTIAL_FLUX_TOL && projection_change <= POTENTIAL_FLUX_TOL,
    }
}

/// Coefficient tail tolerance for boundary expansions.
pub const TAIL_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct NeumannExtension {
    /// `b̃ = Σ √(q_j|∂Ω|) η̂_j b_j`: zero trace, flux `η`, minimal `‖Δb̃‖`.
    pub field: InteriorField,
    pub laplacian: InteriorField,
    /// `‖Δb̃‖² = |∂Ω| Σ q_j η̂_j²`
    pub delta_norm_sq: f64,
    /// `1 − Σ η̂_j² / ‖η‖²_∂Ω`
    pub tail: f64,
    pub truncated: bool,
}

pub fn neumann_biharmonic_extension(eta: &BoundaryField, basis: &SpectralBasis) -> NeumannExtension {
    let space = basis.space();
    let len = basis.boundary_length();
    let coeffs = basis.boundary_coefficients(eta);
    let mut field = InteriorField::zeros(space.vertex_count());
    let mut laplacian = InteriorField::zeros(space.vertex_count());
    let mut delta_norm_sq = 0.0;
    let mut captured = 0.0;
    for (c, p) in coeffs.iter().zip(basis.pairs()) {
        let a = (p.q * len).sqrt() * c;
        field = field.axpy(a, &p.b);
        laplacian = laplacian.axpy(a, &p.h);
        delta_norm_sq += len * p.q * c * c;
        captured += c * c;
    }
    let total = space.boundary_inner(eta, eta);
    let tail = if total > 0.0 { ((total - captured) / total).max(0.0) } else { 0.0 };
    NeumannExtension {
        field,
        laplacian,
        delta_norm_sq,
        tail,
        truncated: tail > TAIL_TOL,
    }
}

/// `γ_H(k) = |∂Ω|^{-1/2} Σ √q_j k̂_j w_j` for a harmonic field with coefficients `k̂_j`.
pub fn harmonic_trace(k_coeffs: &[f64], basis: &SpectralBasis) -> Result<BoundaryField> {
    if k_coeffs.len() > basis.len() {
        return Err(Error::Capacity {
            requested: k_coeffs.len(),
            available: basis.len(),
        });
    }
    let inv_len = 1.0 / basis.boundary_length().sqrt();
    let mut out = BoundaryField::zeros(basis.space().boundary_count());
    for (c, p) in k_coeffs.iter().zip(basis.pairs()) {
        out = out.axpy(inv_len * p.q.sqrt() * c, &p.w);
    }
    Ok(out)
}
