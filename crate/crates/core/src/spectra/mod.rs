//! Eigensolvers for the Dirichlet biharmonic Steklov (DBS) problem, the
//! harmonic Steklov (Dirichlet-to-Neumann) problem and the Dirichlet
//! Laplacian, plus the spectral quantities derived from them.
//!
//! The DBS problem is solved on the boundary. With `E` the discrete harmonic
//! extension, `M` the mass matrix and `W` the lumped boundary mass, the
//! operator `T` of [`FemSpace::t_apply`] satisfies `W T = Eᵀ M E`, so DBS
//! eigenvalues are the reciprocals of the generalized eigenvalues of
//! `(Eᵀ M E, W)`. The largest of those give the smallest `q`, which is the
//! same ordering produced by successively maximizing `∫_∂Ω |D_ν b|² dσ`
//! over Δ-unit fields orthogonal to the earlier maximizers.

mod io;
pub mod lanczos;

use std::sync::Arc;

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::solver::{dot, BoundaryField, FemSpace, InteriorField};
use lanczos::{largest_eigenpairs, LanczosOptions, SymmetricOperator};

pub use io::BasisFile;

/// Problems at or below this many unknowns use a dense symmetric eigensolve.
pub const DENSE_LIMIT: usize = 2000;

/// Relative gap below which neighboring eigenvalues are treated as one cluster.
pub const CLUSTER_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenStrategy {
    /// Dense when the problem size is at most [`DENSE_LIMIT`], Lanczos above.
    #[default]
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Default)]
pub struct EigenOptions {
    pub strategy: EigenStrategy,
    pub lanczos: LanczosOptions,
}

impl EigenOptions {
    fn use_dense(&self, n: usize) -> bool {
        match self.strategy {
            EigenStrategy::Auto => n <= DENSE_LIMIT,
            EigenStrategy::Dense => true,
            EigenStrategy::Lanczos => false,
        }
    }
}

/// One DBS eigenpair `(q, b, h = Δb, w = √(q|∂Ω|) D_ν b)`.
#[derive(Debug, Clone)]
pub struct DbsEigenpair {
    pub q: f64,
    /// Zero-trace biharmonic field, normalized so that `‖Δb‖ = 1`.
    pub b: InteriorField,
    /// `Δb`: an L²-normalized discrete harmonic field.
    pub h: InteriorField,
    /// Boundary function, orthonormal in `⟨·,·⟩_∂Ω`.
    pub w: BoundaryField,
}

/// DBS eigenpairs sorted by ascending `q`, tied to the discretization they came from.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    space: Arc<FemSpace>,
    pairs: Vec<DbsEigenpair>,
}

#[derive(Debug, Clone)]
pub struct HarmonicSteklovPair {
    pub delta: f64,
    /// Discrete harmonic field with `⟨γ(s), γ(s)⟩_∂Ω = 1`.
    pub s: InteriorField,
}

#[derive(Debug, Clone)]
pub struct DirichletEigenpair {
    pub lambda: f64,
    /// Zero-trace field with `‖e‖ = 1`.
    pub e: InteriorField,
    /// Consistent normal flux `D_ν e`.
    pub flux: BoundaryField,
}

impl SpectralBasis {
    /// Wraps precomputed pairs; they must be sorted by `q` and sized for `space`.
    pub fn from_pairs(space: Arc<FemSpace>, pairs: Vec<DbsEigenpair>) -> Result<Self> {
        for (j, p) in pairs.iter().enumerate() {
            if p.b.len() != space.vertex_count() || p.h.len() != space.vertex_count() || p.w.len() != space.boundary_count() {
                return Err(Error::Basis(format!("pair {j} does not match the mesh dimensions")));
            }
            if !(p.q > 0.0) {
                return Err(Error::Basis(format!("pair {j} has non-positive eigenvalue {}", p.q)));
            }
        }
        if pairs.windows(2).any(|w| w[1].q < w[0].q) {
            return Err(Error::Basis("eigenvalues are not sorted".into()));
        }
        Ok(SpectralBasis { space, pairs })
    }

    pub fn space(&self) -> &Arc<FemSpace> {
        &self.space
    }

    pub fn pairs(&self) -> &[DbsEigenpair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn q(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.q).collect()
    }

    pub fn boundary_length(&self) -> f64 {
        self.space.boundary_length()
    }

    /// The first `m` pairs.
    pub fn truncated(&self, m: usize) -> SpectralBasis {
        SpectralBasis {
            space: Arc::clone(&self.space),
            pairs: self.pairs[..m.min(self.len())].to_vec(),
        }
    }

    /// `⟨f, h_j⟩` for every pair, using the consistent mass matrix.
    pub fn coefficients(&self, f: &InteriorField) -> Vec<f64> {
        let mf = self.space.operators().mass.mul_vec(&f.0);
        self.pairs.iter().map(|p| dot(&mf, &p.h.0)).collect()
    }

    /// `⟨g, w_j⟩_∂Ω` for every pair.
    pub fn boundary_coefficients(&self, g: &BoundaryField) -> Vec<f64> {
        self.pairs.iter().map(|p| self.space.boundary_inner(g, &p.w)).collect()
    }

    /// `m(u, u) = ∫_∂Ω |D_ν u|² dσ` for a zero-trace field with Laplacian `f`.
    pub fn flux_functional(&self, u: &InteriorField, f: &InteriorField) -> f64 {
        self.space.boundary_flux_energy(u, f)
    }
}

// ---- eigensolves -------------------------------------------------------------------

/// The `m` smallest DBS eigenpairs.
pub fn dbs_eigensolve(space: &Arc<FemSpace>, m: usize) -> Result<SpectralBasis> {
    dbs_eigensolve_with(space, m, &EigenOptions::default())
}

pub fn dbs_eigensolve_with(space: &Arc<FemSpace>, m: usize, opts: &EigenOptions) -> Result<SpectralBasis> {
    let nb = space.boundary_count();
    if m == 0 || m + 1 > nb {
        return Err(Error::Capacity {
            requested: m,
            available: nb.saturating_sub(1),
        });
    }
    let weights = space.operators().boundary_mass.clone();
    // (β, g) with Eᵀ M E g = β W g, gᵀ W g = 1, β descending.
    let (betas, vectors) = if opts.use_dense(nb) {
        let e = space.harmonic_extension_matrix();
        let me = space.operators().mass.mul_mat(e.as_ref());
        let k = e.as_ref().transpose() * me.as_ref();
        let (vals, vecs) = weighted_dense_eigen(&k, &weights)?;
        take_largest(vals, vecs, m)
    } else {
        let op = DbsOperator {
            space,
            weights: &weights,
        };
        let ritz = largest_eigenpairs(&op, m, &opts.lanczos)?;
        (ritz.values, ritz.vectors)
    };

    let mixing = Mixing::canonical(&betas, &vectors, 0);
    let boundary_length = space.boundary_length();
    let zero = BoundaryField::zeros(nb);
    let (mut bs, mut hs, mut ws) = (Vec::with_capacity(m), Vec::with_capacity(m), Vec::with_capacity(m));
    for (&beta, g) in betas.iter().zip(vectors) {
        if !(beta > 0.0) {
            return Err(Error::Singular(format!("non-positive DBS reciprocal eigenvalue {beta:e}")));
        }
        let q = 1.0 / beta;
        let eg = space.harmonic_extension(&BoundaryField(g));
        let h = eg.scaled(1.0 / space.l2_norm(&eg));
        let b = space.solve_dirichlet_poisson(&h, &zero);
        // The flux route (rather than w = √|∂Ω| g) keeps w tied to b as the
        // definition requires; the two agree to solver accuracy.
        let w = space.normal_flux(&b, &h).scaled((q * boundary_length).sqrt());
        bs.push(b.0);
        hs.push(h.0);
        ws.push(w.0);
    }
    for fields in [&mut bs, &mut hs, &mut ws] {
        mixing.apply(fields);
    }
    let pairs = betas
        .iter()
        .zip(bs.into_iter().zip(hs).zip(ws))
        .map(|(beta, ((b, h), w))| DbsEigenpair {
            q: 1.0 / beta,
            b: InteriorField(b),
            h: InteriorField(h),
            w: BoundaryField(w),
        })
        .collect();
    SpectralBasis::from_pairs(Arc::clone(space), pairs)
}

/// The `m` smallest eigenpairs of the Dirichlet-to-Neumann map.
pub fn harmonic_steklov_eigensolve(space: &FemSpace, m: usize) -> Result<Vec<HarmonicSteklovPair>> {
    harmonic_steklov_eigensolve_with(space, m, &EigenOptions::default())
}

pub fn harmonic_steklov_eigensolve_with(
    space: &FemSpace,
    m: usize,
    opts: &EigenOptions,
) -> Result<Vec<HarmonicSteklovPair>> {
    let nb = space.boundary_count();
    if m == 0 || m > nb {
        return Err(Error::Capacity {
            requested: m,
            available: nb,
        });
    }
    let weights = space.operators().boundary_mass.clone();
    let (deltas, mut vectors) = if opts.use_dense(nb) {
        let e = space.harmonic_extension_matrix();
        let ae = space.operators().stiffness.mul_mat(e.as_ref());
        let nodes = space.mesh().boundary_nodes();
        let schur = Mat::from_fn(nb, nb, |i, j| ae[(nodes[i], j)]);
        let (vals, vecs) = weighted_dense_eigen(&schur, &weights)?;
        (vals[..m].to_vec(), vecs[..m].to_vec())
    } else {
        let op = SteklovOperator { space, weights: &weights };
        let ritz = largest_eigenpairs(&op, m, &opts.lanczos)?;
        (ritz.values.iter().map(|mu| 1.0 / mu - 1.0).collect(), ritz.vectors)
    };
    Mixing::canonical(&deltas, &vectors, 0).apply(&mut vectors);

    let scale = space.boundary_length().sqrt();
    let top = deltas.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    Ok(deltas
        .into_iter()
        .zip(vectors)
        .map(|(d, g)| HarmonicSteklovPair {
            // The constant mode is exactly in the kernel; clear roundoff of either sign.
            delta: if d.abs() <= 1e-12 * top.max(1.0) { 0.0 } else { d },
            s: space.harmonic_extension(&BoundaryField(g).scaled(scale)),
        })
        .collect())
}

/// The `m` smallest eigenpairs of the Dirichlet Laplacian `-Δe = λe`.
pub fn dirichlet_laplacian_eigensolve(space: &FemSpace, m: usize) -> Result<Vec<DirichletEigenpair>> {
    dirichlet_laplacian_eigensolve_with(space, m, &EigenOptions::default())
}

pub fn dirichlet_laplacian_eigensolve_with(
    space: &FemSpace,
    m: usize,
    opts: &EigenOptions,
) -> Result<Vec<DirichletEigenpair>> {
    let ni = space.interior_nodes().len();
    if m == 0 || m > ni {
        return Err(Error::Capacity {
            requested: m,
            available: ni,
        });
    }
    let (lambdas, vectors) = if opts.use_dense(ni) {
        let interior_map: Vec<Option<usize>> = (0..space.vertex_count()).map(|v| space.interior_slot(v)).collect();
        let a = space.operators().stiffness.block(&interior_map, ni, &interior_map, ni).to_dense();
        let mass = space.interior_mass().to_dense();
        let (vals, vecs) = generalized_dense_eigen(&a, &mass)?;
        (vals[..m].to_vec(), vecs[..m].to_vec())
    } else {
        let op = DirichletOperator { space };
        let ritz = largest_eigenpairs(&op, m, &opts.lanczos)?;
        (ritz.values.iter().map(|mu| 1.0 / mu).collect(), ritz.vectors)
    };

    let mixing = Mixing::canonical(&lambdas, &vectors, dirichlet_reference_node(space));
    let mut es = Vec::with_capacity(m);
    let mut fluxes = Vec::with_capacity(m);
    for (&lambda, x) in lambdas.iter().zip(&vectors) {
        let e = space.interior_field(x);
        fluxes.push(space.normal_flux(&e, &e.scaled(-lambda)).0);
        es.push(e.0);
    }
    mixing.apply(&mut es);
    mixing.apply(&mut fluxes);
    Ok(lambdas
        .into_iter()
        .zip(es.into_iter().zip(fluxes))
        .map(|(lambda, (e, flux))| DirichletEigenpair {
            lambda,
            e: InteriorField(e),
            flux: BoundaryField(flux),
        })
        .collect())
}

/// Interior node closest to the first boundary node.
fn dirichlet_reference_node(space: &FemSpace) -> usize {
    let mesh = space.mesh();
    let p = mesh.vertices()[mesh.boundary_nodes()[0]];
    space
        .interior_nodes()
        .iter()
        .enumerate()
        .min_by(|(_, &a), (_, &b)| {
            let da = (mesh.vertices()[a][0] - p[0]).hypot(mesh.vertices()[a][1] - p[1]);
            let db = (mesh.vertices()[b][0] - p[0]).hypot(mesh.vertices()[b][1] - p[1]);
            da.total_cmp(&db)
        })
        .map_or(0, |(i, _)| i)
}

// ---- operators for the iterative path ---------------------------------------------------

/// `W⁻¹ Eᵀ M E`, self-adjoint in the `W` inner product; eigenvalues `1/q`.
struct DbsOperator<'a> {
    space: &'a FemSpace,
    weights: &'a [f64],
}

impl SymmetricOperator for DbsOperator<'_> {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn apply(&self, g: &[f64]) -> Vec<f64> {
        let u = self.space.harmonic_extension(&BoundaryField(g.to_vec()));
        let mu = self.space.operators().mass.mul_vec(&u.0);
        let z = self.space.extension_transpose(&mu);
        z.iter().zip(self.weights).map(|(z, w)| z / w).collect()
    }

    fn apply_inner(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.weights).map(|(x, w)| x * w).collect()
    }
}

/// `(S + W)⁻¹ W` with `S` the discrete DtN form; eigenvalues `1/(1 + δ)`.
struct SteklovOperator<'a> {
    space: &'a FemSpace,
    weights: &'a [f64],
}

impl SymmetricOperator for SteklovOperator<'_> {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn apply(&self, g: &[f64]) -> Vec<f64> {
        let r = self.apply_inner(g);
        self.space
            .robin_solve_boundary(&r)
            .expect("stiffness plus boundary mass is positive definite on a valid mesh")
    }

    fn apply_inner(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.weights).map(|(x, w)| x * w).collect()
    }
}

/// `A_II⁻¹ M_II`, self-adjoint in the `M_II` inner product; eigenvalues `1/λ`.
struct DirichletOperator<'a> {
    space: &'a FemSpace,
}

impl SymmetricOperator for DirichletOperator<'_> {
    fn dim(&self) -> usize {
        self.space.interior_nodes().len()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.space.dirichlet_shift_invert(x)
    }

    fn apply_inner(&self, x: &[f64]) -> Vec<f64> {
        self.space.interior_mass().mul_vec(x)
    }
}

// ---- dense helpers -------------------------------------------------------------------

fn symmetric_eigen(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = a.nrows();
    let sym = Mat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let evd = sym
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Singular(format!("dense symmetric eigensolve: {e:?}")))?;
    let s = evd.S().column_vector();
    Ok(((0..n).map(|i| s[i]).collect(), evd.U().to_owned()))
}

/// Solves `K x = θ W x` for diagonal `W`; ascending `θ`, `W`-orthonormal vectors.
fn weighted_dense_eigen(k: &Mat<f64>, weights: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = weights.len();
    let inv_sqrt: Vec<f64> = weights.iter().map(|w| 1.0 / w.sqrt()).collect();
    let c = Mat::from_fn(n, n, |i, j| k[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
    let (vals, u) = symmetric_eigen(&c)?;
    let vecs = (0..n).map(|j| (0..n).map(|i| u[(i, j)] * inv_sqrt[i]).collect()).collect();
    Ok((vals, vecs))
}

/// Solves `A x = λ M x` for symmetric positive definite `M`; ascending `λ`,
/// `M`-orthonormal vectors.
fn generalized_dense_eigen(a: &Mat<f64>, mass: &Mat<f64>) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = a.nrows();
    let (mvals, mvecs) = symmetric_eigen(mass)?;
    if mvals.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Singular("mass matrix is not positive definite".into()));
    }
    // M^{-1/2} = Q Λ^{-1/2} Qᵀ
    let scaled = Mat::from_fn(n, n, |i, j| mvecs[(i, j)] / mvals[j].sqrt());
    let m_inv_sqrt = scaled.as_ref() * mvecs.as_ref().transpose();
    let c = m_inv_sqrt.as_ref() * a.as_ref() * m_inv_sqrt.as_ref();
    let (vals, u) = symmetric_eigen(&c)?;
    let x = m_inv_sqrt.as_ref() * u.as_ref();
    let vecs = (0..n).map(|j| (0..n).map(|i| x[(i, j)]).collect()).collect();
    Ok((vals, vecs))
}

fn take_largest(vals: Vec<f64>, vecs: Vec<Vec<f64>>, m: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = vals.len();
    let idx: Vec<usize> = (n - m..n).rev().collect();
    (idx.iter().map(|&i| vals[i]).collect(), idx.iter().map(|&i| vecs[i].clone()).collect())
}

/// Block-diagonal orthogonal matrix that removes the rotational freedom
/// inside clusters of (near-)equal eigenvalues and the sign freedom of every
/// vector.
///
/// Within a cluster the vectors are mixed by a Householder reflection so that
/// only the first one is nonzero at the reference entry; afterwards each
/// vector is scaled so its first significant entry is positive. The same
/// matrix is applied to every field derived linearly from the vectors, so
/// orthonormality of all of them is preserved exactly.
struct Mixing {
    /// `(start, q)` where new vector `start + k` is `Σ_i q[i][k] · old[start + i]`.
    blocks: Vec<(usize, Vec<Vec<f64>>)>,
}

impl Mixing {
    fn canonical(values: &[f64], vectors: &[Vec<f64>], reference: usize) -> Mixing {
        let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut blocks = Vec::new();
        let mut start = 0;
        while start < values.len() {
            let mut end = start + 1;
            while end < values.len() {
                let (a, b) = (values[end - 1], values[end]);
                if (a - b).abs() > CLUSTER_GAP * a.abs().max(b.abs()).max(1e-12 * scale) {
                    break;
                }
                end += 1;
            }
            let cluster = &vectors[start..end];
            let mut q = cluster_reflection(cluster, reference);
            for k in 0..cluster.len() {
                let mixed = combine(cluster, q.iter().map(|row| row[k]));
                let top = mixed.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                if mixed.iter().find(|x| x.abs() > 1e-8 * top).is_some_and(|&x| x < 0.0) {
                    q.iter_mut().for_each(|row| row[k] = -row[k]);
                }
            }
            blocks.push((start, q));
            start = end;
        }
        Mixing { blocks }
    }

    fn apply(&self, fields: &mut [Vec<f64>]) {
        for (start, q) in &self.blocks {
            let cluster = &fields[*start..*start + q.len()];
            let mixed: Vec<Vec<f64>> = (0..q.len()).map(|k| combine(cluster, q.iter().map(|row| row[k]))).collect();
            for (dst, src) in fields[*start..].iter_mut().zip(mixed) {
                *dst = src;
            }
        }
    }
}

fn combine(vectors: &[Vec<f64>], coeffs: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out = vec![0.0; vectors[0].len()];
    for (v, c) in vectors.iter().zip(coeffs) {
        if c != 0.0 {
            out.iter_mut().zip(v).for_each(|(o, x)| *o += c * x);
        }
    }
    out
}

/// Householder `H` with `H e₁ = a/‖a‖`, `a` the cluster's reference entries;
/// the identity when there is nothing to rotate.
fn cluster_reflection(cluster: &[Vec<f64>], reference: usize) -> Vec<Vec<f64>> {
    let m = cluster.len();
    let identity: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|k| if i == k { 1.0 } else { 0.0 }).collect()).collect();
    if m == 1 {
        return identity;
    }
    let a: Vec<f64> = cluster.iter().map(|v| v[reference]).collect();
    let alpha = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let top = cluster.iter().flat_map(|v| v.iter()).fold(0.0f64, |acc, x| acc.max(x.abs()));
    if alpha <= 1e-12 * top {
        return identity;
    }
    let mut w: Vec<f64> = a.iter().map(|x| -x / alpha).collect();
    w[0] += 1.0;
    let ww: f64 = w.iter().map(|x| x * x).sum();
    if ww <= f64::EPSILON {
        return identity;
    }
    (0..m)
        .map(|i| (0..m).map(|k| identity[i][k] - 2.0 * w[i] * w[k] / ww).collect())
        .collect()
}

// ---- derived spectral quantities --------------------------------------------------------

/// Truncated series `D_ν e = −λ Σ ê_j (|∂Ω| q_j)^{-1/2} w_j` for a Dirichlet
/// eigenfunction with Bergman coefficients `ê_j = ⟨e, h_j⟩`.
pub fn normal_derivative_series(e_coeffs: &[f64], lambda: f64, basis: &SpectralBasis) -> Result<BoundaryField> {
    if !(lambda > 0.0) {
        return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
    }
    if e_coeffs.len() > basis.len() {
        return Err(Error::Capacity {
            requested: e_coeffs.len(),
            available: basis.len(),
        });
    }
    let len = basis.boundary_length();
    let mut out = BoundaryField::zeros(basis.space().boundary_count());
    for (c, p) in e_coeffs.iter().zip(basis.pairs()) {
        out = out.axpy(-lambda * c / (len * p.q).sqrt(), &p.w);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HassellTaoReport {
    /// `∫_∂Ω |D_ν e|² dσ`
    pub flux_sq: f64,
    /// `‖𝒫_H e‖²` with the exact discrete harmonic projection.
    pub projection_sq: f64,
    /// `Σ_{j≤M} ⟨e, h_j⟩²`, the same quantity truncated to the basis.
    pub basis_projection_sq: f64,
    /// `λ² ‖𝒫_H e‖² / q₁`
    pub bound: f64,
    /// `λ² / q₁`
    pub weak_bound: f64,
    /// `flux_sq / bound`
    pub ratio: f64,
}

/// Compares the boundary flux of a normalized Dirichlet eigenfunction with
/// the bound `λ² ‖𝒫_H e‖² / q₁ ≤ λ² / q₁`.
///
/// The projection is computed exactly on the mesh rather than through the
/// truncated basis, which would miss the small tail `Σ_{j>M} ⟨e, h_j⟩²`;
/// only `q₁` is taken from the basis.
pub fn hassell_tao_check(pair: &DirichletEigenpair, basis: &SpectralBasis) -> Result<HassellTaoReport> {
    let space = basis.space();
    let norm = space.l2_norm(&pair.e);
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::Normalization(format!("eigenfunction has L2 norm {norm}, expected 1")));
    }
    if basis.is_empty() {
        return Err(Error::Capacity {
            requested: 1,
            available: 0,
        });
    }
    let flux_sq = space.boundary_inner_raw(&pair.flux, &pair.flux);
    let basis_projection_sq: f64 = basis.coefficients(&pair.e).iter().map(|c| c * c).sum();
    let projection = space.harmonic_projection(&pair.e)?;
    let projection_sq = space.l2_inner(&projection, &projection);
    let q1 = basis.pairs()[0].q;
    let lambda2 = pair.lambda * pair.lambda;
    let bound = lambda2 * projection_sq / q1;
    Ok(HassellTaoReport {
        flux_sq,
        projection_sq,
        basis_projection_sq,
        bound,
        weak_bound: lambda2 / q1,
        ratio: if bound > 0.0 { flux_sq / bound } else { f64::INFINITY },
    })
}

/// Residual tolerance on the Parseval deficit before a trace norm is flagged as truncated.
pub const TRACE_TAIL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceNorm {
    pub value: f64,
    /// `1 − Σ ĝ_j² / ‖g‖²_∂Ω`, the fraction of `g` the Steklov basis misses.
    pub tail: f64,
    pub truncated: bool,
}

/// `(Σ_j (1 + δ_j)^{2s} ĝ_j²)^{1/2}` with `ĝ_j = ⟨g, s_j⟩_∂Ω`.
pub fn trace_sobolev_norm(
    space: &FemSpace,
    g: &BoundaryField,
    s: f64,
    steklov: &[HarmonicSteklovPair],
) -> Result<TraceNorm> {
    if !(s.abs() <= 1.0) {
        return Err(Error::param("s", format!("|s| must not exceed 1, got {s}")));
    }
    let mut sum = 0.0;
    let mut captured = 0.0;
    for pair in steklov {
        let c = space.boundary_inner(g, &space.trace(&pair.s));
        captured += c * c;
        sum += (1.0 + pair.delta).powf(2.0 * s) * c * c;
    }
    let total = space.boundary_inner(g, g);
    let tail = if total > 0.0 { ((total - captured) / total).max(0.0) } else { 0.0 };
    Ok(TraceNorm {
        value: sum.sqrt(),
        tail,
        truncated: tail > TRACE_TAIL_TOL,
    })
}
