//! Piecewise-linear finite element solves on a [`Mesh`].
//!
//! Sign convention: `Δu = f`, so the discrete weak form of a Dirichlet
//! problem is `∫∇u·∇v = -∫f v` for every test function vanishing on ∂Ω.
//! Normal fluxes are recovered variationally: `D_ν u` is the boundary
//! function satisfying `⟨D_ν u, γ(v)⟩_{dσ} = ∫∇u·∇v + ∫f v` for all `v`,
//! with the boundary inner product evaluated by trapezoid (lumped) quadrature.

use std::sync::{Arc, OnceLock};

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::sparse::CsrMatrix;

/// Nodal values of a piecewise-linear function on Ω, one per mesh vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorField(pub Vec<f64>);

/// Values at the boundary nodes, in boundary-loop order.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryField(pub Vec<f64>);

macro_rules! field_arith {
    ($t:ident) => {
        impl $t {
            pub fn zeros(n: usize) -> Self {
                $t(vec![0.0; n])
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn values(&self) -> &[f64] {
                &self.0
            }

            pub fn scaled(&self, a: f64) -> Self {
                $t(self.0.iter().map(|v| a * v).collect())
            }

            /// `self + a * other`
            pub fn axpy(&self, a: f64, other: &Self) -> Self {
                assert_eq!(self.len(), other.len());
                $t(self.0.iter().zip(&other.0).map(|(x, y)| x + a * y).collect())
            }

            pub fn max_abs(&self) -> f64 {
                self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
            }
        }
    };
}
field_arith!(InteriorField);
field_arith!(BoundaryField);

/// The discretized forms: stiffness `∫∇u·∇v`, consistent mass `∫u v` and
/// the lumped boundary mass `∫_∂Ω u v dσ` (diagonal, one weight per boundary node).
#[derive(Debug, Clone)]
pub struct AssembledOperators {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub boundary_mass: Vec<f64>,
}

impl AssembledOperators {
    pub fn assemble(mesh: &Mesh) -> Self {
        let v = mesh.vertices();
        let mut a = Vec::with_capacity(9 * mesh.triangles().len());
        let mut m = Vec::with_capacity(9 * mesh.triangles().len());
        for (tri, &area) in mesh.triangles().iter().zip(mesh.interior_weights()) {
            let p = tri.map(|i| v[i]);
            // ∇φ_k = rot(p_{k+2} - p_{k+1}) / (2|T|)
            let grads: [Point; 3] = std::array::from_fn(|k| {
                let (b, c) = (p[(k + 1) % 3], p[(k + 2) % 3]);
                [(b[1] - c[1]) / (2.0 * area), (c[0] - b[0]) / (2.0 * area)]
            });
            for i in 0..3 {
                for j in 0..3 {
                    let k = area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                    a.push((tri[i], tri[j], k));
                    let mass = if i == j { area / 6.0 } else { area / 12.0 };
                    m.push((tri[i], tri[j], mass));
                }
            }
        }
        let n = mesh.vertex_count();
        AssembledOperators {
            stiffness: CsrMatrix::from_triplets(n, n, a),
            mass: CsrMatrix::from_triplets(n, n, m),
            boundary_mass: mesh.node_weights().to_vec(),
        }
    }
}

/// A mesh together with its assembled operators and the reusable
/// factorization of the interior stiffness block.
pub struct FemSpace {
    mesh: Arc<Mesh>,
    ops: AssembledOperators,
    interior: Vec<usize>,
    interior_slot: Vec<Option<usize>>,
    /// Stiffness rows of interior nodes restricted to boundary columns.
    stiffness_ib: CsrMatrix,
    mass_ii: CsrMatrix,
    stiffness_ii: Option<Llt<usize, f64>>,
    /// Factorization of `A + M_∂` over all vertices, built on first use.
    robin: OnceLock<std::result::Result<Llt<usize, f64>, String>>,
}

impl std::fmt::Debug for FemSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FemSpace")
            .field("vertices", &self.mesh.vertex_count())
            .field("boundary", &self.mesh.boundary_count())
            .finish()
    }
}

impl FemSpace {
    pub fn new(mesh: Mesh) -> Result<Self> {
        Self::from_shared(Arc::new(mesh))
    }

    pub fn from_shared(mesh: Arc<Mesh>) -> Result<Self> {
        let ops = AssembledOperators::assemble(&mesh);
        let n = mesh.vertex_count();
        let interior: Vec<usize> = (0..n).filter(|&v| !mesh.is_boundary(v)).collect();
        let mut interior_slot = vec![None; n];
        for (i, &v) in interior.iter().enumerate() {
            interior_slot[v] = Some(i);
        }
        let boundary_slot: Vec<Option<usize>> = (0..n).map(|v| mesh.boundary_slot(v)).collect();
        let ni = interior.len();
        let nb = mesh.boundary_count();
        let stiffness_ii = ops.stiffness.block(&interior_slot, ni, &interior_slot, ni);
        let stiffness_ib = ops.stiffness.block(&interior_slot, ni, &boundary_slot, nb);
        let mass_ii = ops.mass.block(&interior_slot, ni, &interior_slot, ni);
        let factor = if ni == 0 {
            None
        } else {
            Some(
                stiffness_ii
                    .to_faer()
                    .sp_cholesky(Side::Lower)
                    .map_err(|e| Error::Singular(format!("interior stiffness: {e:?}")))?,
            )
        };
        Ok(FemSpace {
            mesh,
            ops,
            interior,
            interior_slot,
            stiffness_ib,
            mass_ii,
            stiffness_ii: factor,
            robin: OnceLock::new(),
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn shared_mesh(&self) -> Arc<Mesh> {
        Arc::clone(&self.mesh)
    }

    pub fn operators(&self) -> &AssembledOperators {
        &self.ops
    }

    /// Vertex ids of the interior nodes, in increasing order.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    pub(crate) fn interior_slot(&self, v: usize) -> Option<usize> {
        self.interior_slot[v]
    }

    pub(crate) fn interior_mass(&self) -> &CsrMatrix {
        &self.mass_ii
    }

    pub fn vertex_count(&self) -> usize {
        self.mesh.vertex_count()
    }

    pub fn boundary_count(&self) -> usize {
        self.mesh.boundary_count()
    }

    pub fn boundary_length(&self) -> f64 {
        self.mesh.perimeter()
    }

    // ---- fields and inner products -------------------------------------------------

    pub fn interpolate(&self, f: impl Fn(Point) -> f64) -> InteriorField {
        InteriorField(self.mesh.vertices().iter().map(|&p| f(p)).collect())
    }

    pub fn boundary_interpolate(&self, f: impl Fn(Point) -> f64) -> BoundaryField {
        BoundaryField(self.mesh.boundary_points().into_iter().map(f).collect())
    }

    pub fn constant(&self, c: f64) -> InteriorField {
        InteriorField(vec![c; self.vertex_count()])
    }

    /// γ(u): restriction of a field to the boundary nodes.
    pub fn trace(&self, u: &InteriorField) -> BoundaryField {
        BoundaryField(self.mesh.boundary_nodes().iter().map(|&v| u.0[v]).collect())
    }

    /// ∫_Ω u v dx with the consistent mass matrix.
    pub fn l2_inner(&self, u: &InteriorField, v: &InteriorField) -> f64 {
        self.check_interior(u);
        self.check_interior(v);
        dot(&self.ops.mass.mul_vec(&u.0), &v.0)
    }

    pub fn l2_norm(&self, u: &InteriorField) -> f64 {
        self.l2_inner(u, u).max(0.0).sqrt()
    }

    /// `∫_∂Ω g h dσ` (trapezoid rule).
    pub fn boundary_inner_raw(&self, g: &BoundaryField, h: &BoundaryField) -> f64 {
        self.check_boundary(g);
        self.check_boundary(h);
        g.0.iter().zip(&h.0).zip(&self.ops.boundary_mass).map(|((a, b), w)| a * b * w).sum()
    }

    /// `⟨g, h⟩_∂Ω = |∂Ω|⁻¹ ∫_∂Ω g h dσ`, the normalized boundary inner product.
    pub fn boundary_inner(&self, g: &BoundaryField, h: &BoundaryField) -> f64 {
        self.boundary_inner_raw(g, h) / self.boundary_length()
    }

    pub fn boundary_norm_raw(&self, g: &BoundaryField) -> f64 {
        self.boundary_inner_raw(g, g).max(0.0).sqrt()
    }

    pub fn boundary_norm(&self, g: &BoundaryField) -> f64 {
        self.boundary_inner(g, g).max(0.0).sqrt()
    }

    /// ∫∇u·∇v dx.
    pub fn dirichlet_form(&self, u: &InteriorField, v: &InteriorField) -> f64 {
        dot(&self.ops.stiffness.mul_vec(&u.0), &v.0)
    }

    fn check_interior(&self, u: &InteriorField) {
        assert_eq!(u.len(), self.vertex_count(), "interior field length does not match the mesh");
    }

    fn check_boundary(&self, g: &BoundaryField) {
        assert_eq!(g.len(), self.boundary_count(), "boundary field length does not match the mesh");
    }

    // ---- solves --------------------------------------------------------------------

    /// Solves `A_II x = rhs` column by column in place.
    pub(crate) fn solve_interior_in_place(&self, rhs: &mut Mat<f64>) {
        if let Some(llt) = &self.stiffness_ii {
            llt.solve_in_place(rhs.as_mut());
        }
    }

    fn solve_interior_vec(&self, rhs: Vec<f64>) -> Vec<f64> {
        let mut m = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        self.solve_interior_in_place(&mut m);
        (0..rhs.len()).map(|i| m[(i, 0)]).collect()
    }

    /// The discrete solution of `Δu = f` in Ω with `u = g` on ∂Ω.
    pub fn solve_dirichlet_poisson(&self, f: &InteriorField, g: &BoundaryField) -> InteriorField {
        self.check_interior(f);
        self.check_boundary(g);
        let mf = self.ops.mass.mul_vec(&f.0);
        let ag = self.stiffness_ib.mul_vec(&g.0);
        let rhs: Vec<f64> = self.interior.iter().zip(&ag).map(|(&v, a)| -mf[v] - a).collect();
        let x = self.solve_interior_vec(rhs);
        let mut u = vec![0.0; self.vertex_count()];
        for (&v, xi) in self.interior.iter().zip(x) {
            u[v] = xi;
        }
        for (&v, gv) in self.mesh.boundary_nodes().iter().zip(&g.0) {
            u[v] = *gv;
        }
        InteriorField(u)
    }

    /// Discrete harmonic extension `E g`.
    pub fn harmonic_extension(&self, g: &BoundaryField) -> InteriorField {
        self.solve_dirichlet_poisson(&InteriorField::zeros(self.vertex_count()), g)
    }

    /// Harmonic extension of a block of boundary vectors (columns of `g`, boundary-loop order).
    /// Rows of the result are indexed by vertex.
    pub fn harmonic_extension_block(&self, g: &Mat<f64>) -> Mat<f64> {
        let nb = self.boundary_count();
        assert_eq!(g.nrows(), nb);
        let mut rhs = self.stiffness_ib.mul_mat(g.as_ref());
        for x in rhs.col_iter_mut() {
            for v in x.iter_mut() {
                *v = -*v;
            }
        }
        self.solve_interior_in_place(&mut rhs);
        let mut e = Mat::zeros(self.vertex_count(), g.ncols());
        for j in 0..g.ncols() {
            for (i, &v) in self.interior.iter().enumerate() {
                e[(v, j)] = rhs[(i, j)];
            }
            for (b, &v) in self.mesh.boundary_nodes().iter().enumerate() {
                e[(v, j)] = g[(b, j)];
            }
        }
        e
    }

    /// The full discrete extension matrix (vertices x boundary nodes).
    pub fn harmonic_extension_matrix(&self) -> Mat<f64> {
        let nb = self.boundary_count();
        self.harmonic_extension_block(&Mat::identity(nb, nb))
    }

    /// `Eᵀ y` for a vertex-indexed vector `y`.
    pub(crate) fn extension_transpose(&self, y: &[f64]) -> Vec<f64> {
        let yi: Vec<f64> = self.interior.iter().map(|&v| y[v]).collect();
        let z = self.solve_interior_vec(yi);
        let mut out: Vec<f64> = self.mesh.boundary_nodes().iter().map(|&v| y[v]).collect();
        for (i, zi) in z.iter().enumerate() {
            for (b, a) in self.stiffness_ib.row(i) {
                out[b] -= a * zi;
            }
        }
        out
    }

    /// L² projection of `f` onto the discrete harmonic fields, independent of
    /// any eigenbasis. Minimizes `‖f − E g‖` over boundary data `g` by
    /// conjugate gradients on `Eᵀ M E g = Eᵀ M f`, preconditioned with the
    /// boundary mass.
    pub fn harmonic_projection(&self, f: &InteriorField) -> Result<InteriorField> {
        self.check_interior(f);
        let w = &self.ops.boundary_mass;
        let normal = |g: &[f64]| {
            let u = self.harmonic_extension(&BoundaryField(g.to_vec()));
            self.extension_transpose(&self.ops.mass.mul_vec(&u.0))
        };
        let b = self.extension_transpose(&self.ops.mass.mul_vec(&f.0));
        let b_norm = b.iter().zip(w).map(|(x, w)| x * x / w).sum::<f64>().sqrt();
        let mut g = vec![0.0; b.len()];
        if b_norm == 0.0 {
            return Ok(InteriorField::zeros(self.vertex_count()));
        }
        let mut r = b;
        let mut z: Vec<f64> = r.iter().zip(w).map(|(r, w)| r / w).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let max_iter = 4 * g.len() + 50;
        for _ in 0..max_iter {
            let kp = normal(&p);
            let alpha = rz / dot(&p, &kp);
            g.iter_mut().zip(&p).for_each(|(g, p)| *g += alpha * p);
            r.iter_mut().zip(&kp).for_each(|(r, k)| *r -= alpha * k);
            z = r.iter().zip(w).map(|(r, w)| r / w).collect();
            let rz_next = dot(&r, &z);
            if rz_next.sqrt() <= 1e-13 * b_norm {
                return Ok(self.harmonic_extension(&BoundaryField(g)));
            }
            let beta = rz_next / rz;
            rz = rz_next;
            p.iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
        }
        Err(Error::IterationLimit {
            iterations: max_iter,
            residual: rz.max(0.0).sqrt() / b_norm,
        })
    }

    /// Consistent normal flux `D_ν u` of a discrete solution of `Δu = f`.
    pub fn normal_flux(&self, u: &InteriorField, f: &InteriorField) -> BoundaryField {
        self.check_interior(u);
        self.check_interior(f);
        let au = self.ops.stiffness.mul_vec(&u.0);
        let mf = self.ops.mass.mul_vec(&f.0);
        BoundaryField(
            self.mesh
                .boundary_nodes()
                .iter()
                .zip(&self.ops.boundary_mass)
                .map(|(&v, w)| (au[v] + mf[v]) / w)
                .collect(),
        )
    }

    /// `ℳ(u) = ∫_∂Ω |D_ν u|² dσ` for a discrete solution of `Δu = f`.
    pub fn boundary_flux_energy(&self, u: &InteriorField, f: &InteriorField) -> f64 {
        let flux = self.normal_flux(u, f);
        self.boundary_inner_raw(&flux, &flux)
    }

    /// Dirichlet-to-Neumann map: flux of the harmonic extension.
    pub fn dtn_apply(&self, g: &BoundaryField) -> BoundaryField {
        let u = self.harmonic_extension(g);
        self.normal_flux(&u, &InteriorField::zeros(self.vertex_count()))
    }

    /// `T g = D_ν b` where `Δb = E g` in Ω and `b = 0` on ∂Ω.
    ///
    /// DBS boundary eigenfunctions satisfy `T g = g / q`.
    pub fn t_apply(&self, g: &BoundaryField) -> BoundaryField {
        let h = self.harmonic_extension(g);
        let b = self.solve_dirichlet_poisson(&h, &BoundaryField::zeros(self.boundary_count()));
        self.normal_flux(&b, &h)
    }

    /// Both sides of Green's identity
    /// `∫(u Δv − v Δu) = |∂Ω| (⟨D_ν v, u⟩_∂Ω − ⟨D_ν u, v⟩_∂Ω)`.
    pub fn green_identity_terms(
        &self,
        u: &InteriorField,
        v: &InteriorField,
        fu: &InteriorField,
        fv: &InteriorField,
    ) -> (f64, f64) {
        let volume = self.l2_inner(u, fv) - self.l2_inner(v, fu);
        let du = self.normal_flux(u, fu);
        let dv = self.normal_flux(v, fv);
        let surface = self.boundary_inner_raw(&dv, &self.trace(u)) - self.boundary_inner_raw(&du, &self.trace(v));
        (volume, surface)
    }

    pub fn green_identity_residual(
        &self,
        u: &InteriorField,
        v: &InteriorField,
        fu: &InteriorField,
        fv: &InteriorField,
    ) -> f64 {
        let (volume, surface) = self.green_identity_terms(u, v, fu, fv);
        (volume - surface).abs()
    }

    /// Solves `(A + M_∂) u = [0; r]` and returns the boundary part of `u`,
    /// i.e. `(S + M_∂)⁻¹ r` with `S` the Schur complement (discrete DtN form).
    pub(crate) fn robin_solve_boundary(&self, r: &[f64]) -> Result<Vec<f64>> {
        let llt = self
            .robin
            .get_or_init(|| {
                let n = self.vertex_count();
                let mut entries: Vec<(usize, usize, f64)> = (0..n)
                    .flat_map(|i| self.ops.stiffness.row(i).map(move |(j, v)| (i, j, v)))
                    .collect();
                for (&v, &w) in self.mesh.boundary_nodes().iter().zip(&self.ops.boundary_mass) {
                    entries.push((v, v, w));
                }
                CsrMatrix::from_triplets(n, n, entries)
                    .to_faer()
                    .sp_cholesky(Side::Lower)
                    .map_err(|e| format!("{e:?}"))
            })
            .as_ref()
            .map_err(|e| Error::Singular(format!("stiffness plus boundary mass: {e}")))?;
        let n = self.vertex_count();
        let mut rhs = Mat::zeros(n, 1);
        for (&v, &rv) in self.mesh.boundary_nodes().iter().zip(r) {
            rhs[(v, 0)] = rv;
        }
        llt.solve_in_place(rhs.as_mut());
        Ok(self.mesh.boundary_nodes().iter().map(|&v| rhs[(v, 0)]).collect())
    }

    /// Solves `A_II x = M_II y` on the interior nodes (shift-invert operator of
    /// the Dirichlet Laplacian).
    pub(crate) fn dirichlet_shift_invert(&self, y: &[f64]) -> Vec<f64> {
        self.solve_interior_vec(self.mass_ii.mul_vec(y))
    }

    /// Expands interior-node values into a vertex field with zero trace.
    pub(crate) fn interior_field(&self, x: &[f64]) -> InteriorField {
        let mut u = vec![0.0; self.vertex_count()];
        for (&v, xi) in self.interior.iter().zip(x) {
            u[v] = *xi;
        }
        InteriorField(u)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
