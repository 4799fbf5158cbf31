//! Finite element computation of Dirichlet biharmonic Steklov eigenpairs on
//! planar domains, the harmonic Bergman bases they generate, truncated
//! reproducing kernels and the singular value decomposition of the harmonic
//! extension operator.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic_disk;
pub mod bergman;
pub mod error;
pub mod json;
pub mod mesh;
pub mod poisson;
pub mod solver;
pub mod sparse;
pub mod spectra;

pub use bergman::{BergmanDecomposition, TruncatedKernel};
pub use error::{Error, Result};
pub use mesh::{BoundaryShape, Mesh, Point};
pub use poisson::{PoissonSvd, TruncationReport};
pub use solver::{AssembledOperators, BoundaryField, FemSpace, InteriorField};
pub use spectra::{BasisFile, DbsEigenpair, DirichletEigenpair, HarmonicSteklovPair, SpectralBasis};
