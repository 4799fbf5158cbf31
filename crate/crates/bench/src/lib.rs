//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use steklov_core::mesh::{build_polygon_mesh, disk_mesh_for_spacing};
use steklov_core::spectra::dbs_eigensolve;
use steklov_core::{FemSpace, SpectralBasis};

pub const UNIT_SQUARE: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];

pub fn disk_space(h: f64) -> Arc<FemSpace> {
    Arc::new(FemSpace::new(disk_mesh_for_spacing(1.0, h).expect("disk mesh")).expect("assembly"))
}

pub fn square_space(h: f64) -> Arc<FemSpace> {
    Arc::new(FemSpace::new(build_polygon_mesh(&UNIT_SQUARE, h).expect("square mesh")).expect("assembly"))
}

pub fn disk_basis(h: f64, m: usize) -> SpectralBasis {
    dbs_eigensolve(&disk_space(h), m).expect("DBS eigensolve")
}
