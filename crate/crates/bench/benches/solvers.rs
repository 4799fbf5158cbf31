use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use steklov_bench::{disk_basis, disk_space, square_space, UNIT_SQUARE};
use steklov_core::bergman::{bergman_project, TruncatedKernel};
use steklov_core::mesh::{build_polygon_mesh, disk_mesh_for_spacing};
use steklov_core::poisson::{poisson_kernel_slice, truncation_error_report};
use steklov_core::spectra::{
    dbs_eigensolve, dbs_eigensolve_with, dirichlet_laplacian_eigensolve, EigenOptions, EigenStrategy,
};
use steklov_core::{FemSpace, PoissonSvd};

fn meshing(c: &mut Criterion) {
    let mut g = c.benchmark_group("mesh");
    g.bench_function("disk h=0.02", |b| b.iter(|| disk_mesh_for_spacing(1.0, black_box(0.02)).unwrap()));
    g.bench_function("square h=0.02", |b| b.iter(|| build_polygon_mesh(&UNIT_SQUARE, black_box(0.02)).unwrap()));
    let mesh = disk_mesh_for_spacing(1.0, 0.02).unwrap();
    g.bench_function("assemble disk h=0.02", |b| b.iter(|| FemSpace::new(mesh.clone()).unwrap()));
    g.finish();
}

fn solves(c: &mut Criterion) {
    let space = disk_space(0.02);
    let g = space.boundary_interpolate(|p| p[0] * p[0] - p[1] * p[1] + p[1]);
    let f = space.interpolate(|p| p[0] * p[1]);
    let mut group = c.benchmark_group("solver");
    group.bench_function("harmonic extension h=0.02", |b| b.iter(|| space.harmonic_extension(black_box(&g))));
    group.bench_function("harmonic projection h=0.02", |b| b.iter(|| space.harmonic_projection(black_box(&f)).unwrap()));
    group.finish();
}

fn eigensolves(c: &mut Criterion) {
    let mut g = c.benchmark_group("spectra");
    g.sample_size(10);
    let coarse = disk_space(0.05);
    g.bench_function("dbs dense h=0.05 M=20", |b| b.iter(|| dbs_eigensolve(&coarse, 20).unwrap()));
    let lanczos = EigenOptions {
        strategy: EigenStrategy::Lanczos,
        ..Default::default()
    };
    g.bench_function("dbs lanczos h=0.05 M=20", |b| b.iter(|| dbs_eigensolve_with(&coarse, 20, &lanczos).unwrap()));
    let fine = disk_space(0.02);
    g.bench_function("dbs h=0.02 M=40", |b| b.iter(|| dbs_eigensolve(&fine, 40).unwrap()));
    g.bench_function("dirichlet h=0.05 M=10", |b| b.iter(|| dirichlet_laplacian_eigensolve(&coarse, 10).unwrap()));
    let square = square_space(0.05);
    g.bench_function("dbs square h=0.05 M=20", |b| b.iter(|| dbs_eigensolve(&square, 20).unwrap()));
    g.finish();
}

fn kernels(c: &mut Criterion) {
    let basis = disk_basis(0.02, 40);
    let space = basis.space();
    let svd = PoissonSvd::new(&basis).unwrap();
    let kernel = TruncatedKernel::new(&basis, 40).unwrap();
    let g = space.boundary_interpolate(|p| (3.0 * p[1].atan2(p[0])).cos());
    let f = space.interpolate(|p| p[0] * p[0] + p[1] * p[1] - 1.0);
    let mut group = c.benchmark_group("kernels");
    group.bench_function("poisson slice M=40", |b| b.iter(|| poisson_kernel_slice(&svd, 40, black_box([0.3, 0.2])).unwrap()));
    group.bench_function("bergman eval M=40", |b| b.iter(|| kernel.eval(black_box([0.3, 0.2]), [-0.1, 0.4]).unwrap()));
    group.bench_function("bergman projection M=40", |b| b.iter(|| bergman_project(black_box(&f), &basis)));
    group.bench_function("truncation report M=20", |b| b.iter(|| truncation_error_report(black_box(&g), &svd, 20).unwrap()));
    group.finish();
}

criterion_group!(benches, meshing, solves, eigensolves, kernels);
criterion_main!(benches);
