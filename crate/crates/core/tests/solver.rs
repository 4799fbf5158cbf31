mod common;

use common::{disk_space, r2, square_space};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steklov_core::spectra::{dbs_eigensolve, dirichlet_laplacian_eigensolve};
use steklov_core::{BoundaryField, FemSpace, InteriorField};

fn max_error(space: &FemSpace, u: &InteriorField, f: impl Fn([f64; 2]) -> f64) -> f64 {
    space
        .mesh()
        .vertices()
        .iter()
        .zip(&u.0)
        .map(|(&p, v)| (v - f(p)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn manufactured_radial_solution_converges_quadratically() {
    let errors: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&h| {
            let space = disk_space(1.0, h);
            let f = space.constant(4.0);
            let u = space.solve_dirichlet_poisson(&f, &BoundaryField::zeros(space.boundary_count()));
            max_error(&space, &u, |p| r2(p) - 1.0)
        })
        .collect();
    assert!(errors[2] < 2e-3, "{errors:?}");
    for w in errors.windows(2) {
        // close to 4 for second-order convergence
        assert!(w[0] / w[1] > 3.0, "{errors:?}");
    }
}

#[test]
fn linear_boundary_data_is_reproduced_on_every_domain() {
    for space in [disk_space(1.0, 0.1), square_space(0.1)] {
        let g = space.boundary_interpolate(|p| p[0]);
        let u = space.harmonic_extension(&g);
        assert!(max_error(&space, &u, |p| p[0]) < 1e-12);
        let flux = space.normal_flux(&u, &space.constant(0.0));
        for (d, n) in flux.0.iter().zip(space.mesh().node_normals()) {
            assert!((d - n[0]).abs() < 1e-10);
        }
    }
}

#[test]
fn extension_of_cosine_is_r_cos() {
    // Boundary nodes lie on the circle, where cos θ = x, and linear fields
    // are discretely harmonic, so the extension is r cos θ at every vertex.
    let space = disk_space(1.0, 0.05);
    let g = space.boundary_interpolate(|p| p[0] / p[0].hypot(p[1]));
    let u = space.harmonic_extension(&g);
    assert!(max_error(&space, &u, |p| p[0]) < 1e-12);
}

#[test]
fn extension_is_linear() {
    let space = disk_space(1.0, 0.1);
    let g1 = space.boundary_interpolate(|p| p[0] * p[1] + 0.3);
    let g2 = space.boundary_interpolate(|p| (3.0 * p[1]).sin());
    let lhs = space.harmonic_extension(&g1.scaled(2.5).axpy(1.0, &g2));
    let rhs = space.harmonic_extension(&g1).scaled(2.5).axpy(1.0, &space.harmonic_extension(&g2));
    assert!(lhs.axpy(-1.0, &rhs).max_abs() < 1e-13);
}

#[test]
fn flux_of_paraboloid_tends_to_two() {
    let space = disk_space(1.0, 0.025);
    let u = space.interpolate(|p| r2(p) - 1.0);
    let flux = space.normal_flux(&u, &space.constant(4.0));
    // The boundary nodes carry the exact trace, so this flux is of the
    // discrete solution with those values; compare in the mean-square sense.
    let err = flux.axpy(-1.0, &BoundaryField(vec![2.0; flux.len()]));
    assert!(space.boundary_norm(&err) < 0.02, "{}", space.boundary_norm(&err));
    let zero = space.normal_flux(&space.constant(3.0), &space.constant(0.0));
    assert!(zero.max_abs() < 1e-12);
}

#[test]
fn dtn_of_trigonometric_data() {
    let space = disk_space(1.0, 0.025);
    assert!(space.dtn_apply(&space.boundary_interpolate(|_| 1.0)).max_abs() < 1e-11);
    for k in 1..=3 {
        let trig = |p: [f64; 2]| (k as f64 * p[1].atan2(p[0])).cos();
        let g = space.boundary_interpolate(trig);
        let d = space.dtn_apply(&g);
        let err = space.boundary_norm(&d.axpy(-(k as f64), &g)) / (k as f64 * space.boundary_norm(&g));
        assert!(err < 0.01, "k={k}: {err}");
    }
}

#[test]
fn t_operator_examples() {
    let space = disk_space(1.0, 0.025);
    let one = space.boundary_interpolate(|_| 1.0);
    let t1 = space.t_apply(&one);
    let err = space.boundary_norm(&t1.axpy(-0.5, &one)) / 0.5;
    assert!(err < 2e-3, "{err}");
    for k in 1..=3 {
        let g = space.boundary_interpolate(|p| (k as f64 * p[1].atan2(p[0])).cos());
        let tg = space.t_apply(&g);
        let want = 1.0 / (2.0 * k as f64 + 2.0);
        let err = space.boundary_norm(&tg.axpy(-want, &g)) / (want * space.boundary_norm(&g));
        assert!(err < 0.01, "k={k}: {err}");
    }
    let scaled = space.t_apply(&one.scaled(-3.0));
    assert!(scaled.axpy(3.0, &t1).max_abs() < 1e-12);
}

#[test]
fn green_identity_examples() {
    let space = disk_space(1.0, 0.05);
    // Discrete solutions with the manufactured Laplacians of r² − 1 and (1 − r²)².
    let zero_trace = BoundaryField::zeros(space.boundary_count());
    let fu = space.constant(4.0);
    let u = space.solve_dirichlet_poisson(&fu, &zero_trace);
    let fv = space.interpolate(|p| 16.0 * r2(p) - 8.0);
    let v = space.solve_dirichlet_poisson(&fv, &zero_trace);
    let scale = space.l2_norm(&u) * space.l2_norm(&v);
    assert!(space.green_identity_residual(&u, &v, &fu, &fv) <= 1e-8 * scale);

    // u ≡ 1 against v = r² − 1: both sides are close to 4π.
    let one = space.constant(1.0);
    let zero = space.constant(0.0);
    let (volume, surface) = space.green_identity_terms(&one, &u, &zero, &fu);
    assert!((volume - surface).abs() <= 1e-10 * volume.abs());
    assert!(common::rel(volume, 4.0 * std::f64::consts::PI) < 0.01, "{volume}");
    assert_eq!(space.green_identity_residual(&v, &v, &fv, &fv), 0.0);
}

/// Random smooth zero-trace field on the unit disk and its discrete Laplacian.
fn random_zero_trace(space: &FemSpace, rng: &mut ChaCha8Rng) -> (InteriorField, InteriorField) {
    let c: Vec<f64> = (0..6).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let f = space.interpolate(|p| c[0] + c[1] * p[0] + c[2] * p[1] + c[3] * p[0] * p[1] + c[4] * r2(p) + c[5] * (3.0 * p[0]).sin());
    let u = space.solve_dirichlet_poisson(&f, &BoundaryField::zeros(space.boundary_count()));
    (u, f)
}

#[test]
fn flux_continuity_and_norm_equivalence() {
    let space = disk_space(1.0, 0.05);
    let q1 = dbs_eigensolve(&space, 1).unwrap().pairs()[0].q;
    let lambda1 = dirichlet_laplacian_eigensolve(&space, 1).unwrap()[0].lambda;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let (u, f) = random_zero_trace(&space, &mut rng);
        let f2 = space.l2_inner(&f, &f);
        let flux_sq = space.boundary_flux_energy(&u, &f);
        // Discretely this is exact: ‖D_ν u‖² ≤ ‖f‖²/q₁.
        assert!(flux_sq <= f2 / q1 * (1.0 + 1e-9), "{flux_sq} vs {}", f2 / q1);
        let graph_norm_sq = space.l2_inner(&u, &u) + f2;
        assert!(graph_norm_sq <= (1.0 + 1.0 / lambda1) * f2 * (1.0 + 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn t_and_dtn_are_symmetric_and_nonnegative(
        a in prop::collection::vec(-1.0f64..1.0, 5),
        b in prop::collection::vec(-1.0f64..1.0, 5),
    ) {
        let space = square_space(0.2);
        let mk = |c: &[f64]| space.boundary_interpolate(|p| c[0] + c[1] * p[0] + c[2] * p[1] * p[1] + c[3] * (4.0 * p[0]).cos() + c[4] * p[0] * p[1]);
        let (g, g2) = (mk(&a), mk(&b));
        let (tg, tg2) = (space.t_apply(&g), space.t_apply(&g2));
        let scale = space.boundary_norm_raw(&g) * space.boundary_norm_raw(&g2) + 1e-300;
        prop_assert!((space.boundary_inner_raw(&tg, &g2) - space.boundary_inner_raw(&g, &tg2)).abs() <= 1e-10 * scale);
        prop_assert!(space.boundary_inner_raw(&tg, &g) >= -1e-14);
        let (dg, dg2) = (space.dtn_apply(&g), space.dtn_apply(&g2));
        prop_assert!((space.boundary_inner_raw(&dg, &g2) - space.boundary_inner_raw(&g, &dg2)).abs() <= 1e-9 * scale);
        prop_assert!(space.boundary_inner_raw(&dg, &g) >= -1e-12);
    }
}
