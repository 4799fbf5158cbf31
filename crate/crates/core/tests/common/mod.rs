#![allow(dead_code, clippy::needless_range_loop)]

use std::sync::Arc;

use steklov_core::mesh::{build_polygon_mesh, disk_mesh_for_spacing};
use steklov_core::{FemSpace, InteriorField, Mesh, Point};

pub const UNIT_SQUARE: [Point; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];

pub fn disk_space(radius: f64, h: f64) -> Arc<FemSpace> {
    Arc::new(FemSpace::new(disk_mesh_for_spacing(radius, h).unwrap()).unwrap())
}

pub fn square_space(h: f64) -> Arc<FemSpace> {
    Arc::new(FemSpace::new(build_polygon_mesh(&UNIT_SQUARE, h).unwrap()).unwrap())
}

pub fn space_of(mesh: Mesh) -> Arc<FemSpace> {
    Arc::new(FemSpace::new(mesh).unwrap())
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Eigenvalue column of the frozen disk oracle table for one family and radius,
/// sorted ascending.
pub fn disk_oracle(family: &str, radius: f64) -> Vec<f64> {
    let text = include_str!("../data/disk_oracle.csv");
    let mut out: Vec<f64> = text
        .lines()
        .skip(1)
        .filter_map(|line| {
            let cols: Vec<&str> = line.split(',').collect();
            let r: f64 = cols[4].parse().unwrap();
            (cols[0] == family && r == radius).then(|| cols[5].parse().unwrap())
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Cyclic Jacobi eigenvalues of a dense symmetric matrix (row-major), ascending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    d.sort_by(f64::total_cmp);
    d
}

/// Largest angle (radians) between two subspaces given by bases orthonormal
/// in the inner product `ip`.
pub fn max_principal_angle(a: &[Vec<f64>], b: &[Vec<f64>], ip: impl Fn(&[f64], &[f64]) -> f64) -> f64 {
    // Both sets orthonormal. The residual R = B − A AᵀB has Gram matrix with
    // largest eigenvalue sin² of the largest angle; this stays accurate for
    // tiny angles where acos of the cosine does not.
    let residual: Vec<Vec<f64>> = b
        .iter()
        .map(|y| {
            let mut r = y.clone();
            for x in a {
                let c = ip(x, y);
                r.iter_mut().zip(x).for_each(|(ri, xi)| *ri -= c * xi);
            }
            r
        })
        .collect();
    let gram: Vec<Vec<f64>> = residual.iter().map(|u| residual.iter().map(|v| ip(u, v)).collect()).collect();
    let largest = *jacobi_eigenvalues(gram).last().unwrap();
    largest.clamp(0.0, 1.0).sqrt().asin()
}

pub fn field(space: &FemSpace, f: impl Fn(Point) -> f64) -> InteriorField {
    space.interpolate(f)
}

pub fn r2(p: Point) -> f64 {
    p[0] * p[0] + p[1] * p[1]
}

/// Largest singular value of the discrete harmonic extension from
/// `L²(∂Ω)` (lumped boundary mass) to `L²(Ω)` (consistent mass), assembled
/// here from the raw triangulation with dense linear algebra.
pub fn dense_extension_sigma_max(mesh: &Mesh) -> f64 {
    let n = mesh.vertex_count();
    let verts = mesh.vertices();
    let mut stiff = vec![vec![0.0; n]; n];
    let mut mass = vec![vec![0.0; n]; n];
    for t in mesh.triangles() {
        let p: Vec<[f64; 2]> = t.iter().map(|&i| verts[i]).collect();
        let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        let area = det.abs() / 2.0;
        // Gradients of the barycentric coordinates.
        let grads: Vec<[f64; 2]> = (0..3)
            .map(|i| {
                let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
                [(a[1] - b[1]) / det, (b[0] - a[0]) / det]
            })
            .collect();
        for i in 0..3 {
            for j in 0..3 {
                stiff[t[i]][t[j]] += area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                mass[t[i]][t[j]] += area / 12.0 * if i == j { 2.0 } else { 1.0 };
            }
        }
    }
    let boundary = mesh.boundary_nodes();
    let nb = boundary.len();
    let mut on_boundary = vec![false; n];
    boundary.iter().for_each(|&b| on_boundary[b] = true);
    let interior: Vec<usize> = (0..n).filter(|&i| !on_boundary[i]).collect();
    let ni = interior.len();
    let weights: Vec<f64> = (0..nb)
        .map(|k| {
            let d = |a: usize, b: usize| {
                let (p, q) = (verts[boundary[a]], verts[boundary[b]]);
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
            };
            0.5 * (d(k, (k + 1) % nb) + d(k, (k + nb - 1) % nb))
        })
        .collect();

    // LU with partial pivoting of A_II, then E = [−A_II⁻¹ A_IB; I].
    let mut lu: Vec<Vec<f64>> = interior.iter().map(|&i| interior.iter().map(|&j| stiff[i][j]).collect()).collect();
    let mut perm: Vec<usize> = (0..ni).collect();
    for k in 0..ni {
        let piv = (k..ni).max_by(|&a, &b| lu[a][k].abs().total_cmp(&lu[b][k].abs())).unwrap();
        lu.swap(k, piv);
        perm.swap(k, piv);
        for i in k + 1..ni {
            let f = lu[i][k] / lu[k][k];
            lu[i][k] = f;
            for j in k + 1..ni {
                lu[i][j] -= f * lu[k][j];
            }
        }
    }
    let solve = |rhs: &[f64]| {
        let mut y: Vec<f64> = perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..ni {
            for j in 0..i {
                y[i] -= lu[i][j] * y[j];
            }
        }
        for i in (0..ni).rev() {
            for j in i + 1..ni {
                y[i] -= lu[i][j] * y[j];
            }
            y[i] /= lu[i][i];
        }
        y
    };
    let mut ext = vec![vec![0.0; nb]; n];
    for (c, &b) in boundary.iter().enumerate() {
        let rhs: Vec<f64> = interior.iter().map(|&i| -stiff[i][b]).collect();
        for (k, v) in solve(&rhs).into_iter().enumerate() {
            ext[interior[k]][c] = v;
        }
        ext[b][c] = 1.0;
    }
    // G = Eᵀ M E; σ_max² is the top eigenvalue of W⁻¹ G.
    let me: Vec<Vec<f64>> = (0..n).map(|i| (0..nb).map(|c| (0..n).map(|k| mass[i][k] * ext[k][c]).sum()).collect()).collect();
    let gram: Vec<Vec<f64>> = (0..nb).map(|a| (0..nb).map(|c| (0..n).map(|k| ext[k][a] * me[k][c]).sum()).collect()).collect();
    let mut x = vec![1.0; nb];
    let mut value = 0.0;
    for _ in 0..500 {
        let y: Vec<f64> = (0..nb).map(|a| gram[a].iter().zip(&x).map(|(g, v)| g * v).sum::<f64>() / weights[a]).collect();
        let norm = y.iter().zip(&weights).map(|(v, w)| v * v * w).sum::<f64>().sqrt();
        let next = norm / x.iter().zip(&weights).map(|(v, w)| v * v * w).sum::<f64>().sqrt();
        x = y;
        if (next - value).abs() < 1e-14 * next {
            value = next;
            break;
        }
        value = next;
    }
    value.sqrt()
}
