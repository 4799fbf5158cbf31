//! Block Lanczos with full reorthogonalization for the largest eigenvalues of
//! an operator that is self-adjoint in a weighted inner product `⟨x, y⟩_B = xᵀBy`.
//!
//! The Krylov basis grows one block at a time; after each block a
//! Rayleigh–Ritz step on the whole basis checks the residuals
//! `‖Op y − θ y‖_B` of the wanted Ritz pairs.

use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    /// The operator; must be self-adjoint with respect to [`Self::apply_inner`].
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    /// `B x` for the inner product the operator is self-adjoint in.
    fn apply_inner(&self, x: &[f64]) -> Vec<f64>;
}

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    pub block_size: usize,
    /// Relative residual tolerance `‖Op y − θ y‖_B ≤ tol·|θ|`.
    pub tol: f64,
    /// Largest Krylov dimension before giving up; `None` picks a default from `nev`.
    pub max_dim: Option<usize>,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            block_size: 4,
            tol: 1e-10,
            max_dim: None,
            seed: 0x5eed_1a2c,
        }
    }
}

/// Ritz pairs sorted by decreasing eigenvalue; vectors are B-orthonormal.
#[derive(Debug, Clone)]
pub struct RitzPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub krylov_dim: usize,
}

struct Basis {
    v: Vec<Vec<f64>>,
    bv: Vec<Vec<f64>>,
    ov: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Basis {
    /// B-orthogonalizes `x` against the basis (two passes) and appends it
    /// unless it is numerically dependent. Returns whether it was added.
    fn push<O: SymmetricOperator + ?Sized>(&mut self, op: &O, mut x: Vec<f64>) -> bool {
        let initial = dot(&x, &op.apply_inner(&x)).max(0.0).sqrt();
        if initial == 0.0 {
            return false;
        }
        for _ in 0..2 {
            for (v, bv) in self.v.iter().zip(&self.bv) {
                let c = dot(bv, &x);
                x.iter_mut().zip(v).for_each(|(xi, vi)| *xi -= c * vi);
            }
        }
        let bx = op.apply_inner(&x);
        let norm = dot(&x, &bx).max(0.0).sqrt();
        if norm <= 1e-10 * initial {
            return false;
        }
        let inv = 1.0 / norm;
        x.iter_mut().for_each(|xi| *xi *= inv);
        let bx = bx.into_iter().map(|y| y * inv).collect();
        let ox = op.apply(&x);
        self.v.push(x);
        self.bv.push(bx);
        self.ov.push(ox);
        true
    }

    fn len(&self) -> usize {
        self.v.len()
    }
}

pub fn largest_eigenpairs<O: SymmetricOperator + ?Sized>(
    op: &O,
    nev: usize,
    opts: &LanczosOptions,
) -> Result<RitzPairs> {
    let n = op.dim();
    if nev == 0 || nev > n {
        return Err(Error::Capacity {
            requested: nev,
            available: n,
        });
    }
    let block = opts.block_size.max(1).min(n);
    let max_dim = opts.max_dim.unwrap_or((20 * nev).max(200)).clamp(nev.min(n), n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random_vec = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.random::<f64>() - 0.5).collect() };

    let mut basis = Basis {
        v: Vec::new(),
        bv: Vec::new(),
        ov: Vec::new(),
    };
    let mut last_block: Vec<usize> = Vec::new();
    for _ in 0..block {
        if basis.push(op, random_vec(&mut rng)) {
            last_block.push(basis.len() - 1);
        }
    }

    let mut worst = f64::INFINITY;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let k = basis.len();
        if k >= nev {
            let ritz = rayleigh_ritz(op, &basis, nev)?;
            worst = ritz
                .values
                .iter()
                .zip(&ritz.residuals)
                .map(|(t, r)| r / t.abs().max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            if worst <= opts.tol || k == n {
                return Ok(ritz);
            }
        }
        if k >= max_dim {
            return Err(Error::IterationLimit {
                iterations,
                residual: worst,
            });
        }

        let candidates: Vec<Vec<f64>> = last_block.iter().map(|&i| basis.ov[i].clone()).collect();
        let mut next = Vec::new();
        for x in candidates {
            if basis.len() >= max_dim {
                break;
            }
            if basis.push(op, x) {
                next.push(basis.len() - 1);
            }
        }
        // Invariant subspace found: continue from fresh random directions.
        while next.len() < block && basis.len() < max_dim.min(n) {
            if basis.push(op, random_vec(&mut rng)) {
                next.push(basis.len() - 1);
            }
        }
        last_block = next;
    }
}

fn rayleigh_ritz<O: SymmetricOperator + ?Sized>(op: &O, basis: &Basis, nev: usize) -> Result<RitzPairs> {
    let k = basis.len();
    let t = Mat::from_fn(k, k, |i, j| 0.5 * (dot(&basis.bv[i], &basis.ov[j]) + dot(&basis.bv[j], &basis.ov[i])));
    let evd = t
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Singular(format!("Rayleigh-Ritz eigensolve: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let n = basis.v[0].len();
    let mut values = Vec::with_capacity(nev);
    let mut vectors = Vec::with_capacity(nev);
    let mut residuals = Vec::with_capacity(nev);
    for idx in (k - nev..k).rev() {
        let theta = s[idx];
        let mut y = vec![0.0; n];
        let mut oy = vec![0.0; n];
        for i in 0..k {
            let c = u[(i, idx)];
            for r in 0..n {
                y[r] += c * basis.v[i][r];
                oy[r] += c * basis.ov[i][r];
            }
        }
        let res: Vec<f64> = oy.iter().zip(&y).map(|(o, yi)| o - theta * yi).collect();
        let norm = dot(&res, &op.apply_inner(&res)).max(0.0).sqrt();
        values.push(theta);
        vectors.push(y);
        residuals.push(norm);
    }
    Ok(RitzPairs {
        values,
        vectors,
        residuals,
        krylov_dim: k,
    })
}
