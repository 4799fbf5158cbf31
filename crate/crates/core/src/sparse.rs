//! Minimal compressed-row storage for the assembled finite element forms.
//!
//! Factorizations are delegated to faer; this type only needs assembly,
//! matrix-vector products and extraction of index-partitioned blocks.

use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, MatRef};

#[derive(Debug, Clone)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds the matrix from `(row, col, value)` entries; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            assert!(r < nrows && c < ncols, "entry ({r}, {c}) outside {nrows}x{ncols}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(j, _)| j == c).map_or(0.0, |(_, v)| v)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    /// `self * x` for a dense column-major block.
    pub fn mul_mat(&self, x: MatRef<'_, f64>) -> Mat<f64> {
        assert_eq!(x.nrows(), self.ncols);
        let mut out = Mat::zeros(self.nrows, x.ncols());
        for j in 0..x.ncols() {
            let col = x.col(j);
            for r in 0..self.nrows {
                out[(r, j)] = self.row(r).map(|(c, v)| v * col[c]).sum();
            }
        }
        out
    }

    /// Block `self[rows, cols]` where `row_map`/`col_map` send a global index to
    /// its local position (or `None` when outside the block).
    pub fn block(
        &self,
        row_map: &[Option<usize>],
        nrows: usize,
        col_map: &[Option<usize>],
        ncols: usize,
    ) -> CsrMatrix {
        let mut entries = Vec::new();
        for (r, lr) in row_map.iter().enumerate().take(self.nrows) {
            let Some(lr) = *lr else { continue };
            for (c, v) in self.row(r) {
                if let Some(lc) = col_map[c] {
                    entries.push((lr, lc, v));
                }
            }
        }
        CsrMatrix::from_triplets(nrows, ncols, entries)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.nrows == self.ncols
            && (0..self.nrows).all(|r| self.row(r).all(|(c, v)| (v - self.get(c, r)).abs() <= tol))
    }

    pub fn to_faer(&self) -> SparseColMat<usize, f64> {
        let entries: Vec<_> = (0..self.nrows)
            .flat_map(|r| self.row(r).map(move |(c, v)| Triplet::new(r, c, v)))
            .collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &entries)
            .expect("valid sparse structure")
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }
}
