//! Compressed sparse row matrix storage and kernels.
//!
//! `CsrMatrix` is the single matrix representation used for assembly, products,
//! transposition and graph views. Stored entries are kept sorted by column
//! within each row and never contain explicit zeros, so sparsity-pattern
//! arguments about exact zero propagation hold bitwise.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Largest dense expansion allowed by [`CsrMatrix::to_dense`] (entry count).
pub const DENSE_GUARD: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Assembles a matrix from (row, col, value) triplets.
    ///
    /// Duplicate positions are summed; entries whose sum is exactly zero are
    /// dropped, as are explicit zero triplets.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        for &(row, col, _) in triplets {
            if row >= n_rows || col >= n_cols {
                return Err(Error::TripletOutOfRange {
                    row,
                    col,
                    n_rows,
                    n_cols,
                });
            }
        }
        let mut sorted = triplets.to_vec();
        sorted.sort_unstable_by_key(|a| (a.0, a.1));

        let mut row_offsets = vec![0usize; n_rows + 1];
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut it = sorted.into_iter().peekable();
        while let Some((row, col, mut sum)) = it.next() {
            while let Some(&(r2, c2, v2)) = it.peek() {
                if r2 == row && c2 == col {
                    sum += v2;
                    it.next();
                } else {
                    break;
                }
            }
            if sum != 0.0 {
                row_offsets[row + 1] += 1;
                col_indices.push(col);
                values.push(sum);
            }
        }
        for i in 0..n_rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(CsrMatrix {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// Stored value at (i, j), or 0.0 when the position is not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(pos) => vals[pos],
            Err(_) => 0.0,
        }
    }

    /// Iterates over stored entries as (row, col, value) in row-major order.
    pub fn iter_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&c, &v)| (i, c, v))
        })
    }

    /// Sparse matrix-vector product `y = A x`.
    ///
    /// Rows without stored entries yield exactly 0.0, and entries that depend
    /// only on zero inputs stay exactly zero.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n_rows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    /// In-place variant of [`CsrMatrix::spmv`].
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch {
                context: "spmv input",
                expected: self.n_cols,
                got: x.len(),
            });
        }
        if y.len() != self.n_rows {
            return Err(Error::DimensionMismatch {
                context: "spmv output",
                expected: self.n_rows,
                got: y.len(),
            });
        }
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            y[i] = acc;
        }
        Ok(())
    }

    /// Exact transpose; entries stay sorted by column within each row.
    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.n_cols {
            counts[i + 1] += counts[i];
        }
        let row_offsets = counts.clone();
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        let mut next = counts;
        for (i, c, v) in self.iter_entries() {
            let pos = next[c];
            col_indices[pos] = i;
            values[pos] = v;
            next[c] += 1;
        }
        CsrMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// Dense expansion, guarded to [`DENSE_GUARD`] entries.
    pub fn to_dense(&self) -> Result<DenseMatrix> {
        let entries = self
            .n_rows
            .checked_mul(self.n_cols)
            .ok_or(Error::SizeGuard {
                context: "to_dense",
                required: usize::MAX,
                guard: DENSE_GUARD,
            })?;
        if entries > DENSE_GUARD {
            return Err(Error::SizeGuard {
                context: "to_dense",
                required: entries,
                guard: DENSE_GUARD,
            });
        }
        let mut dense = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for (i, j, v) in self.iter_entries() {
            dense[(i, j)] = v;
        }
        Ok(dense)
    }

    /// True iff `max |a_ij - a_ji| <= tol` over all stored positions.
    pub fn is_symmetric(&self, tol: f64) -> Result<bool> {
        if self.n_rows != self.n_cols {
            return Err(Error::NotSquare {
                n_rows: self.n_rows,
                n_cols: self.n_cols,
            });
        }
        for (i, j, v) in self.iter_entries() {
            if (v - self.get(j, i)).abs() > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Main diagonal as a dense vector (unstored positions are 0.0).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols))
            .map(|i| self.get(i, i))
            .collect()
    }
}
