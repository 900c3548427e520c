//! Compressed-row complex sparse matrices.

use std::io::{self, Write};
use std::ops::Range;

use nalgebra::DMatrix;

use super::C64;

/// Complex matrix in compressed row storage.
///
/// Columns within a row are sorted and unique. Entries that merge to an exact
/// zero are dropped at construction, so two matrices built from the same
/// arithmetic have identical triplet lists.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_triplets(n, n, diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Builds a matrix from `(row, col, value)` triplets.
    ///
    /// Duplicates are summed in insertion order; exact zeros are dropped.
    pub fn from_triplets<I>(nrows: usize, ncols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut t: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        for &(r, c, _) in &t {
            assert!(
                r < nrows && c < ncols,
                "triplet ({r}, {c}) outside {nrows}x{ncols}"
            );
        }
        // stable: duplicates keep insertion order for the summation below
        t.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(t.len());
        let mut values = Vec::with_capacity(t.len());
        let mut i = 0;
        while i < t.len() {
            let (r, c, mut v) = t[i];
            let mut j = i + 1;
            while j < t.len() && t[j].0 == r && t[j].1 == c {
                v += t[j].2;
                j += 1;
            }
            if v != C64::new(0.0, 0.0) {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
            }
            i = j;
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let mut t = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                t.push((r, c, m[(r, c)]));
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), t)
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

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[C64]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Triplets in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn diagonal_entries(&self) -> Vec<C64> {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i))
            .collect()
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.ncols, "matvec: input length");
        assert_eq!(y.len(), self.nrows, "matvec: output length");
        for (r, yr) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            let mut acc = C64::new(0.0, 0.0);
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            *yr = acc;
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_triplets(
            self.ncols,
            self.nrows,
            self.triplets().map(|(r, c, v)| (c, r, v.conj())),
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_triplets(
            self.nrows,
            self.ncols,
            self.triplets().map(|(r, c, v)| (r, c, s * v)),
        )
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self::from_triplets(
            self.nrows,
            self.ncols,
            self.triplets().map(|(r, c, v)| (r, c, v * s)),
        )
    }

    /// `self + other`.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        Self::from_triplets(
            self.nrows,
            self.ncols,
            self.triplets().chain(other.triplets()),
        )
    }

    /// `self - other`.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale_real(-1.0))
    }

    /// `self - z·I`.
    pub fn shift(&self, z: C64) -> Self {
        assert!(self.is_square());
        let n = self.nrows;
        Self::from_triplets(
            n,
            n,
            self.triplets().chain((0..n).map(|i| (i, i, -z))),
        )
    }

    /// Sparse product `self * other` (row-wise Gustavson accumulation).
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "matmul: inner dimensions");
        let zero = C64::new(0.0, 0.0);
        let mut acc = vec![zero; other.ncols];
        let mut mark = vec![usize::MAX; other.ncols];
        let mut touched = Vec::new();
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for r in 0..self.nrows {
            touched.clear();
            let (cols, vals) = self.row(r);
            for (&k, &a) in cols.iter().zip(vals) {
                let (ocols, ovals) = other.row(k);
                for (&c, &b) in ocols.iter().zip(ovals) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = zero;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if acc[c] != zero {
                    col_idx.push(c);
                    values.push(acc[c]);
                }
            }
            row_ptr[r + 1] = col_idx.len();
        }
        Self {
            nrows: self.nrows,
            ncols: other.ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Rows/columns restricted to the given index ranges.
    pub fn submatrix(&self, rows: Range<usize>, cols: Range<usize>) -> Self {
        let (r0, c0) = (rows.start, cols.start);
        let mut t = Vec::new();
        for r in rows.clone() {
            let (cc, vv) = self.row(r);
            for (&c, &v) in cc.iter().zip(vv) {
                if cols.contains(&c) {
                    t.push((r - r0, c - c0, v));
                }
            }
        }
        Self::from_triplets(rows.len(), cols.len(), t)
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.triplets()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .chain(
                self.triplets()
                    .map(|(r, c, v)| (self.get(c, r) - v.conj()).norm()),
            )
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    /// Sorted `(row, col)` positions of the stored entries.
    pub fn pattern(&self) -> Vec<(usize, usize)> {
        self.triplets().map(|(r, c, _)| (r, c)).collect()
    }

    /// Writes one `row col re im` line per stored entry.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (r, c, v) in self.triplets() {
            writeln!(out, "{r} {c} {:.16e} {:.16e}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// Assembles a matrix from rectangular blocks placed at row/column offsets.
#[derive(Debug)]
pub struct BlockAssembler {
    nrows: usize,
    ncols: usize,
    triplets: Vec<(usize, usize, C64)>,
}

impl BlockAssembler {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            triplets: Vec::new(),
        }
    }

    pub fn place(&mut self, row_offset: usize, col_offset: usize, block: &SparseMatrix) {
        assert!(row_offset + block.nrows() <= self.nrows);
        assert!(col_offset + block.ncols() <= self.ncols);
        self.triplets.extend(
            block
                .triplets()
                .map(|(r, c, v)| (r + row_offset, c + col_offset, v)),
        );
    }

    pub fn finish(self) -> SparseMatrix {
        SparseMatrix::from_triplets(self.nrows, self.ncols, self.triplets)
    }
}
