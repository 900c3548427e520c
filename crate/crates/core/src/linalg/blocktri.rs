//! Block-tridiagonal operators and their block Thomas elimination.

use serde::Serialize;

use super::{
    norm, relative_residual_with, sub, LinalgError, SolveMethod, SolveReport, SparseLu,
    SparseMatrix, C64, SOLVE_TOLERANCE,
};

/// `diag[j]` is block `(j, j)`, `upper[j]` is `(j, j+1)`, `lower[j]` is `(j+1, j)`.
#[derive(Debug, Clone)]
pub struct BlockTridiagonal {
    diag: Vec<SparseMatrix>,
    upper: Vec<SparseMatrix>,
    lower: Vec<SparseMatrix>,
    offsets: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BlockTridiagonalStats {
    pub blocks: usize,
    pub max_block_dim: usize,
    /// Stored entries over all Schur complements.
    pub schur_nnz: usize,
    /// Stored entries over all pivot-block LU factors.
    pub factor_nnz: usize,
    /// Sparse triangular solves spent forming the Schur complements.
    pub column_solves: usize,
}

/// A block Thomas factorization ready for repeated solves.
#[derive(Debug, Clone)]
pub struct BlockThomas {
    op: BlockTridiagonal,
    pivots: Vec<SparseLu>,
    stats: BlockTridiagonalStats,
}

impl BlockTridiagonal {
    pub fn new(
        diag: Vec<SparseMatrix>,
        upper: Vec<SparseMatrix>,
        lower: Vec<SparseMatrix>,
    ) -> Result<Self, LinalgError> {
        let nb = diag.len();
        let expected_links = nb.saturating_sub(1);
        if upper.len() != expected_links {
            return Err(LinalgError::DimensionMismatch {
                expected: expected_links,
                got: upper.len(),
            });
        }
        if lower.len() != expected_links {
            return Err(LinalgError::DimensionMismatch {
                expected: expected_links,
                got: lower.len(),
            });
        }
        for d in &diag {
            if !d.is_square() {
                return Err(LinalgError::NotSquare {
                    rows: d.nrows(),
                    cols: d.ncols(),
                });
            }
        }
        for j in 0..expected_links {
            let (nj, nk) = (diag[j].nrows(), diag[j + 1].nrows());
            for (m, r, c) in [(&upper[j], nj, nk), (&lower[j], nk, nj)] {
                if m.nrows() != r {
                    return Err(LinalgError::DimensionMismatch {
                        expected: r,
                        got: m.nrows(),
                    });
                }
                if m.ncols() != c {
                    return Err(LinalgError::DimensionMismatch {
                        expected: c,
                        got: m.ncols(),
                    });
                }
            }
        }
        let mut offsets = vec![0];
        for d in &diag {
            offsets.push(offsets.last().unwrap() + d.nrows());
        }
        Ok(Self {
            diag,
            upper,
            lower,
            offsets,
        })
    }

    pub fn num_blocks(&self) -> usize {
        self.diag.len()
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Start of each block in the flattened vector, with the total dimension
    /// appended.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn diag_block(&self, j: usize) -> &SparseMatrix {
        &self.diag[j]
    }

    pub fn upper_block(&self, j: usize) -> &SparseMatrix {
        &self.upper[j]
    }

    pub fn lower_block(&self, j: usize) -> &SparseMatrix {
        &self.lower[j]
    }

    /// `self − zI`.
    pub fn shifted(&self, z: C64) -> Self {
        Self {
            diag: self.diag.iter().map(|d| d.shift(z)).collect(),
            upper: self.upper.clone(),
            lower: self.lower.clone(),
            offsets: self.offsets.clone(),
        }
    }

    pub fn to_sparse(&self) -> SparseMatrix {
        let n = self.dim();
        let mut t = Vec::new();
        let mut push = |m: &SparseMatrix, r0: usize, c0: usize| {
            t.extend(m.triplets().map(|(r, c, v)| (r + r0, c + c0, v)));
        };
        for j in 0..self.num_blocks() {
            let o = self.offsets[j];
            push(&self.diag[j], o, o);
            if j + 1 < self.num_blocks() {
                let o2 = self.offsets[j + 1];
                push(&self.upper[j], o, o2);
                push(&self.lower[j], o2, o);
            }
        }
        SparseMatrix::from_triplets(n, n, t)
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim(), "block matvec: length");
        let mut y = vec![C64::new(0.0, 0.0); x.len()];
        let nb = self.num_blocks();
        for j in 0..nb {
            let rows = self.offsets[j]..self.offsets[j + 1];
            let mut acc = self.diag[j].matvec(&x[rows.clone()]);
            if j + 1 < nb {
                let next = &x[self.offsets[j + 1]..self.offsets[j + 2]];
                for (a, b) in acc.iter_mut().zip(self.upper[j].matvec(next)) {
                    *a += b;
                }
            }
            if j > 0 {
                let prev = &x[self.offsets[j - 1]..self.offsets[j]];
                for (a, b) in acc.iter_mut().zip(self.lower[j - 1].matvec(prev)) {
                    *a += b;
                }
            }
            y[rows].copy_from_slice(&acc);
        }
        y
    }

    /// Forward elimination: `S₀ = D₀`, `S_j = D_j − L_{j−1} S_{j−1}⁻¹ U_{j−1}`.
    pub fn factor(&self) -> Result<BlockThomas, LinalgError> {
        let mut stats = BlockTridiagonalStats {
            blocks: self.num_blocks(),
            max_block_dim: self.diag.iter().map(|d| d.nrows()).max().unwrap_or(0),
            ..Default::default()
        };
        let mut pivots: Vec<SparseLu> = Vec::with_capacity(self.num_blocks());
        for j in 0..self.num_blocks() {
            let schur = if j == 0 {
                self.diag[0].clone()
            } else {
                let u = &self.upper[j - 1];
                let l = &self.lower[j - 1];
                let lu = &pivots[j - 1];
                let ut = u.adjoint();
                let mut t = Vec::new();
                for c in 0..ut.nrows() {
                    let (rows, vals) = ut.row(c);
                    if rows.is_empty() {
                        continue;
                    }
                    let mut col = vec![C64::new(0.0, 0.0); u.nrows()];
                    for (&r, v) in rows.iter().zip(vals) {
                        col[r] = v.conj();
                    }
                    let x = lu.solve(&col);
                    stats.column_solves += 1;
                    for (r, v) in l.matvec(&x).into_iter().enumerate() {
                        if v != C64::new(0.0, 0.0) {
                            t.push((r, c, v));
                        }
                    }
                }
                let prod = SparseMatrix::from_triplets(l.nrows(), u.ncols(), t);
                self.diag[j].sub(&prod)
            };
            stats.schur_nnz += schur.nnz();
            let lu = SparseLu::factor(&schur)?;
            stats.factor_nnz += lu.factor_nnz();
            pivots.push(lu);
        }
        Ok(BlockThomas {
            op: self.clone(),
            pivots,
            stats,
        })
    }

    /// Certified solve of `self · x = b`.
    pub fn solve(&self, b: &[C64]) -> Result<(Vec<C64>, SolveReport), LinalgError> {
        self.factor()?.solve(b)
    }
}

impl BlockThomas {
    pub fn stats(&self) -> BlockTridiagonalStats {
        self.stats
    }

    pub fn operator(&self) -> &BlockTridiagonal {
        &self.op
    }

    fn sweep(&self, b: &[C64]) -> Vec<C64> {
        let op = &self.op;
        let nb = op.num_blocks();
        let off = &op.offsets;
        let mut y: Vec<Vec<C64>> = Vec::with_capacity(nb);
        for j in 0..nb {
            let mut yj = b[off[j]..off[j + 1]].to_vec();
            if j > 0 {
                let w = self.pivots[j - 1].solve(&y[j - 1]);
                for (a, c) in yj.iter_mut().zip(op.lower[j - 1].matvec(&w)) {
                    *a -= c;
                }
            }
            y.push(yj);
        }
        let mut x = vec![C64::new(0.0, 0.0); op.dim()];
        for j in (0..nb).rev() {
            let mut rhs = std::mem::take(&mut y[j]);
            if j + 1 < nb {
                let next = &x[off[j + 1]..off[j + 2]];
                for (a, c) in rhs.iter_mut().zip(op.upper[j].matvec(next)) {
                    *a -= c;
                }
            }
            let xj = self.pivots[j].solve(&rhs);
            x[off[j]..off[j + 1]].copy_from_slice(&xj);
        }
        x
    }

    pub fn solve(&self, b: &[C64]) -> Result<(Vec<C64>, SolveReport), LinalgError> {
        let n = self.op.dim();
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
        let apply = |v: &[C64]| self.op.matvec(v);
        let mut x = self.sweep(b);
        let mut steps = 0;
        while steps < 3 && relative_residual_with(apply, &x, b) > 0.01 * SOLVE_TOLERANCE {
            let r = sub(b, &apply(&x));
            for (xi, d) in x.iter_mut().zip(self.sweep(&r)) {
                *xi += d;
            }
            steps += 1;
        }
        let residual = relative_residual_with(apply, &x, b);
        let success = residual <= SOLVE_TOLERANCE && norm(&x).is_finite();
        let report = SolveReport {
            method: SolveMethod::BlockThomas,
            iterations: steps,
            residual,
            success,
        };
        if success {
            Ok((x, report))
        } else {
            Err(LinalgError::NotConverged { report })
        }
    }
}
