//! Sparse LU factorization.
//!
//! Right-looking Gaussian elimination on sparse rows. The pivot column is the
//! active column with the fewest active rows (a dynamic minimum-degree
//! ordering); inside that column the pivot row is chosen by threshold partial
//! pivoting, preferring short rows among the numerically acceptable ones.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use super::{LinalgError, SparseMatrix, C64};

/// Candidate pivots must be at least this fraction of the column maximum.
const PIVOT_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone)]
struct Step {
    row: usize,
    col: usize,
    pivot: C64,
    /// Remaining entries of the pivot row, all in later pivot columns.
    upper: Vec<(usize, C64)>,
    /// `(row, multiplier)` pairs eliminated by this pivot.
    lower: Vec<(usize, C64)>,
}

/// Factorization `P A Q = L U` stored as an elimination sequence.
#[derive(Debug, Clone)]
pub struct SparseLu {
    n: usize,
    steps: Vec<Step>,
}

impl SparseLu {
    pub fn factor(a: &SparseMatrix) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        let n = a.nrows();
        let mut rows: Vec<Vec<(usize, C64)>> = (0..n)
            .map(|r| {
                let (c, v) = a.row(r);
                c.iter().copied().zip(v.iter().copied()).collect()
            })
            .collect();
        let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (r, row) in rows.iter().enumerate() {
            for &(c, _) in row {
                col_rows[c].insert(r);
            }
        }
        let mut col_done = vec![false; n];
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
            (0..n).map(|c| Reverse((col_rows[c].len(), c))).collect();
        let mut steps = Vec::with_capacity(n);
        let mut scratch: Vec<(usize, C64)> = Vec::new();

        for step_index in 0..n {
            let col = loop {
                let Reverse((count, c)) = heap.pop().ok_or(LinalgError::Singular {
                    step: step_index,
                })?;
                if !col_done[c] && col_rows[c].len() == count {
                    break c;
                }
            };
            if col_rows[col].is_empty() {
                return Err(LinalgError::Singular { step: step_index });
            }

            let entry = |rows: &Vec<Vec<(usize, C64)>>, r: usize| -> C64 {
                let row = &rows[r];
                match row.binary_search_by_key(&col, |&(c, _)| c) {
                    Ok(k) => row[k].1,
                    Err(_) => C64::new(0.0, 0.0),
                }
            };
            let max_abs = col_rows[col]
                .iter()
                .map(|&r| entry(&rows, r).norm())
                .fold(0.0, f64::max);
            if max_abs == 0.0 || !max_abs.is_finite() {
                return Err(LinalgError::Singular { step: step_index });
            }
            let pivot_row = col_rows[col]
                .iter()
                .copied()
                .filter(|&r| entry(&rows, r).norm() >= PIVOT_THRESHOLD * max_abs)
                .min_by(|&r1, &r2| {
                    rows[r1]
                        .len()
                        .cmp(&rows[r2].len())
                        .then(
                            entry(&rows, r2)
                                .norm()
                                .partial_cmp(&entry(&rows, r1).norm())
                                .unwrap(),
                        )
                        .then(r1.cmp(&r2))
                })
                .expect("threshold admits the maximal entry");
            let pivot = entry(&rows, pivot_row);

            let prow = std::mem::take(&mut rows[pivot_row]);
            for &(c, _) in &prow {
                col_rows[c].remove(&pivot_row);
            }
            let upper: Vec<(usize, C64)> =
                prow.iter().copied().filter(|&(c, _)| c != col).collect();

            let targets: Vec<usize> = col_rows[col].iter().copied().collect();
            let mut lower = Vec::with_capacity(targets.len());
            let mut touched_cols: BTreeSet<usize> = BTreeSet::new();
            for r in targets {
                let l = entry(&rows, r) / pivot;
                lower.push((r, l));
                // row_r <- row_r - l * upper, dropping the pivot column
                scratch.clear();
                let old = std::mem::take(&mut rows[r]);
                let (mut i, mut j) = (0, 0);
                while i < old.len() || j < upper.len() {
                    let ci = old.get(i).map_or(usize::MAX, |e| e.0);
                    let cj = upper.get(j).map_or(usize::MAX, |e| e.0);
                    if ci == col {
                        i += 1;
                        continue;
                    }
                    if ci < cj {
                        scratch.push(old[i]);
                        i += 1;
                    } else if cj < ci {
                        let v = -l * upper[j].1;
                        if v != C64::new(0.0, 0.0) {
                            scratch.push((cj, v));
                            col_rows[cj].insert(r);
                            touched_cols.insert(cj);
                        }
                        j += 1;
                    } else {
                        let v = old[i].1 - l * upper[j].1;
                        if v != C64::new(0.0, 0.0) {
                            scratch.push((ci, v));
                        } else {
                            col_rows[ci].remove(&r);
                            touched_cols.insert(ci);
                        }
                        i += 1;
                        j += 1;
                    }
                }
                rows[r] = scratch.clone();
            }
            col_rows[col].clear();
            col_done[col] = true;
            for &(c, _) in &upper {
                touched_cols.insert(c);
            }
            for c in touched_cols {
                if !col_done[c] {
                    heap.push(Reverse((col_rows[c].len(), c)));
                }
            }
            steps.push(Step {
                row: pivot_row,
                col,
                pivot,
                upper,
                lower,
            });
        }
        Ok(Self { n, steps })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored factor entries (L and U, pivots included).
    pub fn factor_nnz(&self) -> usize {
        self.steps
            .iter()
            .map(|s| 1 + s.upper.len() + s.lower.len())
            .sum()
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        assert_eq!(b.len(), self.n, "lu solve: rhs length");
        let mut y = b.to_vec();
        for s in &self.steps {
            let yp = y[s.row];
            if yp != C64::new(0.0, 0.0) {
                for &(r, l) in &s.lower {
                    y[r] -= l * yp;
                }
            }
        }
        let mut x = vec![C64::new(0.0, 0.0); self.n];
        for s in self.steps.iter().rev() {
            let mut acc = y[s.row];
            for &(c, u) in &s.upper {
                acc -= u * x[c];
            }
            x[s.col] = acc / s.pivot;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse(n: usize, per_row: usize, seed: u64) -> SparseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for r in 0..n {
            t.push((r, r, C64::new(rng.gen_range(-1.0..1.0), 1.0)));
            for _ in 0..per_row {
                let c = rng.gen_range(0..n);
                t.push((r, c, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
            }
        }
        SparseMatrix::from_triplets(n, n, t)
    }

    #[test]
    fn solves_random_unsymmetric() {
        let a = random_sparse(300, 4, 3);
        let lu = SparseLu::factor(&a).unwrap();
        let b: Vec<C64> = (0..300).map(|i| C64::new(i as f64, 1.0)).collect();
        let x = lu.solve(&b);
        let r = a.matvec(&x);
        let err: f64 = r
            .iter()
            .zip(&b)
            .map(|(u, v)| (u - v).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let bn: f64 = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!(err / bn < 1e-11, "residual {}", err / bn);
    }

    #[test]
    fn arrow_matrix_has_no_fill() {
        let n = 200;
        let mut t = vec![(0, 0, C64::new(n as f64, 0.0))];
        for i in 1..n {
            t.push((i, i, C64::new(2.0, 0.0)));
            t.push((0, i, C64::new(1.0, 0.0)));
            t.push((i, 0, C64::new(1.0, 0.0)));
        }
        let a = SparseMatrix::from_triplets(n, n, t);
        let lu = SparseLu::factor(&a).unwrap();
        assert!(lu.factor_nnz() <= a.nnz());
    }

    #[test]
    fn needs_pivoting() {
        // zero diagonal: permutation matrix
        let a = SparseMatrix::from_triplets(
            2,
            2,
            vec![(0, 1, C64::new(1.0, 0.0)), (1, 0, C64::new(1.0, 0.0))],
        );
        let x = SparseLu::factor(&a)
            .unwrap()
            .solve(&[C64::new(2.0, 0.0), C64::new(3.0, 0.0)]);
        assert_eq!(x, vec![C64::new(3.0, 0.0), C64::new(2.0, 0.0)]);
    }

    #[test]
    fn singular_is_reported() {
        let a = SparseMatrix::from_triplets(
            2,
            2,
            vec![(0, 0, C64::new(1.0, 0.0)), (1, 0, C64::new(1.0, 0.0))],
        );
        assert!(matches!(
            SparseLu::factor(&a),
            Err(LinalgError::Singular { .. })
        ));
    }
}
