//! Numerical kernels shared by every model: sparse storage, certified linear
//! solves, a dense inverse used as a test oracle, and Hermitian spectra.

mod blocktri;
mod dense;
mod eigen;
mod krylov;
mod lu;
mod sparse;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use blocktri::{BlockThomas, BlockTridiagonal, BlockTridiagonalStats};
pub use dense::{dense_inverse_oracle, to_dense_vector, DENSE_ORACLE_CAP};
pub use eigen::{lowest_eigenpairs, spectral_norm_estimate, EigenPair};
pub use krylov::{gmres, GmresOptions};
pub use lu::SparseLu;
pub use sparse::{BlockAssembler, SparseMatrix};

pub type C64 = num_complex::Complex64;

/// Above this dimension `solve` switches from sparse LU to GMRES.
pub const LU_DIMENSION_CAP: usize = 20_000;

/// Relative residual every accepted solve must reach.
pub const SOLVE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    SparseLu,
    Gmres,
    BlockThomas,
}

/// Certificate attached to every linear solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: SolveMethod,
    /// Refinement steps for LU, inner iterations for GMRES.
    pub iterations: usize,
    /// `‖Ax − b‖ / ‖b‖`, recomputed after the solve.
    pub residual: f64,
    pub success: bool,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is numerically singular (elimination step {step})")]
    Singular { step: usize },
    #[error("solve did not reach tolerance: {report:?}")]
    NotConverged { report: SolveReport },
    #[error("dimension {dim} exceeds the dense oracle cap {cap}")]
    TooLargeForDense { dim: usize, cap: usize },
    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("eigensolver did not converge; worst residual {residual:e}")]
    EigenNotConverged { residual: f64 },
}

impl LinalgError {
    /// The failing solve certificate, when there is one.
    pub fn report(&self) -> Option<&SolveReport> {
        match self {
            LinalgError::NotConverged { report } => Some(report),
            _ => None,
        }
    }
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn relative_residual(a: &SparseMatrix, x: &[C64], b: &[C64]) -> f64 {
    relative_residual_with(|v| a.matvec(v), x, b)
}

/// `‖Ax − b‖ / ‖b‖` for a matrix-free `A` (plain `‖Ax‖` when `b = 0`).
pub fn relative_residual_with<F: Fn(&[C64]) -> Vec<C64>>(apply: F, x: &[C64], b: &[C64]) -> f64 {
    let bn = norm(b);
    let r = norm(&sub(&apply(x), b));
    if bn == 0.0 {
        r
    } else {
        r / bn
    }
}

/// A factorized operator ready for repeated certified solves.
#[derive(Debug, Clone)]
pub struct Factorized {
    matrix: SparseMatrix,
    lu: Option<SparseLu>,
}

impl Factorized {
    pub fn new(matrix: SparseMatrix) -> Result<Self, LinalgError> {
        if !matrix.is_square() {
            return Err(LinalgError::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let lu = if matrix.nrows() <= LU_DIMENSION_CAP {
            Some(SparseLu::factor(&matrix)?)
        } else {
            None
        };
        Ok(Self { matrix, lu })
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn solve(&self, b: &[C64]) -> Result<(Vec<C64>, SolveReport), LinalgError> {
        if b.len() != self.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim(),
                got: b.len(),
            });
        }
        let (x, method, iterations) = match &self.lu {
            Some(lu) => {
                let mut x = lu.solve(b);
                let mut steps = 0;
                // iterative refinement until the residual certifies
                while steps < 3 && relative_residual(&self.matrix, &x, b) > 0.01 * SOLVE_TOLERANCE {
                    let r = sub(b, &self.matrix.matvec(&x));
                    let dx = lu.solve(&r);
                    for (xi, d) in x.iter_mut().zip(dx) {
                        *xi += d;
                    }
                    steps += 1;
                }
                (x, SolveMethod::SparseLu, steps)
            }
            None => {
                let (x, it) = gmres(&self.matrix, b, GmresOptions::default());
                (x, SolveMethod::Gmres, it)
            }
        };
        let residual = relative_residual(&self.matrix, &x, b);
        let success = residual <= SOLVE_TOLERANCE && x.iter().all(|v| v.re.is_finite() && v.im.is_finite());
        let report = SolveReport {
            method,
            iterations,
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

/// Solves `A x = b`: sparse LU up to [`LU_DIMENSION_CAP`], restarted GMRES
/// with a diagonal preconditioner beyond it. Fails unless the recomputed
/// relative residual is at most [`SOLVE_TOLERANCE`].
pub fn solve(a: &SparseMatrix, b: &[C64]) -> Result<(Vec<C64>, SolveReport), LinalgError> {
    Factorized::new(a.clone())?.solve(b)
}

/// Solves `(A − zI) x = b`.
pub fn solve_shifted(
    a: &SparseMatrix,
    z: C64,
    b: &[C64],
) -> Result<(Vec<C64>, SolveReport), LinalgError> {
    solve(&a.shift(z), b)
}
