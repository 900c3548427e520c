use nalgebra::{DMatrix, DVector};

use super::{LinalgError, SparseMatrix, C64};

/// Largest dimension the dense oracle accepts.
pub const DENSE_ORACLE_CAP: usize = 4000;

/// LU-based dense inverse. Only the test suite and the acceptance checks use
/// it; model code never goes through a dense inverse.
pub fn dense_inverse_oracle(a: &SparseMatrix) -> Result<DMatrix<C64>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.nrows() > DENSE_ORACLE_CAP {
        return Err(LinalgError::TooLargeForDense {
            dim: a.nrows(),
            cap: DENSE_ORACLE_CAP,
        });
    }
    a.to_dense()
        .lu()
        .try_inverse()
        .ok_or(LinalgError::Singular { step: 0 })
}

pub fn to_dense_vector(v: &[C64]) -> DVector<C64> {
    DVector::from_column_slice(v)
}
