//! Second-quantized operators on the truncated Fock space: `dΓ(ω)`, `a(f)`,
//! `a†(f)`, and norm estimates between Fock-scale levels.
//!
//! In the orthonormal occupation basis `a(f) = Σ_m √w_m conj(f_m) b_m` and
//! `a†(f)` is its exact conjugate transpose, so `[a(f), a†(g)] = ⟨f, g⟩` below
//! the truncation ceiling and `a†(f)` annihilates the top sector.

use std::io::Write;

use crate::fock::FockBasis;
use crate::linalg::{spectral_norm_estimate, SparseMatrix};
use crate::modegrid::{omega_pow, FormFactor, ModeGrid};
use crate::{Error, Result, C64};

/// Default power-iteration length for [`operator_scale_norm`].
pub const NORM_ITERATIONS: usize = 200;
const NORM_SEED: u64 = 0x5ca1e;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldOperator {
    matrix: SparseMatrix,
    /// Change of total boson number: −1 for `a`, +1 for `a†`, 0 for `dΓ`.
    sector_shift: i8,
}

impl FieldOperator {
    pub fn new(matrix: SparseMatrix, sector_shift: i8) -> Self {
        Self {
            matrix,
            sector_shift,
        }
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> SparseMatrix {
        self.matrix
    }

    pub fn sector_shift(&self) -> i8 {
        self.sector_shift
    }

    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        self.matrix.matvec(psi)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            sector_shift: -self.sector_shift,
        }
    }

    /// Triplet text `row col re im`, one nonzero per line.
    pub fn write_triplets<W: Write>(&self, out: W) -> std::io::Result<()> {
        self.matrix.write_triplets(out)
    }
}

fn check(f: Option<&FormFactor>, grid: &ModeGrid, basis: &FockBasis) -> Result<()> {
    basis.check_grid(grid)?;
    if let Some(f) = f {
        f.check_grid(grid)?;
    }
    Ok(())
}

/// `dΓ(ω)`: diagonal with the free-field energy of each basis state.
pub fn dgamma(grid: &ModeGrid, basis: &FockBasis) -> Result<FieldOperator> {
    check(None, grid, basis)?;
    let e: Vec<C64> = basis.energies(grid).into_iter().map(|x| C64::new(x, 0.0)).collect();
    Ok(FieldOperator::new(SparseMatrix::diagonal(&e), 0))
}

/// `a(f)`: maps sector `n` to sector `n − 1`.
pub fn annihilator(f: &FormFactor, grid: &ModeGrid, basis: &FockBasis) -> Result<FieldOperator> {
    check(Some(f), grid, basis)?;
    let amp: Vec<C64> = f
        .values()
        .iter()
        .zip(grid.weights())
        .map(|(v, w)| v.conj() * w.sqrt())
        .collect();
    let dim = basis.dim();
    let mut triplets = Vec::new();
    let mut reduced: Vec<u32> = Vec::with_capacity(basis.n_max());
    for col in basis.sector_offsets()[1]..dim {
        let list = basis.mode_list(col);
        let mut p = 0;
        while p < list.len() {
            let m = list[p];
            let mut q = p;
            while q < list.len() && list[q] == m {
                q += 1;
            }
            let occupation = (q - p) as f64;
            let value = amp[m as usize] * occupation.sqrt();
            if value != C64::new(0.0, 0.0) {
                reduced.clear();
                reduced.extend_from_slice(&list[..p]);
                reduced.extend_from_slice(&list[p + 1..]);
                let row = basis
                    .index_of_modes(&reduced)
                    .expect("removing a boson stays inside the basis");
                triplets.push((row, col, value));
            }
            p = q;
        }
    }
    Ok(FieldOperator::new(SparseMatrix::from_triplets(dim, dim, triplets), -1))
}

/// `a†(f)`, the conjugate transpose of [`annihilator`].
pub fn creator(f: &FormFactor, grid: &ModeGrid, basis: &FockBasis) -> Result<FieldOperator> {
    Ok(annihilator(f, grid, basis)?.adjoint())
}

/// Power-iteration estimate of `‖A‖` as a map `F_{s_in} → F_{s_out}`, i.e.
/// of `‖(dΓ+1)^{s_out/2} A (dΓ+1)^{−s_in/2}‖`. The best of `trials` seeded
/// runs is returned.
pub fn operator_scale_norm(
    a: &FieldOperator,
    s_in: f64,
    s_out: f64,
    grid: &ModeGrid,
    basis: &FockBasis,
    trials: usize,
) -> Result<f64> {
    check(None, grid, basis)?;
    if trials == 0 {
        return Err(Error::invalid("operator_scale_norm needs at least one trial"));
    }
    let dim = basis.dim();
    if a.matrix().nrows() != dim || a.matrix().ncols() != dim {
        return Err(Error::invalid("operator does not act on this basis"));
    }
    let energies = basis.energies(grid);
    let d_in: Vec<f64> = energies.iter().map(|e| omega_pow(1.0 + e, -s_in / 2.0)).collect();
    let d_out: Vec<f64> = energies.iter().map(|e| omega_pow(1.0 + e, s_out / 2.0)).collect();
    let adj = a.matrix().adjoint();
    let scale = |v: &[C64], d: &[f64]| -> Vec<C64> { v.iter().zip(d).map(|(x, s)| x * s).collect() };
    let mut best: f64 = 0.0;
    for t in 0..trials {
        let est: std::result::Result<f64, Error> = spectral_norm_estimate(
            |v| Ok(scale(&a.matrix().matvec(&scale(v, &d_in)), &d_out)),
            |v| Ok(scale(&adj.matvec(&scale(v, &d_out)), &d_in)),
            dim,
            NORM_ITERATIONS,
            NORM_SEED + t as u64,
        );
        best = best.max(est?);
    }
    Ok(best)
}
