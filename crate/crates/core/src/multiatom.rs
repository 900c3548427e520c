//! N two-level atoms coupled to one boson field in the rotating-wave
//! approximation.
//!
//! Spin configurations are bitmasks with atom 1 in the most significant bit
//! (bit set = excited). Blocks are ordered by decreasing excitation number,
//! and configurations inside a sector by decreasing bitmask, so for `N = 2`
//! the order is `ee, eg, ge, gg`. The Hamiltonian only couples adjacent
//! sectors and is therefore block tridiagonal.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::fieldops::annihilator;
use crate::fock::FockBasis;
use crate::linalg::{BlockThomas, BlockTridiagonal, SolveReport, SparseMatrix};
use crate::modegrid::{FormFactor, ModeGrid};
use crate::{Error, Result, C64};

pub const MAX_ATOMS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorMap {
    n_atoms: usize,
    /// `sectors[j]`: configurations with `j` excited atoms, decreasing.
    sectors: Vec<Vec<u32>>,
}

pub fn sector_map(n_atoms: usize) -> Result<SectorMap> {
    if n_atoms == 0 || n_atoms > MAX_ATOMS {
        return Err(Error::invalid(format!(
            "atom count must be in 1..={MAX_ATOMS}, got {n_atoms}"
        )));
    }
    let mut sectors = vec![Vec::new(); n_atoms + 1];
    for mask in (0..1u32 << n_atoms).rev() {
        sectors[mask.count_ones() as usize].push(mask);
    }
    Ok(SectorMap { n_atoms, sectors })
}

impl SectorMap {
    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    /// Configurations with `j` excited atoms.
    pub fn sector(&self, j: usize) -> &[u32] {
        &self.sectors[j]
    }

    /// `n_j = C(N, j)` for `j = 0..=N`.
    pub fn sizes(&self) -> Vec<usize> {
        self.sectors.iter().map(Vec::len).collect()
    }

    /// Excitation number of block `k` (blocks run from `j = N` down to 0).
    pub fn block_excitation(&self, k: usize) -> usize {
        self.n_atoms - k
    }

    /// Bit of atom `a` (0-based; atom 0 is the most significant).
    pub fn atom_bit(&self, a: usize) -> u32 {
        1 << (self.n_atoms - 1 - a)
    }

    /// Position of `mask` inside its sector.
    pub fn position(&self, mask: u32) -> usize {
        let j = mask.count_ones() as usize;
        self.sectors[j]
            .iter()
            .position(|&m| m == mask)
            .expect("mask belongs to its sector")
    }

    /// Human-readable label such as `"eg"`.
    pub fn label(&self, mask: u32) -> String {
        (0..self.n_atoms)
            .map(|a| if mask & self.atom_bit(a) != 0 { 'e' } else { 'g' })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiAtomParams {
    pub omega_e: Vec<f64>,
    pub omega_g: Vec<f64>,
    pub f: Vec<FormFactor>,
    pub lambda: f64,
    /// Hermitian `n_j × n_j` couplings keyed by excitation number `j`,
    /// acting within that sector in its canonical order.
    pub spin_spin: BTreeMap<usize, DMatrix<C64>>,
}

impl MultiAtomParams {
    pub fn n_atoms(&self) -> usize {
        self.omega_e.len()
    }

    /// Identical atoms with no spin–spin term.
    pub fn uniform(n_atoms: usize, omega_e: f64, omega_g: f64, f: FormFactor, lambda: f64) -> Self {
        Self {
            omega_e: vec![omega_e; n_atoms],
            omega_g: vec![omega_g; n_atoms],
            f: vec![f; n_atoms],
            lambda,
            spin_spin: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MultiAtom {
    params: MultiAtomParams,
    sectors: SectorMap,
    fock_dim: usize,
    op: BlockTridiagonal,
}

impl MultiAtom {
    pub fn assemble_multi(params: MultiAtomParams, grid: &ModeGrid, basis: &FockBasis) -> Result<Self> {
        let n = params.n_atoms();
        let sectors = sector_map(n)?;
        if params.omega_g.len() != n || params.f.len() != n {
            return Err(Error::invalid("per-atom parameter lists differ in length"));
        }
        if !params.lambda.is_finite()
            || params.omega_e.iter().chain(&params.omega_g).any(|v| !v.is_finite())
        {
            return Err(Error::invalid("atom energies and coupling must be finite"));
        }
        for (&j, k) in &params.spin_spin {
            if j > n {
                return Err(Error::invalid(format!("spin-spin block for sector {j} > N")));
            }
            let nj = sectors.sector(j).len();
            if k.nrows() != nj || k.ncols() != nj {
                return Err(Error::invalid(format!(
                    "spin-spin block for sector {j} must be {nj}x{nj}"
                )));
            }
            let scale = k.iter().map(|v| v.norm()).fold(1.0, f64::max);
            if (k - k.adjoint()).iter().any(|v| v.norm() > 1e-12 * scale) {
                return Err(Error::invalid(format!("spin-spin block for sector {j} is not Hermitian")));
            }
        }
        let d = basis.dim();
        let energies = basis.energies(grid);
        let annihilators: Vec<SparseMatrix> = params
            .f
            .iter()
            .map(|f| Ok(annihilator(f, grid, basis)?.into_matrix()))
            .collect::<Result<_>>()?;

        let mut diag = Vec::with_capacity(n + 1);
        let mut upper = Vec::with_capacity(n);
        for k in 0..=n {
            let j = sectors.block_excitation(k);
            let configs = sectors.sector(j);
            let mut t = Vec::new();
            for (p, &mask) in configs.iter().enumerate() {
                let free = (0..n).fold(0.0, |acc, a| {
                    acc + if mask & sectors.atom_bit(a) != 0 {
                        params.omega_e[a]
                    } else {
                        params.omega_g[a]
                    }
                });
                for (i, e) in energies.iter().enumerate() {
                    t.push((p * d + i, p * d + i, C64::new(free + e, 0.0)));
                }
            }
            if let Some(kj) = params.spin_spin.get(&j) {
                for p in 0..configs.len() {
                    for q in 0..configs.len() {
                        let v = kj[(p, q)];
                        if v != C64::new(0.0, 0.0) {
                            for i in 0..d {
                                t.push((p * d + i, q * d + i, v));
                            }
                        }
                    }
                }
            }
            let nj = configs.len() * d;
            diag.push(SparseMatrix::from_triplets(nj, nj, t));

            if j > 0 {
                // rows: sector j, columns: sector j − 1 (one atom de-excited)
                let lower_configs = sectors.sector(j - 1);
                let mut t = Vec::new();
                for (p, &mask) in configs.iter().enumerate() {
                    for a in 0..n {
                        let bit = sectors.atom_bit(a);
                        if mask & bit == 0 {
                            continue;
                        }
                        let q = sectors.position(mask & !bit);
                        for (r, c, v) in annihilators[a].triplets() {
                            t.push((p * d + r, q * d + c, v * params.lambda));
                        }
                    }
                }
                upper.push(SparseMatrix::from_triplets(nj, lower_configs.len() * d, t));
            }
        }
        let lower = upper.iter().map(SparseMatrix::adjoint).collect();
        let op = BlockTridiagonal::new(diag, upper, lower)?;
        Ok(Self {
            params,
            sectors,
            fock_dim: d,
            op,
        })
    }

    pub fn params(&self) -> &MultiAtomParams {
        &self.params
    }

    pub fn sectors(&self) -> &SectorMap {
        &self.sectors
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &BlockTridiagonal {
        &self.op
    }

    pub fn to_sparse(&self) -> SparseMatrix {
        self.op.to_sparse()
    }

    /// Flat index of `(configuration, Fock state)`.
    pub fn index(&self, mask: u32, fock_index: usize) -> usize {
        let j = mask.count_ones() as usize;
        let k = self.sectors.n_atoms() - j;
        self.op.offsets()[k] + self.sectors.position(mask) * self.fock_dim + fock_index
    }

    /// Block Thomas factorization of `H − z`.
    pub fn resolvent(&self, z: C64) -> Result<BlockThomas> {
        Ok(self.op.shifted(z).factor()?)
    }

    /// `(H − z)⁻¹ Ψ` by block elimination over the excitation sectors.
    pub fn block_tridiag_resolvent(&self, z: C64, psi: &[C64]) -> Result<(Vec<C64>, SolveReport)> {
        Ok(self.resolvent(z)?.solve(psi)?)
    }
}
