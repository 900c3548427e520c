//! Two-sector generalized spin–boson model: an atom with `dim_e` excited and
//! `dim_g` ground levels coupled through channels `Σ⁺_j ⊗ a(f_j)`.
//!
//! Layout: excited level `a` occupies rows `a·D..(a+1)·D`, ground level `b`
//! occupies `(dim_e + b)·D..`, with `D` the Fock dimension.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::fieldops::annihilator;
use crate::fock::FockBasis;
use crate::linalg::{Factorized, SolveReport, SparseMatrix};
use crate::modegrid::{FormFactor, ModeGrid};
use crate::sbmodel::{BlockHamiltonian, TwoBlockState};
use crate::{Error, Result, C64};

/// Largest atom sector dimension accepted.
pub const MAX_SECTOR_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    /// `dim_e × dim_g`.
    pub sigma_plus: DMatrix<C64>,
    pub f: FormFactor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GsbParams {
    pub e_e: DMatrix<C64>,
    pub e_g: DMatrix<C64>,
    pub channels: Vec<Channel>,
    pub lambda: f64,
    /// Experimental: read `e_e` as dressed and add
    /// `λ² Σ_{j,ℓ} Σ⁺_j Σ⁻_ℓ ⟨f_j, f_ℓ⟩₋₁` to get the bare matrix.
    pub experimental_counterterm: bool,
}

impl GsbParams {
    pub fn dim_e(&self) -> usize {
        self.e_e.nrows()
    }

    pub fn dim_g(&self) -> usize {
        self.e_g.nrows()
    }
}

fn check_energy_matrix(name: &str, m: &DMatrix<C64>) -> Result<()> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::invalid(format!("{name} must be a nonempty square matrix")));
    }
    if n > MAX_SECTOR_DIM {
        return Err(Error::invalid(format!("{name} exceeds the sector cap {MAX_SECTOR_DIM}")));
    }
    let scale = m.iter().map(|v| v.norm()).fold(1.0, f64::max);
    for r in 0..n {
        for c in 0..n {
            if (m[(r, c)] - m[(c, r)].conj()).norm() > 1e-12 * scale {
                return Err(Error::invalid(format!("{name} is not Hermitian")));
            }
        }
    }
    let eig = SymmetricEigen::new(m.clone());
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -1e-12 * scale {
        return Err(Error::invalid(format!("{name} has a negative eigenvalue {min}")));
    }
    Ok(())
}

/// `(h_g − z)⁻¹` for `h_g = E_g ⊗ 1 + 1 ⊗ dΓ`.
#[derive(Debug, Clone)]
struct GroundInverse {
    /// `E_g = U diag(ev) U†`; `None` when `E_g` is already diagonal.
    vectors: Option<DMatrix<C64>>,
    values: Vec<f64>,
}

impl GroundInverse {
    fn new(e_g: &DMatrix<C64>) -> Self {
        let n = e_g.nrows();
        let diagonal = (0..n).all(|r| (0..n).all(|c| r == c || e_g[(r, c)] == C64::new(0.0, 0.0)));
        if diagonal {
            Self {
                vectors: None,
                values: (0..n).map(|b| e_g[(b, b)].re).collect(),
            }
        } else {
            let eig = SymmetricEigen::new(e_g.clone());
            Self {
                vectors: Some(eig.eigenvectors),
                values: eig.eigenvalues.iter().copied().collect(),
            }
        }
    }

    fn matrix(&self, energies: &[f64], z: C64) -> Result<SparseMatrix> {
        let d = energies.len();
        let n = self.values.len();
        let mut t = Vec::new();
        for k in 0..n {
            for (i, e) in energies.iter().enumerate() {
                let den = C64::new(self.values[k] + e, 0.0) - z;
                if den == C64::new(0.0, 0.0) {
                    return Err(crate::linalg::LinalgError::Singular { step: k * d + i }.into());
                }
                let inv = den.inv();
                match &self.vectors {
                    None => t.push((k * d + i, k * d + i, inv)),
                    Some(u) => {
                        for b in 0..n {
                            for b2 in 0..n {
                                let v = u[(b, k)] * u[(b2, k)].conj() * inv;
                                t.push((b * d + i, b2 * d + i, v));
                            }
                        }
                    }
                }
            }
        }
        Ok(SparseMatrix::from_triplets(n * d, n * d, t))
    }
}

#[derive(Debug, Clone)]
pub struct Gsb {
    params: GsbParams,
    energies: Vec<f64>,
    bare_e_e: DMatrix<C64>,
    /// `A_f = Σ_j Σ⁺_j ⊗ a(f_j)`, without `λ`.
    coupling: SparseMatrix,
    coupling_adj: SparseMatrix,
    ground: GroundInverse,
}

/// Result of evaluating the action formula on the parametrized domain.
#[derive(Debug, Clone)]
pub struct SingularAction {
    /// `((h_e − λ²S(−1))Φ_e + λAΦ_g, h_gΦ_g + λ(h_g+1)⁻¹A†Φ_e)`.
    pub formula: TwoBlockState,
    /// `H (Φ_e, Φ_g − λ(h_g+1)⁻¹A†Φ_e)`.
    pub matrix_action: TwoBlockState,
    /// Largest componentwise gap relative to the largest entry of `formula`.
    pub relative_gap: f64,
}

impl Gsb {
    pub fn new(params: GsbParams, grid: &ModeGrid, basis: &FockBasis) -> Result<Self> {
        check_energy_matrix("E_e", &params.e_e)?;
        check_energy_matrix("E_g", &params.e_g)?;
        if params.channels.is_empty() {
            return Err(Error::invalid("at least one channel is required"));
        }
        if !params.lambda.is_finite() {
            return Err(Error::invalid("lambda must be finite"));
        }
        let (de, dg) = (params.dim_e(), params.dim_g());
        for (j, ch) in params.channels.iter().enumerate() {
            if ch.sigma_plus.nrows() != de || ch.sigma_plus.ncols() != dg {
                return Err(Error::invalid(format!(
                    "channel {j}: Σ⁺ is {}x{}, expected {de}x{dg}",
                    ch.sigma_plus.nrows(),
                    ch.sigma_plus.ncols()
                )));
            }
        }
        let d = basis.dim();
        let mut t = Vec::new();
        for ch in &params.channels {
            let a = annihilator(&ch.f, grid, basis)?.into_matrix();
            for ea in 0..de {
                for gb in 0..dg {
                    let s = ch.sigma_plus[(ea, gb)];
                    if s == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for (r, c, v) in a.triplets() {
                        t.push((ea * d + r, gb * d + c, v * s));
                    }
                }
            }
        }
        let coupling = SparseMatrix::from_triplets(de * d, dg * d, t);
        let coupling_adj = coupling.adjoint();
        let bare_e_e = if params.experimental_counterterm {
            let mut shift = DMatrix::<C64>::zeros(de, de);
            for cj in &params.channels {
                for cl in &params.channels {
                    let overlap: C64 = (0..grid.len())
                        .map(|i| cj.f.values()[i].conj() * cl.f.values()[i] * (grid.weights()[i] / grid.omega()[i]))
                        .sum();
                    shift += &cj.sigma_plus * cl.sigma_plus.adjoint() * overlap;
                }
            }
            &params.e_e + shift * C64::new(params.lambda * params.lambda, 0.0)
        } else {
            params.e_e.clone()
        };
        let ground = GroundInverse::new(&params.e_g);
        Ok(Self {
            energies: basis.energies(grid),
            params,
            bare_e_e,
            coupling,
            coupling_adj,
            ground,
        })
    }

    pub fn params(&self) -> &GsbParams {
        &self.params
    }

    pub fn fock_dim(&self) -> usize {
        self.energies.len()
    }

    pub fn excited_dim(&self) -> usize {
        self.params.dim_e() * self.fock_dim()
    }

    pub fn ground_dim(&self) -> usize {
        self.params.dim_g() * self.fock_dim()
    }

    pub fn bare_e_e(&self) -> &DMatrix<C64> {
        &self.bare_e_e
    }

    /// `A_f` as a sparse map from the ground to the excited sector.
    pub fn coupling(&self) -> &SparseMatrix {
        &self.coupling
    }

    fn free_block(&self, e: &DMatrix<C64>) -> SparseMatrix {
        let d = self.fock_dim();
        let n = e.nrows();
        let mut t = Vec::new();
        for a in 0..n {
            for (i, en) in self.energies.iter().enumerate() {
                t.push((a * d + i, a * d + i, C64::new(e[(a, a)].re + en, 0.0)));
            }
            for a2 in 0..n {
                if a2 != a && e[(a, a2)] != C64::new(0.0, 0.0) {
                    for i in 0..d {
                        t.push((a * d + i, a2 * d + i, e[(a, a2)]));
                    }
                }
            }
        }
        SparseMatrix::from_triplets(n * d, n * d, t)
    }

    /// `h_e = E_e ⊗ 1 + 1 ⊗ dΓ` with the bare `E_e`.
    pub fn h_e(&self) -> SparseMatrix {
        self.free_block(&self.bare_e_e)
    }

    pub fn h_g(&self) -> SparseMatrix {
        self.free_block(&self.params.e_g)
    }

    pub fn assemble_gsb(&self) -> BlockHamiltonian {
        let ne = self.excited_dim();
        let n = ne + self.ground_dim();
        let lambda = self.params.lambda;
        let mut t: Vec<(usize, usize, C64)> = self.h_e().triplets().collect();
        t.extend(self.coupling.triplets().map(|(r, c, v)| (r, ne + c, v * lambda)));
        t.extend(self.coupling_adj.triplets().map(|(r, c, v)| (ne + r, c, v * lambda)));
        t.extend(self.h_g().triplets().map(|(r, c, v)| (ne + r, ne + c, v)));
        BlockHamiltonian::new(SparseMatrix::from_triplets(n, n, t), self.fock_dim())
    }

    /// `S(z) = A_f (h_g − z)⁻¹ A_f†` on the excited sector.
    pub fn gsb_sigma(&self, z: C64) -> Result<SparseMatrix> {
        let rg = self.ground.matrix(&self.energies, z)?;
        Ok(self.coupling.matmul(&rg).matmul(&self.coupling_adj))
    }

    /// `G(z) = h_e − z − λ² S(z)`.
    pub fn propagator(&self, z: C64) -> Result<SparseMatrix> {
        let l2 = self.params.lambda * self.params.lambda;
        Ok(self.h_e().shift(z).sub(&self.gsb_sigma(z)?.scale_real(l2)))
    }

    /// `(H − z)⁻¹ Ψ` by the block formula through `G(z)`.
    pub fn resolvent_apply(&self, z: C64, psi_e: &[C64], psi_g: &[C64]) -> Result<(TwoBlockState, SolveReport)> {
        if psi_e.len() != self.excited_dim() || psi_g.len() != self.ground_dim() {
            return Err(Error::invalid("state does not match the GSB sectors"));
        }
        let lambda = self.params.lambda;
        let rg = self.ground.matrix(&self.energies, z)?;
        let u = rg.matvec(psi_g);
        let au = self.coupling.matvec(&u);
        let rhs: Vec<C64> = psi_e.iter().zip(&au).map(|(p, v)| p - v * lambda).collect();
        let (x_e, report) = Factorized::new(self.propagator(z)?)?.solve(&rhs)?;
        let adx = self.coupling_adj.matvec(&x_e);
        let w: Vec<C64> = psi_g.iter().zip(&adx).map(|(p, v)| p - v * lambda).collect();
        let x_g = rg.matvec(&w);
        Ok((
            TwoBlockState {
                excited: x_e,
                ground: x_g,
            },
            report,
        ))
    }

    /// Evaluates the action formula on `(Φ_e, Φ_g − λ(h_g+1)⁻¹A†Φ_e)` and
    /// compares it with the plain matrix action.
    pub fn gsb_singular_action(&self, phi_e: &[C64], phi_g: &[C64]) -> Result<SingularAction> {
        if phi_e.len() != self.excited_dim() || phi_g.len() != self.ground_dim() {
            return Err(Error::invalid("state does not match the GSB sectors"));
        }
        let lambda = self.params.lambda;
        let minus_one = C64::new(-1.0, 0.0);
        let rg1 = self.ground.matrix(&self.energies, minus_one)?;
        let ad_phi = rg1.matvec(&self.coupling_adj.matvec(phi_e));
        let shifted_g: Vec<C64> = phi_g.iter().zip(&ad_phi).map(|(p, v)| p - v * lambda).collect();

        let s_phi = self.gsb_sigma(minus_one)?.matvec(phi_e);
        let he_phi = self.h_e().matvec(phi_e);
        let a_phi = self.coupling.matvec(phi_g);
        let excited = (0..phi_e.len())
            .map(|i| he_phi[i] - s_phi[i] * (lambda * lambda) + a_phi[i] * lambda)
            .collect();
        let hg_phi = self.h_g().matvec(phi_g);
        let ground = (0..phi_g.len()).map(|i| hg_phi[i] + ad_phi[i] * lambda).collect();
        let formula = TwoBlockState {
            excited,
            ground,
        };

        let mut flat = phi_e.to_vec();
        flat.extend_from_slice(&shifted_g);
        let out = self.assemble_gsb().matrix().matvec(&flat);
        let matrix_action = TwoBlockState {
            excited: out[..phi_e.len()].to_vec(),
            ground: out[phi_e.len()..].to_vec(),
        };
        let scale = formula
            .excited
            .iter()
            .chain(&formula.ground)
            .map(|v| v.norm())
            .fold(f64::MIN_POSITIVE, f64::max);
        let gap = formula
            .excited
            .iter()
            .chain(&formula.ground)
            .zip(matrix_action.excited.iter().chain(&matrix_action.ground))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        Ok(SingularAction {
            formula,
            matrix_action,
            relative_gap: gap / scale,
        })
    }
}
