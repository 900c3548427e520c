//! Rotating-wave spin–boson model on `C² ⊗ F ≅ F ⊕ F` (excited block first).
//!
//! `H = [[ω_e + dΓ, λ a(f)], [λ a†(f), ω_g + dΓ]]`. The resolvent is computed
//! through the propagator `G(z) = ω_e − z + dΓ − λ² S(z)` with
//! `S(z) = a(f) (ω_g + dΓ − z)⁻¹ a†(f)`; no monolithic solve is used.

use serde::{Deserialize, Serialize};

use crate::fieldops::{annihilator, FieldOperator};
use crate::fock::FockBasis;
use crate::linalg::{Factorized, LinalgError, SolveReport, SparseMatrix};
use crate::modegrid::{scale_norm_sq, FormFactor, ModeGrid};
use crate::{Error, Result, C64};

/// Where the renormalized self-energy is anchored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountertermAnchor {
    /// Counterterm `λ²‖f‖²₋₁ = λ² Σ w|f|²/ω`.
    #[default]
    ScaleNorm,
    /// Counterterm `λ² ⟨Ω, S(−1) Ω⟩ = λ² Σ w|f|²/(ω + 1)`.
    MinusOne,
}

/// Energy shift separating the bare from the dressed excitation energy.
pub fn counterterm(lambda: f64, f: &FormFactor, grid: &ModeGrid, anchor: CountertermAnchor) -> f64 {
    let norm_sq = match anchor {
        CountertermAnchor::ScaleNorm => scale_norm_sq(f, -1.0, grid),
        CountertermAnchor::MinusOne => (0..grid.len())
            .map(|i| grid.weights()[i] * f.values()[i].norm_sqr() / (grid.omega()[i] + 1.0))
            .sum(),
    };
    lambda * lambda * norm_sq
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinBosonParams {
    /// Bare excitation energy, or the dressed one when `renormalized`.
    pub omega_e: f64,
    pub omega_g: f64,
    pub lambda: f64,
    pub f: FormFactor,
    pub renormalized: bool,
    pub anchor: CountertermAnchor,
}

impl SpinBosonParams {
    pub fn regular(omega_e: f64, lambda: f64, f: FormFactor) -> Self {
        Self {
            omega_e,
            omega_g: 0.0,
            lambda,
            f,
            renormalized: false,
            anchor: CountertermAnchor::ScaleNorm,
        }
    }

    /// Dressed energy `omega_tilde`; the bare one is `omega_tilde + c`.
    pub fn renormalized(omega_tilde: f64, lambda: f64, f: FormFactor, anchor: CountertermAnchor) -> Self {
        Self {
            omega_e: omega_tilde,
            omega_g: 0.0,
            lambda,
            f,
            renormalized: true,
            anchor,
        }
    }
}

/// An excited and a ground Fock component.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoBlockState {
    pub excited: Vec<C64>,
    pub ground: Vec<C64>,
}

impl TwoBlockState {
    pub fn new(excited: Vec<C64>, ground: Vec<C64>) -> Self {
        assert_eq!(excited.len(), ground.len(), "two-block state: component lengths");
        Self { excited, ground }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![C64::new(0.0, 0.0); dim], vec![C64::new(0.0, 0.0); dim])
    }

    /// The excited atom in the boson vacuum.
    pub fn psi0(dim: usize) -> Self {
        let mut s = Self::zeros(dim);
        s.excited[0] = C64::new(1.0, 0.0);
        s
    }

    pub fn from_flat(v: &[C64]) -> Self {
        let d = v.len() / 2;
        assert_eq!(2 * d, v.len(), "two-block state: odd length");
        Self::new(v[..d].to_vec(), v[d..].to_vec())
    }

    pub fn to_flat(&self) -> Vec<C64> {
        let mut v = self.excited.clone();
        v.extend_from_slice(&self.ground);
        v
    }
}

/// A block operator on several copies of the Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockHamiltonian {
    matrix: SparseMatrix,
    fock_dim: usize,
}

impl BlockHamiltonian {
    pub fn new(matrix: SparseMatrix, fock_dim: usize) -> Self {
        assert_eq!(matrix.nrows() % fock_dim.max(1), 0, "block size");
        Self { matrix, fock_dim }
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> SparseMatrix {
        self.matrix
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn num_blocks(&self) -> usize {
        self.matrix.nrows() / self.fock_dim
    }

    /// Fock-space block `(i, j)`.
    pub fn block(&self, i: usize, j: usize) -> SparseMatrix {
        let d = self.fock_dim;
        self.matrix.submatrix(i * d..(i + 1) * d, j * d..(j + 1) * d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyStats {
    pub mean: f64,
    pub variance: f64,
}

/// Assembled spin–boson model with its field operators cached.
#[derive(Debug, Clone)]
pub struct SpinBoson {
    params: SpinBosonParams,
    bare_omega_e: f64,
    counterterm: f64,
    energies: Vec<f64>,
    a: SparseMatrix,
    ad: SparseMatrix,
}

impl SpinBoson {
    pub fn new(params: SpinBosonParams, grid: &ModeGrid, basis: &FockBasis) -> Result<Self> {
        for (name, v) in [
            ("omega_e", params.omega_e),
            ("omega_g", params.omega_g),
            ("lambda", params.lambda),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite")));
            }
        }
        let a = annihilator(&params.f, grid, basis)?.into_matrix();
        let ad = a.adjoint();
        let (bare_omega_e, counterterm) = if params.renormalized {
            let c = counterterm(params.lambda, &params.f, grid, params.anchor);
            (params.omega_e + c, c)
        } else {
            (params.omega_e, 0.0)
        };
        Ok(Self {
            params,
            bare_omega_e,
            counterterm,
            energies: basis.energies(grid),
            a,
            ad,
        })
    }

    pub fn params(&self) -> &SpinBosonParams {
        &self.params
    }

    /// The excitation energy that enters the matrix.
    pub fn bare_omega_e(&self) -> f64 {
        self.bare_omega_e
    }

    /// The shift `c` with `bare = dressed + c`; zero for a regular model.
    pub fn counterterm(&self) -> f64 {
        self.counterterm
    }

    pub fn fock_dim(&self) -> usize {
        self.energies.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.fock_dim()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn annihilator(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn creator(&self) -> &SparseMatrix {
        &self.ad
    }

    /// The block matrix with the bare excitation energy.
    pub fn assemble_regular(&self) -> BlockHamiltonian {
        let d = self.fock_dim();
        let lambda = self.params.lambda;
        let mut t = Vec::with_capacity(2 * d + 2 * self.a.nnz());
        for (i, e) in self.energies.iter().enumerate() {
            t.push((i, i, C64::new(self.bare_omega_e + e, 0.0)));
            t.push((d + i, d + i, C64::new(self.params.omega_g + e, 0.0)));
        }
        for (r, c, v) in self.a.triplets() {
            t.push((r, d + c, v * lambda));
        }
        for (r, c, v) in self.ad.triplets() {
            t.push((d + r, c, v * lambda));
        }
        BlockHamiltonian::new(SparseMatrix::from_triplets(2 * d, 2 * d, t), d)
    }

    /// Mean and variance of `H` in `Ψ₀` (excited atom, boson vacuum).
    pub fn psi0_energy_stats(&self) -> EnergyStats {
        let h = self.assemble_regular();
        let hp = h.matrix().matvec(&TwoBlockState::psi0(self.fock_dim()).to_flat());
        let mean = hp[0].re;
        let variance = hp
            .iter()
            .enumerate()
            .map(|(i, v)| if i == 0 { (v - mean).norm_sqr() } else { v.norm_sqr() })
            .sum();
        EnergyStats { mean, variance }
    }

    /// `(ω_g + dΓ − z)⁻¹` as a diagonal.
    fn ground_inverse(&self, z: C64) -> Result<Vec<C64>> {
        self.energies
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let d = C64::new(self.params.omega_g + e, 0.0) - z;
                if d == C64::new(0.0, 0.0) {
                    Err(LinalgError::Singular { step: i }.into())
                } else {
                    Ok(d.inv())
                }
            })
            .collect()
    }

    /// `S(z) = a(f) (ω_g + dΓ − z)⁻¹ a†(f)` on the excited block.
    pub fn sigma_f(&self, z: C64) -> Result<FieldOperator> {
        let inv = SparseMatrix::diagonal(&self.ground_inverse(z)?);
        Ok(FieldOperator::new(self.a.matmul(&inv).matmul(&self.ad), 0))
    }

    /// `G(z) = ω_e − z + dΓ − λ² S(z)` with the bare `ω_e`.
    pub fn propagator(&self, z: C64) -> Result<SparseMatrix> {
        let diag: Vec<C64> = self
            .energies
            .iter()
            .map(|e| C64::new(self.bare_omega_e + e, 0.0) - z)
            .collect();
        let l2 = self.params.lambda * self.params.lambda;
        Ok(SparseMatrix::diagonal(&diag).sub(&self.sigma_f(z)?.into_matrix().scale_real(l2)))
    }

    pub fn propagator_inverse_apply(&self, z: C64, psi_e: &[C64]) -> Result<(Vec<C64>, SolveReport)> {
        Ok(Factorized::new(self.propagator(z)?)?.solve(psi_e)?)
    }

    /// Factorizes the propagator once for repeated resolvent applications.
    pub fn resolvent(&self, z: C64) -> Result<Resolvent<'_>> {
        Ok(Resolvent {
            model: self,
            ground_inv: self.ground_inverse(z)?,
            propagator: Factorized::new(self.propagator(z)?)?,
        })
    }

    /// `(H − z)⁻¹ Ψ` through the propagator.
    pub fn resolvent_apply(&self, z: C64, psi: &TwoBlockState) -> Result<(TwoBlockState, SolveReport)> {
        self.resolvent(z)?.apply(psi)
    }

    /// `−λ (dΓ + 1)⁻¹ a†(f) Φ_e`.
    pub fn domain_shift(&self, phi_e: &[C64]) -> Vec<C64> {
        let lambda = self.params.lambda;
        self.ad
            .matvec(phi_e)
            .into_iter()
            .zip(&self.energies)
            .map(|(v, e)| -(v * lambda) / (e + 1.0))
            .collect()
    }

    /// Right-hand side of the action formula on the parametrized domain:
    /// `((ω_e + dΓ − λ²S(−1))Φ_e + λ a Φ_g, (ω_g + dΓ)Φ_g + λ(dΓ+1)⁻¹ a† Φ_e)`,
    /// which for `ω_g = 0` equals `H (Φ_e, Φ_g + domain_shift(Φ_e))`.
    pub fn singular_action(&self, phi_e: &[C64], phi_g: &[C64]) -> Result<TwoBlockState> {
        let lambda = self.params.lambda;
        let s = self.sigma_f(C64::new(-1.0, 0.0))?;
        let s_phi = s.apply(phi_e);
        let a_phi = self.a.matvec(phi_g);
        let excited = (0..self.fock_dim())
            .map(|i| {
                (self.bare_omega_e + self.energies[i]) * phi_e[i] - s_phi[i] * (lambda * lambda)
                    + a_phi[i] * lambda
            })
            .collect();
        let ad_phi = self.ad.matvec(phi_e);
        let ground = (0..self.fock_dim())
            .map(|i| {
                let e = self.energies[i];
                (self.params.omega_g + e) * phi_g[i] + ad_phi[i] * lambda / (e + 1.0)
            })
            .collect();
        Ok(TwoBlockState::new(excited, ground))
    }
}

/// `(H − z)⁻¹` with the propagator factorized.
#[derive(Debug, Clone)]
pub struct Resolvent<'m> {
    model: &'m SpinBoson,
    ground_inv: Vec<C64>,
    propagator: Factorized,
}

impl Resolvent<'_> {
    pub fn apply(&self, psi: &TwoBlockState) -> Result<(TwoBlockState, SolveReport)> {
        let m = self.model;
        let d = m.fock_dim();
        if psi.excited.len() != d || psi.ground.len() != d {
            return Err(Error::invalid("state does not match the model's Fock space"));
        }
        let lambda = m.params.lambda;
        // u = D⁻¹ Ψ_g
        let u: Vec<C64> = psi.ground.iter().zip(&self.ground_inv).map(|(p, g)| p * g).collect();
        // x_e = G⁻¹ (Ψ_e − λ a u)
        let au = m.a.matvec(&u);
        let rhs: Vec<C64> = psi.excited.iter().zip(&au).map(|(p, v)| p - v * lambda).collect();
        let (x_e, report) = self.propagator.solve(&rhs)?;
        // x_g = u − λ D⁻¹ a† x_e
        let adx = m.ad.matvec(&x_e);
        let x_g = (0..d)
            .map(|i| u[i] - adx[i] * lambda * self.ground_inv[i])
            .collect();
        Ok((TwoBlockState::new(x_e, x_g), report))
    }

    pub fn apply_flat(&self, v: &[C64]) -> Result<Vec<C64>> {
        Ok(self.apply(&TwoBlockState::from_flat(v))?.0.to_flat())
    }
}
