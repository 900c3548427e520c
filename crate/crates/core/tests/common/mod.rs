//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's basis ranking or operator assembly.
#![allow(dead_code)]

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinboson_lab::fock::FockBasis;
use spinboson_lab::modegrid::{build_grid, Dispersion, FormFactor, GridSpec, ModeGrid, Quadrature};
use spinboson_lab::C64;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn grid(k_min: f64, k_max: f64, count: usize, quadrature: Quadrature) -> ModeGrid {
    build_grid(&GridSpec {
        k_min,
        k_max,
        count,
        dispersion: Dispersion::Linear,
        quadrature,
    })
    .unwrap()
}

pub fn midpoint(k_min: f64, k_max: f64, count: usize) -> ModeGrid {
    grid(k_min, k_max, count, Quadrature::Midpoint)
}

/// Log-midpoint grid on `[1, 10^decades]` with `per_decade` cells per decade.
pub fn log_grid(decades: f64, per_decade: usize) -> ModeGrid {
    grid(
        1.0,
        10f64.powf(decades),
        (decades * per_decade as f64).round() as usize,
        Quadrature::LogMidpoint,
    )
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect()
}

pub fn random_form_factor(rng: &mut ChaCha8Rng, grid: &ModeGrid) -> FormFactor {
    FormFactor::new(random_vec(rng, grid.len()), "random").unwrap()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// All occupation vectors with total at most `n_max`, sector by sector;
/// inside a sector, ordered by the sorted list of occupied mode indices.
/// Built by brute force over the full product space.
pub fn brute_occupations(modes: usize, n_max: usize) -> Vec<Vec<u32>> {
    let mut all: Vec<Vec<u32>> = Vec::new();
    let total = (n_max + 1).pow(modes as u32);
    for code in 0..total {
        let mut occ = vec![0u32; modes];
        let mut c = code;
        for o in occ.iter_mut() {
            *o = (c % (n_max + 1)) as u32;
            c /= n_max + 1;
        }
        if occ.iter().sum::<u32>() as usize <= n_max {
            all.push(occ);
        }
    }
    let list = |occ: &Vec<u32>| -> Vec<u32> {
        occ.iter()
            .enumerate()
            .flat_map(|(m, &n)| std::iter::repeat_n(m as u32, n as usize))
            .collect()
    };
    all.sort_by(|a, b| {
        let (sa, sb) = (a.iter().sum::<u32>(), b.iter().sum::<u32>());
        sa.cmp(&sb).then_with(|| list(a).cmp(&list(b)))
    });
    all
}

/// `b_m` on `(C^{n+1})^{⊗M}` (mode 0 slowest), restricted to the states of
/// `basis` by occupation lookup. Returns one dense matrix per mode.
pub fn kron_lowering(basis: &FockBasis) -> Vec<DMatrix<C64>> {
    let (modes, n) = (basis.modes(), basis.n_max());
    let local = n + 1;
    let single = DMatrix::from_fn(local, local, |r, col| if col == r + 1 { c((col as f64).sqrt()) } else { c(0.0) });
    let eye = DMatrix::<C64>::identity(local, local);
    let full_dim = local.pow(modes as u32);
    // product-space index of each basis state
    let pos: Vec<usize> = (0..basis.dim())
        .map(|i| basis.occupations(i).iter().fold(0usize, |acc, &o| acc * local + o as usize))
        .collect();
    (0..modes)
        .map(|m| {
            let mut op = DMatrix::<C64>::identity(1, 1);
            for k in 0..modes {
                op = op.kronecker(if k == m { &single } else { &eye });
            }
            assert_eq!(op.nrows(), full_dim);
            DMatrix::from_fn(basis.dim(), basis.dim(), |r, col| op[(pos[r], pos[col])])
        })
        .collect()
}

/// Dense `a(f) = Σ √w conj(f) b_m` from the Kronecker construction.
pub fn dense_annihilator(f: &FormFactor, grid: &ModeGrid, lowering: &[DMatrix<C64>]) -> DMatrix<C64> {
    let d = lowering[0].nrows();
    let mut a = DMatrix::<C64>::zeros(d, d);
    for (m, b) in lowering.iter().enumerate() {
        a += b * (f.values()[m].conj() * grid.weights()[m].sqrt());
    }
    a
}

/// Dense `dΓ(ω) = Σ ω_m b_m† b_m`.
pub fn dense_dgamma(grid: &ModeGrid, lowering: &[DMatrix<C64>]) -> DMatrix<C64> {
    let d = lowering[0].nrows();
    let mut h = DMatrix::<C64>::zeros(d, d);
    for (m, b) in lowering.iter().enumerate() {
        h += b.adjoint() * b * c(grid.omega()[m]);
    }
    h
}

/// Dense spin–boson matrix `[[ω_e + dΓ, λa], [λa†, ω_g + dΓ]]`.
pub fn dense_spin_boson(omega_e: f64, omega_g: f64, lambda: f64, a: &DMatrix<C64>, dgamma: &DMatrix<C64>) -> DMatrix<C64> {
    let d = a.nrows();
    let eye = DMatrix::<C64>::identity(d, d);
    let mut h = DMatrix::<C64>::zeros(2 * d, 2 * d);
    h.view_mut((0, 0), (d, d)).copy_from(&(dgamma + &eye * c(omega_e)));
    h.view_mut((d, d), (d, d)).copy_from(&(dgamma + &eye * c(omega_g)));
    h.view_mut((0, d), (d, d)).copy_from(&(a * c(lambda)));
    h.view_mut((d, 0), (d, d)).copy_from(&(a.adjoint() * c(lambda)));
    h
}

/// Value of the symmetric kernel `ψ^{(n)}(k_1..k_n)` at the grid points of a
/// basis state, given its coefficient in the orthonormal occupation basis:
/// `coeff · √(Π n_j! / n!) / Π w_j^{n_j/2}`.
pub fn kernel_value(coeff: C64, occ: &[u32], grid: &ModeGrid) -> C64 {
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    let n: u32 = occ.iter().sum();
    let mut scale = (occ.iter().map(|&o| fact(o)).product::<f64>() / fact(n)).sqrt();
    for (m, &o) in occ.iter().enumerate() {
        scale /= grid.weights()[m].powf(o as f64 / 2.0);
    }
    coeff * scale
}

/// Occupation → index map of a basis, for kernel-level checks.
pub fn occupation_index(basis: &FockBasis) -> HashMap<Vec<u32>, usize> {
    (0..basis.dim()).map(|i| (basis.occupations(i), i)).collect()
}
