//! Hermitian Lanczos with full reorthogonalization, and power iteration for
//! operator norms.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{inner, norm, LinalgError, SparseMatrix, C64};

const LANCZOS_SEED: u64 = 0x1a2c_2005;

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<C64>,
    /// `‖A x − θ x‖` for the normalized Ritz vector.
    pub residual: f64,
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let v: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let nv = norm(&v);
    v.into_iter().map(|x| x / nv).collect()
}

fn orthogonalize(w: &mut [C64], basis: &[Vec<C64>]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for u in basis {
            let p = inner(u, w);
            for (wi, ui) in w.iter_mut().zip(u) {
                *wi -= p * ui;
            }
        }
    }
}

fn ritz(alpha: &[f64], beta: &[f64]) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    SymmetricEigen::new(t)
}

/// The `count` smallest eigenpairs of a Hermitian matrix.
///
/// Breakdowns restart from a fresh random vector orthogonal to the current
/// Krylov basis, so repeated eigenvalues are resolved once the basis grows
/// past the invariant subspace that produced them.
pub fn lowest_eigenpairs(a: &SparseMatrix, count: usize) -> Result<Vec<EigenPair>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let scale = a.max_abs().max(1.0);
    let defect = a.hermitian_defect();
    if defect > 1e-12 * scale {
        return Err(LinalgError::NotHermitian { defect });
    }
    let n = a.nrows();
    let count = count.min(n);
    if count == 0 {
        return Ok(Vec::new());
    }
    let tol = 1e-10 * scale;
    let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_SEED);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut v = random_unit(n, &mut rng);

    let converged = |alpha: &[f64], beta: &[f64]| -> bool {
        let eig = ritz(alpha, beta);
        let m = alpha.len();
        let last_beta = beta.get(m - 1).copied().unwrap_or(0.0);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        order
            .iter()
            .take(count)
            .all(|&i| (last_beta * eig.eigenvectors[(m - 1, i)]).abs() <= tol)
    };

    loop {
        let mut w = a.matvec(&v);
        let al = inner(&v, &w).re;
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi -= al * vi;
        }
        basis.push(v);
        alpha.push(al);
        orthogonalize(&mut w, &basis);
        let b = norm(&w);
        let m = basis.len();
        if m == n {
            beta.push(0.0);
            break;
        }
        if b <= 1e-12 * scale {
            let mut fresh = random_unit(n, &mut rng);
            orthogonalize(&mut fresh, &basis);
            let nf = norm(&fresh);
            beta.push(0.0);
            if nf < 1e-8 {
                break;
            }
            v = fresh.into_iter().map(|x| x / nf).collect();
        } else {
            beta.push(b);
            v = w.into_iter().map(|x| x / b).collect();
        }
        if m >= count && (m.is_multiple_of(10) || m == n) && converged(&alpha, &beta) {
            break;
        }
    }

    let eig = ritz(&alpha, &beta[..alpha.len() - 1]);
    let m = alpha.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut pairs = Vec::with_capacity(count);
    let mut worst: f64 = 0.0;
    for &i in order.iter().take(count) {
        let theta = eig.eigenvalues[i];
        let mut x = vec![C64::new(0.0, 0.0); n];
        for (k, vk) in basis.iter().enumerate() {
            let y = eig.eigenvectors[(k, i)];
            for (xi, vi) in x.iter_mut().zip(vk) {
                *xi += vi * y;
            }
        }
        let nx = norm(&x);
        for xi in x.iter_mut() {
            *xi /= nx;
        }
        let ax = a.matvec(&x);
        let residual = norm(&ax.iter().zip(&x).map(|(p, q)| p - q * theta).collect::<Vec<_>>());
        worst = worst.max(residual);
        pairs.push(EigenPair {
            value: theta,
            vector: x,
            residual,
        });
    }
    if worst > 1e-8 * scale {
        return Err(LinalgError::EigenNotConverged { residual: worst });
    }
    Ok(pairs)
}

/// Power-iteration estimate of `‖A‖₂` from `A` and `A†` applications.
pub fn spectral_norm_estimate<F, G, E>(
    apply: F,
    apply_adjoint: G,
    dim: usize,
    iterations: usize,
    seed: u64,
) -> Result<f64, E>
where
    F: Fn(&[C64]) -> Result<Vec<C64>, E>,
    G: Fn(&[C64]) -> Result<Vec<C64>, E>,
{
    if dim == 0 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = random_unit(dim, &mut rng);
    for _ in 0..iterations {
        let w = apply(&v)?;
        let u = apply_adjoint(&w)?;
        let nu = norm(&u);
        if nu == 0.0 {
            return Ok(0.0);
        }
        v = u.into_iter().map(|x| x / nu).collect();
    }
    Ok(norm(&apply(&v)?))
}
