//! Restarted GMRES with right Jacobi preconditioning.

use super::{norm, SparseMatrix, C64};

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub restart: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            restart: 60,
            max_iterations: 20_000,
            tolerance: 1e-13,
        }
    }
}

/// Returns the iterate and the number of inner iterations performed.
///
/// The relative residual reported by the caller is recomputed from scratch;
/// the Givens estimate here only drives termination.
pub fn gmres(a: &SparseMatrix, b: &[C64], opts: GmresOptions) -> (Vec<C64>, usize) {
    let n = b.len();
    let zero = C64::new(0.0, 0.0);
    let inv_diag: Vec<C64> = a
        .diagonal_entries()
        .into_iter()
        .map(|d| if d == zero { C64::new(1.0, 0.0) } else { d.inv() })
        .collect();
    let precond = |v: &[C64]| -> Vec<C64> { v.iter().zip(&inv_diag).map(|(x, d)| x * d).collect() };

    let bnorm = norm(b);
    let mut x = vec![zero; n];
    if bnorm == 0.0 {
        return (x, 0);
    }
    let m = opts.restart.max(1).min(n.max(1));
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        let ax = a.matvec(&x);
        let r: Vec<C64> = b.iter().zip(&ax).map(|(u, v)| u - v).collect();
        let beta = norm(&r);
        if beta / bnorm <= opts.tolerance {
            break;
        }
        let mut basis: Vec<Vec<C64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![zero; m]; m + 1];
        let mut cs = vec![zero; m];
        let mut sn = vec![zero; m];
        let mut g = vec![zero; m + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k_used = 0;

        for k in 0..m {
            iterations += 1;
            let mut w = a.matvec(&precond(&basis[k]));
            for (i, v) in basis.iter().enumerate() {
                let hik: C64 = v.iter().zip(&w).map(|(p, q)| p.conj() * q).sum();
                h[i][k] = hik;
                for (wj, vj) in w.iter_mut().zip(v) {
                    *wj -= hik * vj;
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = C64::new(hn, 0.0);
            for i in 0..k {
                let t = cs[i].conj() * h[i][k] + sn[i].conj() * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let (c, s) = givens(h[k][k], h[k + 1][k]);
            cs[k] = c;
            sn[k] = s;
            h[k][k] = c.conj() * h[k][k] + s.conj() * h[k + 1][k];
            h[k + 1][k] = zero;
            g[k + 1] = -s * g[k];
            g[k] = c.conj() * g[k];
            k_used = k + 1;
            if g[k + 1].norm() / bnorm <= opts.tolerance || hn == 0.0 || iterations >= opts.max_iterations {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }

        let mut y = vec![zero; k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for j in i + 1..k_used {
                acc -= h[i][j] * y[j];
            }
            y[i] = acc / h[i][i];
        }
        let mut update = vec![zero; n];
        for (j, yj) in y.iter().enumerate() {
            for (u, v) in update.iter_mut().zip(&basis[j]) {
                *u += yj * v;
            }
        }
        for (xi, ui) in x.iter_mut().zip(precond(&update)) {
            *xi += ui;
        }
    }
    (x, iterations)
}

/// Complex Givens rotation zeroing `b` against `a`.
fn givens(a: C64, b: C64) -> (C64, C64) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == 0.0 {
        return (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    }
    if na == 0.0 {
        return (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    }
    let r = (na * na + nb * nb).sqrt();
    let c = a / r;
    let s = b / r;
    (c, s)
}
