//! `a(f)`, `a†(f)` and `dΓ(ω)` as sparse matrices, with the canonical
//! commutator checked on a random state below the truncation ceiling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinboson_lab::fieldops::{annihilator, creator, dgamma, operator_scale_norm};
use spinboson_lab::fock::build_basis;
use spinboson_lab::modegrid::{build_grid, scale_norm, Dispersion, FormFactor, FormFactorRule, GridSpec, Quadrature};
use spinboson_lab::C64;

fn main() -> spinboson_lab::Result<()> {
    let grid = build_grid(&GridSpec {
        k_min: 0.5,
        k_max: 4.0,
        count: 5,
        dispersion: Dispersion::Linear,
        quadrature: Quadrature::Midpoint,
    })?;
    let basis = build_basis(grid.len(), 3)?;
    let f = FormFactorRule::power(-0.5).realize(&grid)?;
    let g = FormFactor::from_fn(&grid, "e^{ik}", |k| C64::new(k.cos(), k.sin()))?;

    let a = annihilator(&f, &grid, &basis)?;
    let ad = creator(&g, &grid, &basis)?;
    let d = dgamma(&grid, &basis)?;
    println!("dim {}, nnz a(f) = {}, nnz dGamma = {}", basis.dim(), a.matrix().nnz(), d.matrix().nnz());

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let top = basis.sector_offsets()[basis.n_max()];
    let psi: Vec<C64> = (0..basis.dim())
        .map(|i| if i < top { C64::new(rng.gen(), rng.gen()) } else { C64::new(0.0, 0.0) })
        .collect();
    let lhs = a.apply(&ad.apply(&psi));
    let rhs = ad.apply(&a.apply(&psi));
    let fg = grid.inner(&f, &g);
    let err = (0..psi.len())
        .map(|i| (lhs[i] - rhs[i] - fg * psi[i]).norm())
        .fold(0.0, f64::max);
    println!("<f,g> = {fg:.6}, commutator defect {err:.2e}");

    let est = operator_scale_norm(&a, 1.0, 0.0, &grid, &basis, 2)?;
    println!("||a(f)||_(F_1 -> F_0) ~ {est:.6} <= ||f||_-1 = {:.6}", scale_norm(&f, -1.0, &grid));

    println!("first triplets of a(f):");
    let mut out = Vec::new();
    a.write_triplets(&mut out)?;
    for line in String::from_utf8_lossy(&out).lines().take(4) {
        println!("  {line}");
    }
    Ok(())
}
