//! The shifted domain `(Φ_e, Φ_g − λ(dΓ+1)⁻¹a†Φ_e)` and the action formula
//! on it, compared with applying the matrix directly.

use spinboson_lab::fock::build_basis;
use spinboson_lab::modegrid::{build_grid, Dispersion, FormFactorRule, GridSpec, Quadrature};
use spinboson_lab::sbmodel::{SpinBoson, SpinBosonParams};
use spinboson_lab::C64;

fn main() -> spinboson_lab::Result<()> {
    let grid = build_grid(&GridSpec {
        k_min: 1.0,
        k_max: 100.0,
        count: 20,
        dispersion: Dispersion::Linear,
        quadrature: Quadrature::LogMidpoint,
    })?;
    let basis = build_basis(grid.len(), 2)?;
    let f = FormFactorRule::power(-0.5).realize(&grid)?;
    let model = SpinBoson::new(SpinBosonParams::regular(1.0, 0.7, f), &grid, &basis)?;
    let d = model.fock_dim();

    let phi_e: Vec<C64> = (0..d).map(|i| C64::new(1.0 / (1.0 + i as f64), 0.0)).collect();
    let phi_g: Vec<C64> = (0..d).map(|i| C64::new(0.0, (i as f64).sin())).collect();
    let shift = model.domain_shift(&phi_e);

    let mut v = phi_e.clone();
    v.extend(phi_g.iter().zip(&shift).map(|(a, b)| a + b));
    let direct = model.assemble_regular().matrix().matvec(&v);
    let formula = model.singular_action(&phi_e, &phi_g)?.to_flat();
    let gap = direct.iter().zip(&formula).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let size = formula.iter().map(|x| x.norm()).fold(0.0, f64::max);
    println!("dim {}, |shift| = {:.6}", 2 * d, shift.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt());
    println!("largest entry {size:.4}, largest gap {gap:.2e}");
    Ok(())
}
