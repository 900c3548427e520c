//! Resolvent of the regular spin–boson model through the excited-block
//! propagator, checked against a dense inverse.

use spinboson_lab::fock::build_basis;
use spinboson_lab::linalg::{dense_inverse_oracle, norm};
use spinboson_lab::modegrid::{build_grid, Dispersion, FormFactorRule, GridSpec, Quadrature};
use spinboson_lab::sbmodel::{SpinBoson, SpinBosonParams, TwoBlockState};
use spinboson_lab::C64;

fn main() -> spinboson_lab::Result<()> {
    let grid = build_grid(&GridSpec {
        k_min: 0.5,
        k_max: 4.0,
        count: 6,
        dispersion: Dispersion::Linear,
        quadrature: Quadrature::Midpoint,
    })?;
    let basis = build_basis(grid.len(), 3)?;
    let f = FormFactorRule::power(-0.5).realize(&grid)?;
    let model = SpinBoson::new(SpinBosonParams::regular(1.5, 0.8, f), &grid, &basis)?;
    let h = model.assemble_regular();
    println!("H: {}x{}, nnz {}", h.matrix().nrows(), h.matrix().ncols(), h.matrix().nnz());

    let psi0 = TwoBlockState::psi0(model.fock_dim());
    for z in [C64::new(0.0, 1.0), C64::new(1.5, 0.1), C64::new(-1.0, 0.0)] {
        let (x, report) = model.resolvent_apply(z, &psi0)?;
        let dense = dense_inverse_oracle(&h.matrix().shift(z))?;
        let col: Vec<C64> = dense.column(0).iter().copied().collect();
        let diff: Vec<C64> = x.to_flat().iter().zip(&col).map(|(a, b)| a - b).collect();
        println!(
            "z = {z:>10.3}: <psi0|R|psi0> = {:.8}, vs dense {:.1e}, solve residual {:.1e}",
            x.excited[0],
            norm(&diff) / norm(&col),
            report.residual
        );
    }
    Ok(())
}
