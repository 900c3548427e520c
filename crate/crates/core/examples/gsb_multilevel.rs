//! A two-sector atom with two excited and two ground levels, coupled through
//! two channels; resolvent through the propagator and the action identity.

use nalgebra::DMatrix;
use spinboson_lab::fock::build_basis;
use spinboson_lab::gsbmodel::{Channel, Gsb, GsbParams};
use spinboson_lab::linalg::lowest_eigenpairs;
use spinboson_lab::modegrid::{build_grid, Dispersion, FormFactorRule, GridSpec, Quadrature};
use spinboson_lab::C64;

fn real(rows: usize, cols: usize, v: &[f64]) -> DMatrix<C64> {
    DMatrix::from_iterator(cols, rows, v.iter().map(|x| C64::new(*x, 0.0))).transpose()
}

fn main() -> spinboson_lab::Result<()> {
    let grid = build_grid(&GridSpec {
        k_min: 0.5,
        k_max: 4.0,
        count: 5,
        dispersion: Dispersion::Linear,
        quadrature: Quadrature::Midpoint,
    })?;
    let basis = build_basis(grid.len(), 2)?;
    let params = GsbParams {
        e_e: real(2, 2, &[1.0, 0.1, 0.1, 1.3]),
        e_g: real(2, 2, &[0.1, 0.1, 0.1, 0.4]),
        channels: vec![
            Channel {
                sigma_plus: real(2, 2, &[1.0, 0.0, 0.0, 0.5]),
                f: FormFactorRule::power(-0.5).realize(&grid)?,
            },
            Channel {
                sigma_plus: real(2, 2, &[0.0, 0.3, 0.3, 0.0]),
                f: FormFactorRule::power(0.0).realize(&grid)?,
            },
        ],
        lambda: 0.6,
        experimental_counterterm: false,
    };
    let model = Gsb::new(params, &grid, &basis)?;
    let h = model.assemble_gsb();
    println!("excited {} + ground {} = {}", model.excited_dim(), model.ground_dim(), h.matrix().nrows());

    let mut psi_e = vec![C64::new(0.0, 0.0); model.excited_dim()];
    psi_e[0] = C64::new(1.0, 0.0);
    let psi_g = vec![C64::new(0.0, 0.0); model.ground_dim()];
    for z in [C64::new(0.0, 1.0), C64::new(1.0, 0.2)] {
        let (x, report) = model.resolvent_apply(z, &psi_e, &psi_g)?;
        println!("z = {z}: vacuum element {:.8}, residual {:.1e}", x.excited[0], report.residual);
    }
    let low = lowest_eigenpairs(h.matrix(), 3)?;
    println!("lowest eigenvalues: {:?}", low.iter().map(|p| format!("{:.6}", p.value)).collect::<Vec<_>>());

    let phi_e: Vec<C64> = (0..model.excited_dim()).map(|i| C64::new((i as f64).cos(), 0.1)).collect();
    let phi_g: Vec<C64> = (0..model.ground_dim()).map(|i| C64::new(0.0, (i as f64).sin())).collect();
    let act = model.gsb_singular_action(&phi_e, &phi_g)?;
    println!("action identity gap {:.2e}", act.relative_gap);
    Ok(())
}
