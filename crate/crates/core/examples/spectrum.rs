//! Lowest eigenvalues of the spin–boson matrix by Lanczos, as the coupling
//! is switched on.

use spinboson_lab::fock::build_basis;
use spinboson_lab::linalg::lowest_eigenpairs;
use spinboson_lab::modegrid::{build_grid, Dispersion, FormFactorRule, GridSpec, Quadrature};
use spinboson_lab::sbmodel::{SpinBoson, SpinBosonParams};

fn main() -> spinboson_lab::Result<()> {
    let grid = build_grid(&GridSpec {
        k_min: 1.0,
        k_max: 3.0,
        count: 8,
        dispersion: Dispersion::Linear,
        quadrature: Quadrature::Midpoint,
    })?;
    let basis = build_basis(grid.len(), 2)?;
    let f = FormFactorRule::power(-0.5).realize(&grid)?;
    println!("{:>6}  lowest four eigenvalues", "lambda");
    for lambda in [0.0, 0.25, 0.5, 1.0, 2.0] {
        let model = SpinBoson::new(SpinBosonParams::regular(1.5, lambda, f.clone()), &grid, &basis)?;
        let pairs = lowest_eigenpairs(model.assemble_regular().matrix(), 4)?;
        let values: Vec<String> = pairs.iter().map(|p| format!("{:+.6}", p.value)).collect();
        println!("{lambda:>6.2}  {}", values.join("  "));
    }
    Ok(())
}
