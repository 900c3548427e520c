//! A flat form factor needs a counterterm: along sharp cutoffs the dressed
//! vacuum propagator settles while the one at fixed bare energy drifts.

use spinboson_lab::fock::build_basis;
use spinboson_lab::modegrid::{build_grid, Dispersion, FormFactorRule, GridSpec, Quadrature};
use spinboson_lab::renorm::{build_family, counterterm_with_anchor, vacuum_propagator_element};
use spinboson_lab::sbmodel::{CountertermAnchor, SpinBoson, SpinBosonParams};
use spinboson_lab::C64;

fn main() -> spinboson_lab::Result<()> {
    let grid = build_grid(&GridSpec {
        k_min: 1.0,
        k_max: 1e4,
        count: 160,
        dispersion: Dispersion::Linear,
        quadrature: Quadrature::LogMidpoint,
    })?;
    let basis = build_basis(grid.len(), 1)?;
    let cutoffs: Vec<f64> = (0..=12).map(|j| 10f64.powf(1.0 + j as f64 / 4.0)).collect();
    let family = build_family(&FormFactorRule::power(0.0), &grid, &cutoffs)?;
    let (lambda, z) = (0.5, C64::new(0.0, 1.0));
    let schedule = counterterm_with_anchor(1.0, lambda, &family, &grid, CountertermAnchor::MinusOne);

    println!("{:>9} {:>10} {:>24} {:>24}", "Lambda", "bare", "dressed <R>", "fixed-bare <R>");
    for i in 0..family.len() {
        let dressed = vacuum_propagator_element(&schedule.model(&family, i, &grid, &basis)?, z)?;
        let fixed = SpinBoson::new(
            SpinBosonParams::regular(schedule.bare[0], lambda, family.realized(i).clone()),
            &grid,
            &basis,
        )?;
        let fixed = vacuum_propagator_element(&fixed, z)?;
        println!(
            "{:>9.1} {:>10.5} {:>24.8} {:>24.8}",
            cutoffs[i], schedule.bare[i], dressed, fixed
        );
    }
    Ok(())
}
