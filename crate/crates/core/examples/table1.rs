//! Classification of witness form factors from the divergence of their
//! norms and of the energy mean and variance in the excited vacuum.

use spinboson_lab::fock::build_basis;
use spinboson_lab::modegrid::{build_grid, decay_exponent, Dispersion, FormFactorRule, GridSpec, Quadrature};
use spinboson_lab::renorm::{table1_report, Table1Witness};

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
    let witnesses = [(-1.0, 2.0), (-0.5, 2.0), (0.0, 1.5), (0.0, 2.0)].map(|(p, s)| Table1Witness {
        rule: FormFactorRule::power(p),
        s,
    });
    let rows = table1_report(&witnesses, &grid, &cutoffs, 1.0, 2.0, &basis)?;
    println!("{:<8} {:<22} {:<17} {:<10} {:<10} {:<10}", "f", "class", "approximation", "coupling", "mean", "variance");
    for r in &rows {
        println!(
            "{:<8} {:<22} {:<17} {:<10} {:<10} {:<10}",
            r.witness,
            r.class_label,
            r.approximation,
            r.coupling,
            format!("{:?}", r.mean_verdict),
            format!("{:?}", r.variance_verdict)
        );
    }

    let flat = FormFactorRule::power(0.0).realize(&grid)?;
    for s in [1.25, 1.5, 1.75, 2.0] {
        let fit = decay_exponent(&flat, s, &grid, 64)?;
        println!("decay of f = 1 at s = {s}: p = {:+.3}, r in [{:.3}, {:.3}]", fit.p_fit, fit.r_min, fit.r_star);
    }
    Ok(())
}
