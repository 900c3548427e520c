//! Two atoms on one field: sector layout, the empty ee–gg corners and a
//! block-tridiagonal solve across excitation sectors.

use spinboson_lab::fock::build_basis;
use spinboson_lab::modegrid::{build_grid, Dispersion, FormFactorRule, GridSpec, Quadrature};
use spinboson_lab::multiatom::{MultiAtom, MultiAtomParams};
use spinboson_lab::C64;

fn main() -> spinboson_lab::Result<()> {
    let grid = build_grid(&GridSpec {
        k_min: 0.5,
        k_max: 4.0,
        count: 4,
        dispersion: Dispersion::Linear,
        quadrature: Quadrature::Midpoint,
    })?;
    let basis = build_basis(grid.len(), 2)?;
    let f = FormFactorRule::power(-0.5).realize(&grid)?;
    let mut params = MultiAtomParams::uniform(2, 1.0, 0.0, f, 0.5);
    params.omega_e[1] = 1.2;
    let model = MultiAtom::assemble_multi(params, &grid, &basis)?;
    let s = model.sectors();
    for k in 0..=s.n_atoms() {
        let j = s.block_excitation(k);
        let labels: Vec<String> = s.sector(j).iter().map(|&m| s.label(m)).collect();
        println!("block {k}: {j} excited {labels:?}");
    }

    let h = model.to_sparse();
    let d = model.fock_dim();
    let corner = h.triplets().filter(|(r, c, _)| *r < d && *c >= 3 * d).count();
    println!("dim {}, nnz {}, entries in the ee-gg corner: {corner}", model.dim(), h.nnz());

    let mut psi = vec![C64::new(0.0, 0.0); model.dim()];
    psi[model.index(0b11, 0)] = C64::new(1.0, 0.0);
    for z in [C64::new(0.0, 1.0), C64::new(2.0, 0.1)] {
        let (x, report) = model.block_tridiag_resolvent(z, &psi)?;
        println!(
            "z = {z}: <ee,vac|R|ee,vac> = {:.8}, residual {:.1e}",
            x[model.index(0b11, 0)],
            report.residual
        );
    }
    Ok(())
}
