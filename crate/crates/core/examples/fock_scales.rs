//! Truncated Fock space: dimensions, basis order and the `F_s` scale norms.

use spinboson_lab::fock::{build_basis, fock_dimension, fock_scale_norm, FockState};
use spinboson_lab::modegrid::{build_grid, Dispersion, GridSpec, Quadrature};
use spinboson_lab::C64;

fn main() -> spinboson_lab::Result<()> {
    let grid = build_grid(&GridSpec {
        k_min: 1.0,
        k_max: 3.0,
        count: 4,
        dispersion: Dispersion::Linear,
        quadrature: Quadrature::Midpoint,
    })?;
    let basis = build_basis(grid.len(), 2)?;
    println!("M = {}, n_max = {}, dim = {}", basis.modes(), basis.n_max(), basis.dim());
    for n in 0..=basis.n_max() {
        println!("  sector {n}: {:?}", basis.sector_range(n));
    }
    for i in basis.sector_range(2).take(5) {
        println!("  state {i:>2}: modes {:?}, occupations {:?}", basis.mode_list(i), basis.occupations(i));
    }
    println!("dim(M=50, n_max=3) = {:?}", fock_dimension(50, 3));

    // equal weight on the vacuum and on two bosons in the top mode
    let mut coeffs = vec![C64::new(0.0, 0.0); basis.dim()];
    coeffs[0] = C64::new(1.0, 0.0);
    coeffs[basis.index_of_occupations(&[0, 0, 0, 2]).unwrap()] = C64::new(1.0, 0.0);
    let psi = FockState::new(&basis, coeffs)?;
    for s in [-1.0, 0.0, 1.0, 2.0] {
        println!("||psi||_F_{s:+} = {:.6}", fock_scale_norm(&psi, s, &grid));
    }
    Ok(())
}
