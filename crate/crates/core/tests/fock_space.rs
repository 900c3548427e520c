mod common;

use common::*;
use proptest::prelude::*;
use spinboson_lab::fock::{build_basis, fock_dimension, fock_scale_norm, vacuum, FockBasis, FockState};
use spinboson_lab::modegrid::{FormFactor, ModeGrid};
use spinboson_lab::C64;

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn dimensions() {
    assert_eq!(build_basis(1, 3).unwrap().dim(), 4);
    assert_eq!(build_basis(3, 2).unwrap().dim(), 10);
    let b = build_basis(8, 4).unwrap();
    assert_eq!(b.dim(), 495);
    let sizes: Vec<usize> = (0..=4).map(|n| b.sector_range(n).len()).collect();
    assert_eq!(sizes, vec![1, 8, 36, 120, 330]);
    for m in 1..7 {
        for n in 0..5 {
            let by_sum: usize = (0..=n).map(|k| binomial(m + k - 1, k)).sum();
            assert_eq!(fock_dimension(m, n), Some(by_sum));
            assert_eq!(fock_dimension(m, n), Some(binomial(m + n, n)));
        }
    }
}

#[test]
fn vacuum_sector_is_the_empty_occupation() {
    let b = build_basis(5, 3).unwrap();
    assert_eq!(b.sector_range(0), 0..1);
    assert_eq!(b.occupations(0), vec![0; 5]);
    assert!(b.mode_list(0).is_empty());
}

#[test]
fn order_matches_brute_force_enumeration() {
    for (m, n) in [(1, 4), (2, 3), (3, 3), (4, 2), (5, 3)] {
        let b = build_basis(m, n).unwrap();
        let brute = brute_occupations(m, n);
        assert_eq!(b.dim(), brute.len());
        for (i, occ) in brute.iter().enumerate() {
            assert_eq!(&b.occupations(i), occ, "state {i} of (M={m}, n={n})");
            assert_eq!(b.index_of_occupations(occ), Some(i));
        }
    }
}

#[test]
fn dimension_cap_is_a_sizing_error() {
    let err = FockBasis::with_cap(50, 6, 1000).unwrap_err();
    assert!(matches!(err, spinboson_lab::Error::TooLarge { .. }), "{err}");
    assert!(build_basis(0, 2).is_err());
}

#[test]
fn vacuum_norms() {
    let g = midpoint(1.0, 3.0, 4);
    let b = build_basis(4, 2).unwrap();
    let v = vacuum(&b);
    assert_eq!(v.norm(), 1.0);
    for s in [-2.0, -1.0, 0.0, 0.5, 1.0, 2.0] {
        assert_eq!(fock_scale_norm(&v, s, &g), 1.0);
    }
}

#[test]
fn one_boson_eigenstate_scale_norm() {
    let g = ModeGrid::from_parts(vec![1.0, 2.0], vec![1.0, 1.0], vec![1.5, 2.0]).unwrap();
    let b = build_basis(2, 2).unwrap();
    let mut coeffs = vec![c(0.0); b.dim()];
    coeffs[b.index_of_occupations(&[1, 0]).unwrap()] = c(1.0);
    let psi = FockState::new(&b, coeffs).unwrap();
    assert_eq!(fock_scale_norm(&psi, 2.0, &g), 2.5);
}

#[test]
fn text_round_trip() {
    let g = midpoint(1.0, 2.0, 3);
    let b = build_basis(g.len(), 2).unwrap();
    let mut r = rng(4);
    let psi = FockState::new(&b, random_vec(&mut r, b.dim())).unwrap();
    let mut text = Vec::new();
    psi.write_text(&mut text).unwrap();
    let first = String::from_utf8(text.clone()).unwrap();
    assert_eq!(first.lines().count(), b.dim());
    assert!(first.lines().next().unwrap().starts_with("0 0 0 "));
    let back = FockState::read_text(&b, text.as_slice()).unwrap();
    assert_eq!(back.coeffs(), psi.coeffs());
    assert!(FockState::read_text(&b, "3 0 0 1 0\n".as_bytes()).is_err());
    assert!(FockState::read_text(&b, "1 0 1 0\n".as_bytes()).is_err());
}

fn setup(m: usize, n: usize, seed: u64) -> (ModeGrid, FockBasis, Vec<C64>, Vec<C64>) {
    let g = midpoint(0.5, 4.0, m);
    let b = build_basis(m, n).unwrap();
    let mut r = rng(seed);
    let psi = random_vec(&mut r, b.dim());
    let phi = random_vec(&mut r, b.dim());
    (g, b, psi, phi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scale_zero_is_the_plain_norm(m in 1usize..5, n in 0usize..4, seed in any::<u64>()) {
        let (g, b, psi, _) = setup(m, n, seed);
        let st = FockState::new(&b, psi.clone()).unwrap();
        prop_assert!((fock_scale_norm(&st, 0.0, &g) - norm(&psi)).abs() <= 1e-15 * norm(&psi));
    }

    #[test]
    fn duality_pairing(m in 1usize..5, n in 0usize..4, seed in any::<u64>(), s in 0.1f64..2.0) {
        let (g, b, psi, phi) = setup(m, n, seed);
        let a = FockState::new(&b, psi.clone()).unwrap();
        let p = FockState::new(&b, phi.clone()).unwrap();
        let lhs = inner(&psi, &phi).norm();
        let rhs = fock_scale_norm(&a, -s, &g) * fock_scale_norm(&p, s, &g);
        prop_assert!(lhs <= rhs * (1.0 + 1e-14));
    }

    #[test]
    fn scale_norms_are_monotone(m in 1usize..5, n in 0usize..4, seed in any::<u64>(), s in -2.0f64..2.0, ds in 0.0f64..1.0) {
        let (g, b, psi, _) = setup(m, n, seed);
        let a = FockState::new(&b, psi).unwrap();
        prop_assert!(fock_scale_norm(&a, s, &g) <= fock_scale_norm(&a, s + ds, &g) * (1.0 + 1e-14));
    }

    #[test]
    fn index_round_trip(m in 1usize..7, n in 0usize..4) {
        let b = build_basis(m, n).unwrap();
        for i in 0..b.dim() {
            prop_assert_eq!(b.index_of_modes(b.mode_list(i)), Some(i));
            prop_assert_eq!(b.index_of_occupations(&b.occupations(i)), Some(i));
            let sector = b.sector_of(i);
            prop_assert!(b.sector_range(sector).contains(&i));
            prop_assert_eq!(b.occupations(i).iter().sum::<u32>() as usize, sector);
        }
    }
}

#[test]
fn scale_norm_matches_energy_weights() {
    let g = midpoint(1.0, 2.0, 2);
    let b = build_basis(2, 2).unwrap();
    let f = FormFactor::new(vec![c(1.0), c(1.0)], "one").unwrap();
    assert_eq!(f.len(), 2);
    let mut coeffs = vec![c(0.0); b.dim()];
    let two = b.index_of_occupations(&[1, 1]).unwrap();
    coeffs[two] = c(2.0);
    let psi = FockState::new(&b, coeffs).unwrap();
    let e = g.omega()[0] + g.omega()[1];
    assert!((fock_scale_norm(&psi, 1.0, &g) - 2.0 * (1.0 + e).sqrt()).abs() < 1e-15);
}
