mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use spinboson_lab::fock::build_basis;
use spinboson_lab::linalg::lowest_eigenpairs;
use spinboson_lab::modegrid::{scale_norm_sq, FormFactorRule, ModeGrid};
use spinboson_lab::sbmodel::{CountertermAnchor, SpinBoson, SpinBosonParams, TwoBlockState};
use spinboson_lab::C64;

struct Case {
    grid: ModeGrid,
    model: SpinBoson,
    dense: DMatrix<C64>,
}

fn case(m: usize, n: usize, omega_e: f64, omega_g: f64, lambda: f64, seed: u64) -> Case {
    let grid = midpoint(0.5, 3.0, m);
    let basis = build_basis(m, n).unwrap();
    let f = random_form_factor(&mut rng(seed), &grid);
    let lowering = kron_lowering(&basis);
    let a = dense_annihilator(&f, &grid, &lowering);
    let dense = dense_spin_boson(omega_e, omega_g, lambda, &a, &dense_dgamma(&grid, &lowering));
    let mut params = SpinBosonParams::regular(omega_e, lambda, f);
    params.omega_g = omega_g;
    let model = SpinBoson::new(params, &grid, &basis).unwrap();
    Case { grid, model, dense }
}

fn dense_resolvent(h: &DMatrix<C64>, z: C64) -> DMatrix<C64> {
    let n = h.nrows();
    (h - DMatrix::<C64>::identity(n, n) * z).try_inverse().expect("H − z is invertible off the real axis")
}

#[test]
fn assembled_matrix_matches_the_dense_oracle() {
    for (m, n) in [(1, 3), (2, 2), (3, 3), (5, 2)] {
        let cs = case(m, n, 1.3, 0.2, 0.8, m as u64);
        let h = cs.model.assemble_regular();
        assert_eq!(h.num_blocks(), 2);
        let diff = (h.matrix().to_dense() - &cs.dense).iter().map(|x| x.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-14, "M={m} n={n}: {diff}");
        assert_eq!(h.matrix().hermitian_defect(), 0.0);
        assert_eq!(h.block(0, 1).adjoint(), h.block(1, 0));
    }
}

#[test]
fn propagator_resolvent_matches_dense_inverse() {
    let cs = case(4, 3, 1.0, 0.0, 1.2, 9);
    let mut r = rng(10);
    let d = cs.model.fock_dim();
    for z in [C64::new(0.5, 1.0), C64::new(-2.0, 0.1), C64::new(3.0, -0.7), C64::new(-0.5, 0.0)] {
        let psi = random_vec(&mut r, 2 * d);
        let (x, report) = cs.model.resolvent_apply(z, &TwoBlockState::from_flat(&psi)).unwrap();
        assert!(report.success && report.residual < 1e-12);
        let want = dense_resolvent(&cs.dense, z) * DVector::from_vec(psi.clone());
        let err = max_abs_diff(&x.to_flat(), want.as_slice()) / norm(want.as_slice());
        assert!(err < 1e-12, "z={z}: {err}");
    }
}

/// With one boson allowed the excited vacuum only talks to one-boson ground
/// states, so its resolvent element has the closed Friedrichs form.
#[test]
fn one_boson_vacuum_element_is_friedrichs() {
    let grid = midpoint(0.5, 6.0, 40);
    let basis = build_basis(40, 1).unwrap();
    let f = FormFactorRule::power(-0.5).realize(&grid).unwrap();
    let (omega_e, lambda) = (1.7, 0.6);
    let model = SpinBoson::new(SpinBosonParams::regular(omega_e, lambda, f.clone()), &grid, &basis).unwrap();
    for z in [C64::new(0.3, 0.5), C64::new(2.0, 0.01), C64::new(-1.0, 0.0)] {
        let (x, _) = model.resolvent_apply(z, &TwoBlockState::psi0(basis.dim())).unwrap();
        let self_energy: C64 = (0..grid.len())
            .map(|i| grid.weights()[i] * f.values()[i].norm_sqr() / (grid.omega()[i] - z))
            .sum();
        let want = (omega_e - z - lambda * lambda * self_energy).inv();
        assert!((x.excited[0] - want).norm() < 1e-12 * want.norm(), "z={z}");
        let ov = grid.resolvent_overlap(&f, &f, z);
        assert!((ov - self_energy).norm() < 1e-13 * ov.norm());
    }
}

#[test]
fn energy_statistics_in_the_excited_vacuum() {
    let cs = case(5, 2, 0.9, 0.0, 0.7, 21);
    let st = cs.model.psi0_energy_stats();
    assert_eq!(st.mean, 0.9);
    let f = &cs.model.params().f;
    let want = 0.49 * scale_norm_sq(f, 0.0, &cs.grid);
    assert!((st.variance - want).abs() < 1e-14 * want);
}

#[test]
fn counterterm_identities() {
    let grid = midpoint(0.5, 20.0, 50);
    let basis = build_basis(50, 1).unwrap();
    let f = FormFactorRule::power(-1.0).realize(&grid).unwrap();
    let lambda = 0.8;
    let scale = SpinBoson::new(
        SpinBosonParams::renormalized(1.5, lambda, f.clone(), CountertermAnchor::ScaleNorm),
        &grid,
        &basis,
    )
    .unwrap();
    assert_eq!(scale.bare_omega_e(), 1.5 + lambda * lambda * scale_norm_sq(&f, -1.0, &grid));

    // the minus-one anchor pins G(−1) on the vacuum to the dressed value + 1
    let anchored = SpinBoson::new(
        SpinBosonParams::renormalized(1.5, lambda, f, CountertermAnchor::MinusOne),
        &grid,
        &basis,
    )
    .unwrap();
    let g = anchored.propagator(C64::new(-1.0, 0.0)).unwrap();
    assert!((g.get(0, 0) - C64::new(2.5, 0.0)).norm() < 1e-13);
    assert!(anchored.counterterm() < scale.counterterm());
}

#[test]
fn singular_action_is_h_on_the_shifted_vector() {
    let cs = case(3, 3, 1.1, 0.0, 0.9, 33);
    let d = cs.model.fock_dim();
    let mut r = rng(34);
    let (phi_e, phi_g) = (random_vec(&mut r, d), random_vec(&mut r, d));
    let shift = cs.model.domain_shift(&phi_e);
    let shifted: Vec<C64> = phi_g.iter().zip(&shift).map(|(a, b)| a + b).collect();
    let mut v = phi_e.clone();
    v.extend(shifted);
    let direct = cs.model.assemble_regular().matrix().matvec(&v);
    let action = cs.model.singular_action(&phi_e, &phi_g).unwrap().to_flat();
    assert!(max_abs_diff(&direct, &action) < 1e-13 * norm(&direct));
}

#[test]
fn lowest_eigenvalues_match_dense_diagonalization() {
    let cs = case(3, 2, 0.8, 0.0, 0.5, 40);
    let mut all: Vec<f64> = cs.dense.clone().symmetric_eigenvalues().iter().copied().collect();
    all.sort_by(f64::total_cmp);
    let pairs = lowest_eigenpairs(cs.model.assemble_regular().matrix(), 4).unwrap();
    for (p, want) in pairs.iter().zip(&all) {
        assert!((p.value - want).abs() < 1e-10, "{} vs {want}", p.value);
        assert!(p.residual < 1e-8);
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    let grid = midpoint(0.5, 3.0, 3);
    let basis = build_basis(3, 1).unwrap();
    let f = FormFactorRule::power(0.0).realize(&grid).unwrap();
    assert!(SpinBoson::new(SpinBosonParams::regular(f64::NAN, 1.0, f.clone()), &grid, &basis).is_err());
    let other = midpoint(0.5, 3.0, 4);
    assert!(SpinBoson::new(SpinBosonParams::regular(1.0, 1.0, f), &other, &basis).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn resolvent_is_bounded_by_the_imaginary_part(seed in any::<u64>(), re in -3.0f64..3.0, im in 0.05f64..2.0) {
        let cs = case(3, 2, 1.0, 0.0, 1.0, seed);
        let z = C64::new(re, im);
        let psi = random_vec(&mut rng(seed ^ 1), cs.model.dim());
        let x = cs.model.resolvent(z).unwrap().apply_flat(&psi).unwrap();
        prop_assert!(norm(&x) <= norm(&psi) / im * (1.0 + 1e-10));
    }

    #[test]
    fn first_resolvent_identity(seed in any::<u64>(), a in -2.0f64..2.0, b in 0.1f64..1.5) {
        let cs = case(2, 3, 0.7, 0.1, 0.9, seed);
        let (z, w) = (C64::new(a, b), C64::new(-a, 2.0 * b));
        let psi = random_vec(&mut rng(seed ^ 2), cs.model.dim());
        let rz = cs.model.resolvent(z).unwrap();
        let rw = cs.model.resolvent(w).unwrap();
        let lhs: Vec<C64> = rz.apply_flat(&psi).unwrap().iter().zip(rw.apply_flat(&psi).unwrap()).map(|(x, y)| x - y).collect();
        let rhs: Vec<C64> = rz.apply_flat(&rw.apply_flat(&psi).unwrap()).unwrap().into_iter().map(|x| x * (z - w)).collect();
        prop_assert!(max_abs_diff(&lhs, &rhs) <= 1e-11 * (1.0 + norm(&lhs)));
    }

    #[test]
    fn resolvent_adjoint_is_the_conjugate_point(seed in any::<u64>(), re in -2.0f64..2.0, im in 0.1f64..1.0) {
        let cs = case(3, 2, 1.2, 0.0, 0.6, seed);
        let z = C64::new(re, im);
        let mut r = rng(seed ^ 3);
        let (phi, psi) = (random_vec(&mut r, cs.model.dim()), random_vec(&mut r, cs.model.dim()));
        let lhs = inner(&phi, &cs.model.resolvent(z).unwrap().apply_flat(&psi).unwrap());
        let rhs = inner(&cs.model.resolvent(z.conj()).unwrap().apply_flat(&phi).unwrap(), &psi);
        prop_assert!((lhs - rhs).norm() <= 1e-11 * (1.0 + lhs.norm()));
    }
}
