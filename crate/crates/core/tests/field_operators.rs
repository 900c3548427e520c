mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use spinboson_lab::fieldops::{annihilator, creator, dgamma, operator_scale_norm, FieldOperator};
use spinboson_lab::fock::{build_basis, scale_norm_of_coeffs, FockBasis};
use spinboson_lab::linalg::SparseMatrix;
use spinboson_lab::modegrid::{scale_norm, FormFactor, FormFactorRule, ModeGrid};
use spinboson_lab::C64;

fn dense_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|x| x.norm()).fold(0.0, f64::max)
}

#[test]
fn annihilator_matches_kronecker_construction() {
    for (m, n, seed) in [(1, 4, 1), (2, 3, 2), (3, 3, 3), (4, 2, 4)] {
        let g = midpoint(0.5, 3.0, m);
        let b = build_basis(m, n).unwrap();
        let f = random_form_factor(&mut rng(seed), &g);
        let lowering = kron_lowering(&b);
        let oracle = dense_annihilator(&f, &g, &lowering);
        let a = annihilator(&f, &g, &b).unwrap();
        assert!(dense_diff(&a.matrix().to_dense(), &oracle) < 1e-14, "M={m} n={n}");
        let ad = creator(&f, &g, &b).unwrap();
        assert_eq!(ad.matrix().to_dense(), a.matrix().to_dense().adjoint());
        let d = dgamma(&g, &b).unwrap();
        assert!(dense_diff(&d.matrix().to_dense(), &dense_dgamma(&g, &lowering)) < 1e-14);
    }
}

/// `(a(f)ψ)^{(n−1)}(k) = √n Σ_m w_m conj(f_m) ψ^{(n)}(m, k)`, evaluated on
/// symmetric kernels rather than on occupation coefficients.
#[test]
fn annihilator_acts_on_kernels() {
    let g = midpoint(1.0, 2.5, 3);
    let b = build_basis(3, 3).unwrap();
    let mut r = rng(11);
    let f = random_form_factor(&mut r, &g);
    let psi = random_vec(&mut r, b.dim());
    let out = annihilator(&f, &g, &b).unwrap().apply(&psi);
    let index = occupation_index(&b);
    for i in 0..b.dim() {
        let occ = b.occupations(i);
        let n = occ.iter().sum::<u32>() + 1;
        if n as usize > b.n_max() {
            continue;
        }
        let mut expected = c(0.0);
        for m in 0..g.len() {
            let mut up = occ.clone();
            up[m] += 1;
            let kernel = kernel_value(psi[index[&up]], &up, &g);
            expected += f.values()[m].conj() * g.weights()[m] * kernel;
        }
        expected *= f64::from(n).sqrt();
        let got = kernel_value(out[i], &occ, &g);
        assert!((got - expected).norm() < 1e-13 * (1.0 + expected.norm()), "state {i}");
    }
}

#[test]
fn two_bosons_in_one_mode_kernel() {
    let g = midpoint(1.0, 2.0, 2);
    let b = build_basis(2, 2).unwrap();
    let f = FormFactor::new(vec![C64::new(0.3, -0.4), C64::new(1.0, 0.5)], "f").unwrap();
    let a = annihilator(&f, &g, &b).unwrap();
    let two = b.index_of_occupations(&[0, 2]).unwrap();
    let one = b.index_of_occupations(&[0, 1]).unwrap();
    let w = g.weights()[1];
    // the removed boson contributes √2 w conj(f) times the input kernel
    let got = kernel_value(a.matrix().get(one, two), &[0, 1], &g);
    let kernel_in = kernel_value(c(1.0), &[0, 2], &g);
    let expected = 2f64.sqrt() * w * f.values()[1].conj() * kernel_in;
    assert!((got - expected).norm() < 1e-14);
}

#[test]
fn one_boson_state_has_the_form_factor_norm() {
    let g = midpoint(1.0, 4.0, 6);
    let b = build_basis(6, 2).unwrap();
    let f = FormFactorRule::power(-0.5).realize(&g).unwrap();
    let mut vac = vec![c(0.0); b.dim()];
    vac[0] = c(1.0);
    let one = creator(&f, &g, &b).unwrap().apply(&vac);
    let expected = g.inner(&f, &f).re;
    assert!((inner(&one, &one).re - expected).abs() < 1e-14 * expected);
}

#[test]
fn dgamma_on_two_bosons() {
    let g = ModeGrid::from_parts(vec![1.5], vec![1.0], vec![1.5]).unwrap();
    let b = build_basis(1, 3).unwrap();
    let d = dgamma(&g, &b).unwrap();
    assert_eq!(d.matrix().get(2, 2), c(3.0));
    assert_eq!(d.sector_shift(), 0);
}

#[test]
fn triplet_export_round_trips() {
    let g = midpoint(1.0, 2.0, 3);
    let b = build_basis(3, 2).unwrap();
    let f = random_form_factor(&mut rng(5), &g);
    let a = annihilator(&f, &g, &b).unwrap();
    let mut text = Vec::new();
    a.write_triplets(&mut text).unwrap();
    let text = String::from_utf8(text).unwrap();
    assert_eq!(text.lines().count(), a.matrix().nnz());
    let triplets = text.lines().map(|l| {
        let p: Vec<&str> = l.split_whitespace().collect();
        (
            p[0].parse().unwrap(),
            p[1].parse().unwrap(),
            C64::new(p[2].parse().unwrap(), p[3].parse().unwrap()),
        )
    });
    let back = SparseMatrix::from_triplets(b.dim(), b.dim(), triplets);
    assert_eq!(&back, a.matrix());
}

#[test]
fn scale_norm_of_annihilator_is_bounded_by_minus_one_norm() {
    let g = midpoint(0.5, 5.0, 6);
    let b = build_basis(6, 2).unwrap();
    let f = FormFactorRule::power(-0.5).realize(&g).unwrap();
    let a = annihilator(&f, &g, &b).unwrap();
    let est = operator_scale_norm(&a, 1.0, 0.0, &g, &b, 3).unwrap();
    let bound = scale_norm(&f, -1.0, &g);
    let one_boson: f64 = (0..g.len())
        .map(|i| g.weights()[i] * f.values()[i].norm_sqr() / (1.0 + g.omega()[i]))
        .sum::<f64>()
        .sqrt();
    assert!(est > 0.0 && est <= bound * (1.0 + 1e-10), "{est} vs {bound}");
    assert!(est >= 0.95 * one_boson, "{est} vs {one_boson}");

    // restricted to one boson, the map F_1 → F_0 has exactly that norm
    let b1 = build_basis(6, 1).unwrap();
    let a1 = annihilator(&f, &g, &b1).unwrap();
    let est1 = operator_scale_norm(&a1, 1.0, 0.0, &g, &b1, 2).unwrap();
    assert!((est1 - one_boson).abs() < 1e-10 * one_boson, "{est1} vs {one_boson}");
}

#[test]
fn sharp_cutoffs_converge_in_operator_norm() {
    let g = midpoint(0.5, 8.0, 10);
    let b = build_basis(10, 2).unwrap();
    let f = FormFactorRule::power(-0.5).realize(&g).unwrap();
    let a = annihilator(&f, &g, &b).unwrap();
    let mut last = f64::INFINITY;
    for cutoff in [2.0, 4.0, 6.0] {
        let ft = f.truncated(&g, cutoff);
        let diff = FieldOperator::new(a.matrix().sub(annihilator(&ft, &g, &b).unwrap().matrix()), -1);
        let est = operator_scale_norm(&diff, 1.0, 0.0, &g, &b, 2).unwrap();
        let bound = scale_norm(&f.sub(&ft), -1.0, &g);
        assert!(est <= bound * (1.0 + 1e-10), "Λ={cutoff}: {est} vs {bound}");
        assert!(bound < last);
        last = bound;
    }
}

fn setup(m: usize, n: usize, seed: u64) -> (ModeGrid, FockBasis, FormFactor, FormFactor, Vec<C64>, Vec<C64>) {
    let g = midpoint(0.25, 3.0, m);
    let b = build_basis(m, n).unwrap();
    let mut r = rng(seed);
    let f = random_form_factor(&mut r, &g);
    let h = random_form_factor(&mut r, &g);
    let psi = random_vec(&mut r, b.dim());
    let phi = random_vec(&mut r, b.dim());
    (g, b, f, h, psi, phi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn creator_is_the_adjoint(m in 1usize..5, n in 1usize..4, seed in any::<u64>()) {
        let (g, b, f, _, psi, phi) = setup(m, n, seed);
        let a = annihilator(&f, &g, &b).unwrap();
        let ad = creator(&f, &g, &b).unwrap();
        let lhs = inner(&phi, &a.apply(&psi));
        let rhs = inner(&ad.apply(&phi), &psi);
        prop_assert!((lhs - rhs).norm() <= 1e-13 * (1.0 + lhs.norm()));
    }

    #[test]
    fn canonical_commutator_below_the_ceiling(m in 1usize..5, n in 1usize..4, seed in any::<u64>()) {
        let (g, b, f, h, mut psi, _) = setup(m, n, seed);
        // keep only sectors strictly below n_max
        for x in psi[b.sector_offsets()[n]..].iter_mut() {
            *x = c(0.0);
        }
        let a = annihilator(&f, &g, &b).unwrap();
        let ad = creator(&h, &g, &b).unwrap();
        let left = a.apply(&ad.apply(&psi));
        let right = ad.apply(&a.apply(&psi));
        let fh = g.inner(&f, &h);
        let scale = 1.0 + norm(&psi) * fh.norm();
        for i in 0..b.dim() {
            let comm = left[i] - right[i];
            prop_assert!((comm - fh * psi[i]).norm() <= 1e-13 * scale);
        }
    }

    #[test]
    fn annihilator_is_relatively_bounded(m in 1usize..5, n in 1usize..4, seed in any::<u64>()) {
        let (g, b, f, _, psi, _) = setup(m, n, seed);
        let a = annihilator(&f, &g, &b).unwrap();
        let lhs = norm(&a.apply(&psi));
        let rhs = scale_norm(&f, -1.0, &g) * scale_norm_of_coeffs(&b, &psi, 1.0, &g);
        prop_assert!(lhs <= rhs * (1.0 + 1e-13));
    }

    #[test]
    fn creator_obeys_the_number_bound(m in 1usize..5, n in 1usize..4, seed in any::<u64>()) {
        // ‖a†ψ‖² = ‖aψ‖² + ‖f‖²‖ψ‖² below the ceiling; truncation only removes mass
        let (g, b, f, _, psi, _) = setup(m, n, seed);
        let a = annihilator(&f, &g, &b).unwrap();
        let ad = creator(&f, &g, &b).unwrap();
        let lhs = inner(&ad.apply(&psi), &ad.apply(&psi)).re;
        let rhs = inner(&a.apply(&psi), &a.apply(&psi)).re + g.inner(&f, &f).re * inner(&psi, &psi).re;
        prop_assert!(lhs <= rhs * (1.0 + 1e-13));
    }
}
