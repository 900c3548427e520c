mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use spinboson_lab::fit::loglog_slope;
use spinboson_lab::fock::build_basis;
use spinboson_lab::modegrid::{scale_norm_sq, FormFactorRule};
use spinboson_lab::renorm::{
    build_family, classify, counterterm, counterterm_with_anchor, coupling_threshold, flat_tail_integral,
    renorm_sweep, vacuum_propagator_element, CouplingClass, SweepSpec,
};
use spinboson_lab::sbmodel::{CountertermAnchor, SpinBoson, SpinBosonParams};
use spinboson_lab::C64;

fn quarter_decades(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|j| 10f64.powf(j as f64 / 4.0)).collect()
}

#[test]
fn flat_form_factor_norms_have_closed_forms() {
    let grid = log_grid(4.0, 40);
    let cutoffs = quarter_decades(4, 16);
    let fam = build_family(&FormFactorRule::power(0.0), &grid, &cutoffs).unwrap();
    for (i, &l) in cutoffs.iter().enumerate() {
        // ∫₁^Λ dk/k is integrated exactly by the log-midpoint rule
        assert!((fam.norm_sq(i, -1.0) - l.ln()).abs() < 1e-12 * l.ln(), "Λ={l}");
        let want = 1.0 - 1.0 / l;
        assert!((fam.norm_sq(i, -2.0) - want).abs() < 2e-4 * want, "Λ={l}");
        assert!((fam.norm_sq(i, 0.0) - (l - 1.0)).abs() < 2e-4 * l, "Λ={l}");
    }
}

#[test]
fn nested_cutoffs_have_disjoint_tails() {
    let grid = log_grid(3.0, 20);
    let fam = build_family(&FormFactorRule::power(-0.5), &grid, &quarter_decades(4, 12)).unwrap();
    for i in 1..fam.len() {
        for s in [0.0, -1.0, -2.0] {
            let d = fam.difference_norm(i, i - 1, s, &grid);
            let want = fam.norm_sq(i, s) - fam.norm_sq(i - 1, s);
            assert!((d * d - want).abs() < 1e-12 * fam.norm_sq(i, s));
        }
    }
}

#[test]
fn classification_of_the_witnesses() {
    let grid = log_grid(4.0, 20);
    let cutoffs = quarter_decades(4, 16);
    let cases = [
        (-1.0, 1.5, CouplingClass::Regular),
        (-0.5, 1.5, CouplingClass::MinusOne),
        (0.0, 1.5, CouplingClass::SingularSubcritical),
        (0.0, 2.0, CouplingClass::SingularCritical),
    ];
    for (exponent, s, want) in cases {
        let fam = build_family(&FormFactorRule::power(exponent), &grid, &cutoffs).unwrap();
        let (class, fit) = classify(&fam, &grid, s).unwrap();
        assert_eq!(class, want, "k^{exponent}, s={s}");
        assert_eq!(fit.is_some(), class.is_singular());
    }
}

#[test]
fn schedules_agree_between_entry_points() {
    let grid = log_grid(2.0, 20);
    let fam = build_family(&FormFactorRule::power(0.0), &grid, &quarter_decades(4, 8)).unwrap();
    let a = counterterm(0.4, 1.3, &fam);
    let b = counterterm_with_anchor(0.4, 1.3, &fam, &grid, CountertermAnchor::ScaleNorm);
    assert_eq!(a, b);
    let m = counterterm_with_anchor(0.4, 1.3, &fam, &grid, CountertermAnchor::MinusOne);
    for i in 0..fam.len() {
        let want: f64 = (0..grid.len())
            .map(|k| grid.weights()[k] * fam.realized(i).values()[k].norm_sqr() / (grid.omega()[k] + 1.0))
            .sum::<f64>()
            * 1.69;
        assert!((m.counterterms[i] - want).abs() < 1e-13 * want);
        assert!(m.counterterms[i] < a.counterterms[i]);
        assert_eq!(m.bare[i], 0.4 + m.counterterms[i]);
    }
}

/// With one boson allowed the vacuum element of the renormalized resolvent
/// is the dressed Friedrichs expression.
#[test]
fn renormalized_vacuum_element_is_dressed_friedrichs() {
    let grid = log_grid(3.0, 20);
    let basis = build_basis(grid.len(), 1).unwrap();
    let fam = build_family(&FormFactorRule::power(0.0), &grid, &quarter_decades(4, 12)).unwrap();
    let (tilde, lambda) = (1.0, 0.5);
    let z = C64::new(0.0, 1.0);
    let s = counterterm_with_anchor(tilde, lambda, &fam, &grid, CountertermAnchor::MinusOne);
    let mut prev: Option<C64> = None;
    for i in 0..fam.len() {
        let model = s.model(&fam, i, &grid, &basis).unwrap();
        let got = vacuum_propagator_element(&model, z).unwrap();
        let f = fam.realized(i);
        let dressed: C64 = (0..grid.len())
            .map(|k| {
                let w = grid.omega()[k];
                (1.0 / (C64::new(w, 0.0) - z) - 1.0 / (w + 1.0)) * grid.weights()[k] * f.values()[k].norm_sqr()
            })
            .sum();
        let want = (tilde - z - lambda * lambda * dressed).inv();
        assert!((got - want).norm() < 1e-12 * want.norm(), "Λ={}", fam.cutoffs()[i]);
        // the increment of the inverse follows the continuum tail integral
        if let Some(p) = prev {
            let step = 1.0 / p - 1.0 / got;
            let tail = flat_tail_integral(lambda, z, fam.cutoffs()[i - 1], fam.cutoffs()[i]);
            assert!((step - tail).norm() < 1e-3 * tail.norm(), "{step} vs {tail}");
        }
        prev = Some(got);
    }
}

#[test]
fn sweep_reports_stored_norms_and_bare_energies() {
    let grid = log_grid(2.0, 12);
    let basis = build_basis(grid.len(), 1).unwrap();
    let fam = build_family(&FormFactorRule::power(0.0), &grid, &quarter_decades(4, 8)).unwrap();
    let spec = SweepSpec {
        omega_e: 1.0,
        lambda: 0.5,
        renormalize: Some(CountertermAnchor::ScaleNorm),
        z: C64::new(0.0, 1.0),
        probes: 2,
        seed: 3,
    };
    let rows = renorm_sweep(&fam, &grid, &basis, &spec).unwrap();
    assert_eq!(rows.len(), fam.len());
    assert!(rows[0].res_dist_norm.is_nan() && rows[0].res_dist_strong.is_nan());
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.norm_m1, fam.norm(i, -1.0));
        assert_eq!(r.omega_bare, 1.0 + 0.25 * fam.norm_sq(i, -1.0));
        assert_eq!(r.mean_energy, r.omega_bare);
        if i > 0 {
            // the strong distance uses a subset of unit vectors
            assert!(r.res_dist_strong <= r.res_dist_norm * (1.0 + 1e-6));
            assert!(r.res_dist_norm > 0.0);
        }
    }
    let again = renorm_sweep(&fam, &grid, &basis, &spec).unwrap();
    assert_eq!(format!("{rows:?}"), format!("{again:?}"));
}

/// Along sharp cutoffs of `k^{-1/2}` consecutive resolvents differ by
/// `O(‖δf‖²₋₁)`, one order better than the first-order Lipschitz bound.
#[test]
fn norm_distance_is_quadratic_in_the_tail_norm() {
    let grid = log_grid(3.0, 12);
    let basis = build_basis(grid.len(), 2).unwrap();
    let cutoffs = quarter_decades(4, 12);
    let fam = build_family(&FormFactorRule::power(-0.5), &grid, &cutoffs).unwrap();
    let spec = SweepSpec {
        omega_e: 1.0,
        lambda: 1.0,
        renormalize: None,
        z: C64::new(0.0, 1.0),
        probes: 0,
        seed: 1,
    };
    let rows = renorm_sweep(&fam, &grid, &basis, &spec).unwrap();
    let delta: Vec<f64> = (1..fam.len()).map(|i| fam.difference_norm(i, i - 1, -1.0, &grid)).collect();
    let dist: Vec<f64> = rows[1..].iter().map(|r| r.res_dist_norm).collect();
    let slope = loglog_slope(&delta, &dist);
    assert!((slope - 2.0).abs() < 0.15, "slope {slope}");
    let ratio: Vec<f64> = dist.iter().zip(&delta).map(|(d, e)| d / e).collect();
    assert!(ratio.iter().all(|r| *r <= ratio[0] * (1.0 + 1e-9)));
}

#[test]
fn threshold_scan_matches_dense_eigenvalues() {
    let grid = midpoint(0.5, 4.0, 4);
    let basis = build_basis(4, 2).unwrap();
    let f = FormFactorRule::power(0.0).realize(&grid).unwrap();
    let lambdas: Vec<f64> = (0..8).map(|i| 0.5 * i as f64).collect();
    let x = -0.5;
    let scan = coupling_threshold(0.2, &f, &grid, &basis, CountertermAnchor::ScaleNorm, &lambdas, x).unwrap();
    assert_eq!(scan.lowest.len(), lambdas.len());
    assert!((scan.lowest[0] - 0.7).abs() < 1e-10);
    for (&lambda, &low) in lambdas.iter().zip(&scan.lowest) {
        let m = SpinBoson::new(
            SpinBosonParams::renormalized(0.2, lambda, f.clone(), CountertermAnchor::ScaleNorm),
            &grid,
            &basis,
        )
        .unwrap();
        let g: DMatrix<C64> = m.propagator(C64::new(x, 0.0)).unwrap().to_dense();
        let min = g.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        assert!((low - min).abs() < 1e-9 * (1.0 + min.abs()), "λ={lambda}");
    }
    match scan.threshold {
        Some(t) => {
            let k = lambdas.iter().position(|l| *l == t).unwrap();
            assert!(scan.lowest[k] <= 0.0 && scan.lowest[..k].iter().all(|v| *v > 0.0));
        }
        None => assert!(scan.lowest.iter().all(|v| *v > 0.0)),
    }
    assert!(coupling_threshold(0.2, &f, &grid, &basis, CountertermAnchor::ScaleNorm, &lambdas, 0.0).is_err());
    assert!(coupling_threshold(0.2, &f, &grid, &basis, CountertermAnchor::ScaleNorm, &[1.0, 0.5], x).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn family_norms_grow_with_the_cutoff(exponent in -1.5f64..0.5, amplitude in 0.1f64..3.0) {
        let grid = log_grid(2.0, 10);
        let rule = FormFactorRule::Power { exponent, amplitude };
        let fam = build_family(&rule, &grid, &quarter_decades(0, 8)).unwrap();
        for s in [0.0, -1.0, -2.0] {
            for i in 1..fam.len() {
                prop_assert!(fam.norm_sq(i, s) >= fam.norm_sq(i - 1, s));
            }
            let full = scale_norm_sq(fam.base(), s, &grid);
            prop_assert!((fam.norm_sq(fam.len() - 1, s) - full).abs() <= 1e-12 * full);
            prop_assert!(fam.norm_sq(0, s) <= full);
        }
    }

    #[test]
    fn schedule_identity_is_bitwise(tilde in -3.0f64..3.0, lambda in 0.0f64..3.0) {
        let grid = log_grid(2.0, 10);
        let fam = build_family(&FormFactorRule::power(0.0), &grid, &quarter_decades(2, 8)).unwrap();
        let s = counterterm(tilde, lambda, &fam);
        for i in 0..fam.len() {
            prop_assert_eq!(s.bare[i], tilde + lambda * lambda * fam.norm_sq(i, -1.0));
        }
    }
}
