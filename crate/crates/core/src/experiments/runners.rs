use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::output::{fmt_f64, Artifact, Csv};
use super::{
    DecayClassParams, Entry, ExperimentConfig, Experiment, GsbConfig, ModelSpec, MultiatomConfig, Outcome,
    RenormSweepParams, ResolventCheckParams, SpectrumParams, Table1Params,
};
use crate::fock::FockBasis;
use crate::gsbmodel::{Channel, Gsb, GsbParams};
use crate::linalg::{dense_inverse_oracle, lowest_eigenpairs, relative_residual, BlockTridiagonalStats};
use crate::modegrid::{build_grid, decay_exponent, DecayFit, ModeGrid};
use crate::multiatom::{MultiAtom, MultiAtomParams};
use crate::renorm::{self, divergence_slope, verdict, CouplingClass, SweepSpec, Verdict};
use crate::sbmodel::{SpinBoson, SpinBosonParams, TwoBlockState};
use crate::{Error, Result, C64};

pub(super) fn run(config: &ExperimentConfig) -> Result<Outcome> {
    match &config.experiment {
        Experiment::Spectrum(p) => spectrum(p),
        Experiment::ResolventCheck(p) => resolvent_check(p),
        Experiment::RenormSweep(p) => renorm_sweep(p, config.seed),
        Experiment::Table1(p) => table1(p),
        Experiment::Gsb(p) => gsb(p, config.seed),
        Experiment::Multiatom(p) => multiatom(p),
        Experiment::DecayClass(p) => decay_class(p),
    }
}

fn z_of(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

fn spin_boson(m: &ModelSpec) -> Result<(ModeGrid, FockBasis, SpinBoson)> {
    let grid = build_grid(&m.grid)?;
    let basis = FockBasis::new(grid.len(), m.n_max)?;
    let f = m.form_factor.realize(&grid)?;
    let mut params = SpinBosonParams::regular(m.omega_e, m.lambda, f);
    params.omega_g = m.omega_g;
    let model = SpinBoson::new(params, &grid, &basis)?;
    Ok((grid, basis, model))
}

fn spectrum(p: &SpectrumParams) -> Result<Outcome> {
    let (_, _, model) = spin_boson(&p.model)?;
    let h = model.assemble_regular();
    let pairs = lowest_eigenpairs(h.matrix(), p.count.min(model.dim()))?;
    let mut csv = Csv::new(&["index", "eigenvalue", "residual"]);
    for (i, e) in pairs.iter().enumerate() {
        csv.row(&[i.to_string(), fmt_f64(e.value), fmt_f64(e.residual)]);
    }
    Ok(Outcome {
        artifacts: vec![csv.into_artifact("spectrum.csv")],
        summary: vec![format!(
            "dimension {}, lowest eigenvalue {}",
            model.dim(),
            fmt_f64(pairs[0].value)
        )],
    })
}

#[derive(Serialize)]
struct CheckSummary {
    dimension: usize,
    max_relative_error: f64,
    tolerance: f64,
    passed: bool,
}

fn resolvent_check(p: &ResolventCheckParams) -> Result<Outcome> {
    let (_, _, model) = spin_boson(&p.model)?;
    let h = model.assemble_regular();
    let dim = model.dim();
    let rows: Vec<(f64, f64)> = p
        .z_points
        .par_iter()
        .map(|&zp| {
            let z = z_of(zp);
            let dense = dense_inverse_oracle(&h.matrix().shift(z))?;
            let r = model.resolvent(z)?;
            let mut err: f64 = 0.0;
            let mut worst_residual: f64 = 0.0;
            let mut e = vec![C64::new(0.0, 0.0); dim];
            for j in 0..dim {
                e[j] = C64::new(1.0, 0.0);
                let (x, report) = r.apply(&TwoBlockState::from_flat(&e))?;
                let x = x.to_flat();
                worst_residual = worst_residual.max(report.residual);
                for i in 0..dim {
                    err = err.max((x[i] - dense[(i, j)]).norm());
                }
                e[j] = C64::new(0.0, 0.0);
            }
            let scale = dense.iter().map(|v| v.norm()).fold(0.0, f64::max);
            Ok((err / scale, worst_residual))
        })
        .collect::<Result<_>>()?;
    let mut csv = Csv::new(&["z_re", "z_im", "rel_error", "propagator_residual"]);
    for (zp, (err, res)) in p.z_points.iter().zip(&rows) {
        csv.row(&[fmt_f64(zp[0]), fmt_f64(zp[1]), fmt_f64(*err), fmt_f64(*res)]);
    }
    let max_err = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let summary = CheckSummary {
        dimension: dim,
        max_relative_error: max_err,
        tolerance: p.tolerance,
        passed: max_err <= p.tolerance,
    };
    Ok(Outcome {
        artifacts: vec![
            csv.into_artifact("resolvent_check.csv"),
            Artifact::json("resolvent_check.json", &summary),
        ],
        summary: vec![format!(
            "max relative error vs dense inverse: {} (tolerance {:e}, {})",
            fmt_f64(max_err),
            p.tolerance,
            if summary.passed { "pass" } else { "FAIL" }
        )],
    })
}

/// Table-1 style verdict for one family.
#[derive(Serialize)]
struct SweepVerdict {
    witness: String,
    class: &'static str,
    approximation: &'static str,
    coupling: &'static str,
    decay: Option<DecayFit>,
    renormalized: bool,
    mean_slope: f64,
    mean_verdict: Verdict,
    variance_slope: f64,
    variance_verdict: Verdict,
    /// Log–log slope of the consecutive norm distance against
    /// `‖f^Λ − f^Λ'‖₋₁`.
    rate_slope: f64,
}

fn renorm_sweep(p: &RenormSweepParams, seed: u64) -> Result<Outcome> {
    let grid = build_grid(&p.grid)?;
    let basis = FockBasis::new(grid.len(), p.n_max)?;
    let family = renorm::build_family(&p.form_factor, &grid, &p.cutoffs)?;
    let (class, decay): (CouplingClass, Option<DecayFit>) = renorm::classify(&family, &grid, p.s)?;
    let spec = SweepSpec {
        omega_e: p.omega_e,
        lambda: p.lambda,
        renormalize: p.renormalize,
        z: z_of(p.z),
        probes: p.probes,
        seed,
    };
    let rows = renorm::renorm_sweep(&family, &grid, &basis, &spec)?;
    let mut csv = Csv::new(&[
        "Lambda",
        "norm_0",
        "norm_m1",
        "norm_m2",
        "omega_bare",
        "mean_E",
        "var_E",
        "res_dist_norm",
        "res_dist_strong",
    ]);
    for r in &rows {
        csv.row(&[
            fmt_f64(r.cutoff),
            fmt_f64(r.norm_0),
            fmt_f64(r.norm_m1),
            fmt_f64(r.norm_m2),
            fmt_f64(r.omega_bare),
            fmt_f64(r.mean_energy),
            fmt_f64(r.variance_energy),
            fmt_f64(r.res_dist_norm),
            fmt_f64(r.res_dist_strong),
        ]);
    }
    let cut = family.cutoffs();
    let mean: Vec<f64> = rows.iter().map(|r| r.mean_energy).collect();
    let var: Vec<f64> = rows.iter().map(|r| r.variance_energy).collect();
    let (dx, dy): (Vec<f64>, Vec<f64>) = (1..family.len())
        .map(|i| (family.difference_norm(i, i - 1, -1.0, &grid), rows[i].res_dist_norm))
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .unzip();
    let rate_slope = if dx.len() >= 2 {
        crate::fit::loglog_slope(&dx, &dy)
    } else {
        f64::NAN
    };
    let mean_slope = divergence_slope(cut, &mean);
    let variance_slope = divergence_slope(cut, &var);
    let v = SweepVerdict {
        witness: p.form_factor.label(),
        class: class.label(),
        approximation: class.approximation(),
        coupling: class.coupling(),
        decay,
        renormalized: p.renormalize.is_some(),
        mean_slope,
        mean_verdict: verdict(mean_slope),
        variance_slope,
        variance_verdict: verdict(variance_slope),
        rate_slope,
    };
    let summary = vec![format!(
        "{}: class {}, mean {:?}, variance {:?}, rate slope {:.3}",
        v.witness, v.class, v.mean_verdict, v.variance_verdict, v.rate_slope
    )];
    Ok(Outcome {
        artifacts: vec![
            csv.into_artifact("renorm_sweep.csv"),
            Artifact::json("renorm_verdict.json", &v),
        ],
        summary,
    })
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Finite => "finite",
        Verdict::Diverging => "diverging",
    }
}

fn table1(p: &Table1Params) -> Result<Outcome> {
    let grid = build_grid(&p.grid)?;
    let basis = FockBasis::new(grid.len(), p.n_max)?;
    let rows = renorm::table1_report(&p.witnesses, &grid, &p.cutoffs, p.omega_e, p.lambda, &basis)?;
    let mut table = Csv::new(&[
        "witness",
        "class",
        "approximation",
        "coupling",
        "mean_last",
        "variance_last",
        "mean_slope",
        "variance_slope",
        "mean_verdict",
        "variance_verdict",
        "mean_is_omega_e",
    ]);
    let mut sweep = Csv::new(&["witness", "Lambda", "mean_E", "var_E"]);
    let mut summary = Vec::new();
    for r in &rows {
        let last = r.cutoffs.len() - 1;
        table.row(&[
            r.witness.clone(),
            r.class_label.replace(',', ";"),
            r.approximation.into(),
            r.coupling.into(),
            fmt_f64(r.mean[last]),
            fmt_f64(r.variance[last]),
            fmt_f64(r.mean_slope),
            fmt_f64(r.variance_slope),
            verdict_word(r.mean_verdict).into(),
            verdict_word(r.variance_verdict).into(),
            r.mean_is_omega_e.to_string(),
        ]);
        for i in 0..r.cutoffs.len() {
            sweep.row(&[
                r.witness.clone(),
                fmt_f64(r.cutoffs[i]),
                fmt_f64(r.mean[i]),
                fmt_f64(r.variance[i]),
            ]);
        }
        summary.push(format!(
            "{:<10} {:<22} {:<17} {:<9} mean {:<9} variance {}",
            r.witness,
            r.class_label,
            r.approximation,
            r.coupling,
            verdict_word(r.mean_verdict),
            verdict_word(r.variance_verdict)
        ));
    }
    Ok(Outcome {
        artifacts: vec![
            table.into_artifact("table1.csv"),
            sweep.into_artifact("table1_sweep.csv"),
            Artifact::json("table1.json", &rows),
        ],
        summary,
    })
}

fn matrix(name: &str, rows: &[Vec<Entry>]) -> Result<DMatrix<C64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || m == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(Error::invalid(format!("{name} must be a nonempty rectangular matrix")));
    }
    Ok(DMatrix::from_fn(n, m, |r, c| rows[r][c].value()))
}

pub(super) fn gsb_params(p: &GsbConfig, grid: &ModeGrid) -> Result<GsbParams> {
    let channels = p
        .channels
        .iter()
        .enumerate()
        .map(|(j, c)| {
            Ok(Channel {
                sigma_plus: matrix(&format!("channel {j} sigma_plus"), &c.sigma_plus)?,
                f: c.form_factor.realize(grid)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(GsbParams {
        e_e: matrix("e_e", &p.e_e)?,
        e_g: matrix("e_g", &p.e_g)?,
        channels,
        lambda: p.lambda,
        experimental_counterterm: p.experimental_counterterm,
    })
}

#[derive(Serialize)]
struct GsbSummary {
    excited_levels: usize,
    ground_levels: usize,
    fock_dim: usize,
    experimental_counterterm: bool,
    action_relative_gap: f64,
}

fn gsb(p: &GsbConfig, seed: u64) -> Result<Outcome> {
    let grid = build_grid(&p.grid)?;
    let basis = FockBasis::new(grid.len(), p.n_max)?;
    let model = Gsb::new(gsb_params(p, &grid)?, &grid, &basis)?;
    let h = model.assemble_gsb();
    let (ne, ng) = (model.excited_dim(), model.ground_dim());
    let mut psi_e = vec![C64::new(0.0, 0.0); ne];
    psi_e[0] = C64::new(1.0, 0.0);
    let psi_g = vec![C64::new(0.0, 0.0); ng];
    let rhs: Vec<C64> = psi_e.iter().chain(&psi_g).copied().collect();
    let rows: Vec<(C64, f64)> = p
        .z_points
        .par_iter()
        .map(|&zp| {
            let z = z_of(zp);
            let (x, _) = model.resolvent_apply(z, &psi_e, &psi_g)?;
            let flat = x.to_flat();
            let res = relative_residual(&h.matrix().shift(z), &flat, &rhs);
            Ok((flat[0], res))
        })
        .collect::<Result<_>>()?;
    let mut csv = Csv::new(&["z_re", "z_im", "vacuum_re", "vacuum_im", "residual"]);
    for (zp, (v, r)) in p.z_points.iter().zip(&rows) {
        csv.row(&[fmt_f64(zp[0]), fmt_f64(zp[1]), fmt_f64(v.re), fmt_f64(v.im), fmt_f64(*r)]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random = |n: usize| -> Vec<C64> {
        (0..n)
            .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect()
    };
    let (phi_e, phi_g) = (random(ne), random(ng));
    let action = model.gsb_singular_action(&phi_e, &phi_g)?;
    let s = GsbSummary {
        excited_levels: model.params().dim_e(),
        ground_levels: model.params().dim_g(),
        fock_dim: model.fock_dim(),
        experimental_counterterm: p.experimental_counterterm,
        action_relative_gap: action.relative_gap,
    };
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(Outcome {
        artifacts: vec![csv.into_artifact("gsb.csv"), Artifact::json("gsb.json", &s)],
        summary: vec![format!(
            "worst resolvent residual {}, domain action gap {}",
            fmt_f64(worst),
            fmt_f64(action.relative_gap)
        )],
    })
}

fn per_atom<T: Clone>(name: &str, v: &[T], n: usize, default: Option<T>) -> Result<Vec<T>> {
    match v.len() {
        0 => default
            .map(|d| vec![d; n])
            .ok_or_else(|| Error::invalid(format!("{name} must not be empty"))),
        1 => Ok(vec![v[0].clone(); n]),
        len if len == n => Ok(v.to_vec()),
        len => Err(Error::invalid(format!("{name} has {len} entries for {n} atoms"))),
    }
}

pub(super) fn multiatom_params(p: &MultiatomConfig, grid: &ModeGrid) -> Result<MultiAtomParams> {
    let n = p.n_atoms;
    let rules = per_atom("form_factors", &p.form_factors, n, None)?;
    Ok(MultiAtomParams {
        omega_e: per_atom("omega_e", &p.omega_e, n, None)?,
        omega_g: per_atom("omega_g", &p.omega_g, n, Some(0.0))?,
        f: rules.iter().map(|r| r.realize(grid)).collect::<Result<_>>()?,
        lambda: p.lambda,
        spin_spin: Default::default(),
    })
}

#[derive(Serialize)]
struct MultiSummary {
    n_atoms: usize,
    sector_sizes: Vec<usize>,
    dimension: usize,
    block_stats: BlockTridiagonalStats,
}

fn top_element(model: &MultiAtom, z: C64) -> Result<(C64, f64, BlockTridiagonalStats)> {
    let top = (1u32 << model.sectors().n_atoms()) - 1;
    let mut psi = vec![C64::new(0.0, 0.0); model.dim()];
    let idx = model.index(top, 0);
    psi[idx] = C64::new(1.0, 0.0);
    let thomas = model.resolvent(z)?;
    let (x, report) = thomas.solve(&psi)?;
    Ok((x[idx], report.residual, thomas.stats()))
}

fn multiatom(p: &MultiatomConfig) -> Result<Outcome> {
    let grid = build_grid(&p.grid)?;
    let basis = FockBasis::new(grid.len(), p.n_max)?;
    let params = multiatom_params(p, &grid)?;
    let model = MultiAtom::assemble_multi(params.clone(), &grid, &basis)?;
    let rows: Vec<(C64, f64, BlockTridiagonalStats)> = p
        .z_points
        .par_iter()
        .map(|&zp| top_element(&model, z_of(zp)))
        .collect::<Result<_>>()?;
    let mut csv = Csv::new(&["z_re", "z_im", "top_re", "top_im", "residual"]);
    for (zp, (v, r, _)) in p.z_points.iter().zip(&rows) {
        csv.row(&[fmt_f64(zp[0]), fmt_f64(zp[1]), fmt_f64(v.re), fmt_f64(v.im), fmt_f64(*r)]);
    }
    let s = MultiSummary {
        n_atoms: p.n_atoms,
        sector_sizes: model.sectors().sizes(),
        dimension: model.dim(),
        block_stats: rows[0].2,
    };
    let mut artifacts = vec![csv.into_artifact("multiatom.csv"), Artifact::json("multiatom.json", &s)];
    let mut summary = vec![format!(
        "N = {}, dimension {}, {} blocks (largest {})",
        p.n_atoms, s.dimension, s.block_stats.blocks, s.block_stats.max_block_dim
    )];
    if !p.cutoffs.is_empty() {
        let z = z_of(p.z_points[0]);
        let values: Vec<C64> = p
            .cutoffs
            .par_iter()
            .map(|&cut| {
                let mut q = params.clone();
                q.f = q.f.iter().map(|f| f.truncated(&grid, cut)).collect();
                Ok(top_element(&MultiAtom::assemble_multi(q, &grid, &basis)?, z)?.0)
            })
            .collect::<Result<_>>()?;
        let mut sweep = Csv::new(&["Lambda", "top_re", "top_im", "increment"]);
        for (i, (cut, v)) in p.cutoffs.iter().zip(&values).enumerate() {
            let inc = if i == 0 { f64::NAN } else { (v - values[i - 1]).norm() };
            sweep.row(&[fmt_f64(*cut), fmt_f64(v.re), fmt_f64(v.im), fmt_f64(inc)]);
        }
        let last = values.len() - 1;
        if last > 0 {
            summary.push(format!(
                "last cutoff increment {}",
                fmt_f64((values[last] - values[last - 1]).norm())
            ));
        }
        artifacts.push(sweep.into_artifact("multiatom_sweep.csv"));
    }
    Ok(Outcome { artifacts, summary })
}

fn decay_class(p: &DecayClassParams) -> Result<Outcome> {
    let grid = build_grid(&p.grid)?;
    let f = p.form_factor.realize(&grid)?;
    let mut csv = Csv::new(&["s", "p_fit", "r_min", "r_star", "coupling"]);
    let mut summary = Vec::new();
    for &s in &p.s_values {
        let fit = decay_exponent(&f, s, &grid, p.n_max)?;
        let coupling = if fit.r_min > fit.r_star {
            "none"
        } else if fit.r_min < 1.0 {
            "Arbitrary"
        } else {
            "Small"
        };
        csv.row(&[fmt_f64(s), fmt_f64(fit.p_fit), fmt_f64(fit.r_min), fmt_f64(fit.r_star), coupling.into()]);
        summary.push(format!(
            "s = {s}: p_fit = {:.4}, r in [{:.3}, {:.3}], coupling {coupling}",
            fit.p_fit, fit.r_min, fit.r_star
        ));
    }
    Ok(Outcome {
        artifacts: vec![csv.into_artifact("decay_class.csv")],
        summary,
    })
}
