//! Cutoff families, counterterm schedules and the convergence diagnostics
//! used to classify singular form factors.
//!
//! A cutoff family is the sharp truncation `f^Λ = f·1{ω ≤ Λ}` of a named
//! rule on one fixed grid. Counterterms are computed once from the stored
//! norm table, so `bare == dressed + λ²‖f^Λ‖²₋₁` holds bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fit::loglog_slope;
use crate::fock::FockBasis;
use crate::linalg::{lowest_eigenpairs, norm, spectral_norm_estimate};
use crate::modegrid::{decay_exponent, scale_norm_sq, DecayFit, FormFactor, FormFactorRule, ModeGrid};
use crate::sbmodel::{CountertermAnchor, SpinBoson, SpinBosonParams, TwoBlockState};
use crate::{Error, Result, C64};

/// Scale levels kept in the norm table.
pub const NORM_LEVELS: [f64; 3] = [0.0, -1.0, -2.0];
/// Power-iteration length for the norm-resolvent distance.
pub const DISTANCE_ITERATIONS: usize = 100;
/// Log–log slope above which a sequence is called divergent.
pub const DIVERGENCE_SLOPE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffFamily {
    rule: FormFactorRule,
    base: FormFactor,
    cutoffs: Vec<f64>,
    realized: Vec<FormFactor>,
    /// `‖f^Λ‖²_s` for `s` in [`NORM_LEVELS`].
    norms_sq: Vec<[f64; 3]>,
}

pub fn build_family(rule: &FormFactorRule, grid: &ModeGrid, cutoffs: &[f64]) -> Result<CutoffFamily> {
    if cutoffs.is_empty() {
        return Err(Error::invalid("cutoff family needs at least one cutoff"));
    }
    if cutoffs.iter().any(|c| !(c.is_finite() && *c > 0.0)) || cutoffs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("cutoffs must be positive and strictly increasing"));
    }
    let top = cutoffs[cutoffs.len() - 1];
    if top > grid.omega_support() {
        return Err(Error::invalid(format!(
            "cutoff {top} above the grid support {}",
            grid.omega_support()
        )));
    }
    let base = rule.realize(grid)?;
    let realized: Vec<FormFactor> = cutoffs.iter().map(|&c| base.truncated(grid, c)).collect();
    let norms_sq = realized
        .iter()
        .map(|f| NORM_LEVELS.map(|s| scale_norm_sq(f, s, grid)))
        .collect();
    Ok(CutoffFamily {
        rule: *rule,
        base,
        cutoffs: cutoffs.to_vec(),
        realized,
        norms_sq,
    })
}

fn level(s: f64) -> usize {
    NORM_LEVELS
        .iter()
        .position(|&l| l == s)
        .unwrap_or_else(|| panic!("norm table holds s in {NORM_LEVELS:?}, not {s}"))
}

impl CutoffFamily {
    pub fn rule(&self) -> &FormFactorRule {
        &self.rule
    }

    pub fn base(&self) -> &FormFactor {
        &self.base
    }

    pub fn cutoffs(&self) -> &[f64] {
        &self.cutoffs
    }

    pub fn len(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cutoffs.is_empty()
    }

    pub fn realized(&self, i: usize) -> &FormFactor {
        &self.realized[i]
    }

    /// Stored `‖f^{Λ_i}‖²_s`; `s` must be one of [`NORM_LEVELS`].
    pub fn norm_sq(&self, i: usize, s: f64) -> f64 {
        self.norms_sq[i][level(s)]
    }

    pub fn norm(&self, i: usize, s: f64) -> f64 {
        self.norm_sq(i, s).sqrt()
    }

    /// `‖f^{Λ_i} − f^{Λ_j}‖_s`.
    pub fn difference_norm(&self, i: usize, j: usize, s: f64, grid: &ModeGrid) -> f64 {
        scale_norm_sq(&self.realized[i].sub(&self.realized[j]), s, grid).sqrt()
    }
}

/// Bare excitation energies that keep the dressed one fixed along a family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenormSchedule {
    pub dressed_energy: f64,
    pub lambda: f64,
    pub anchor: CountertermAnchor,
    pub counterterms: Vec<f64>,
    pub bare: Vec<f64>,
}

/// Schedule with `c^Λ = λ²‖f^Λ‖²₋₁` taken from the stored norm table.
pub fn counterterm(omega_tilde: f64, lambda: f64, family: &CutoffFamily) -> RenormSchedule {
    let counterterms: Vec<f64> = (0..family.len())
        .map(|i| lambda * lambda * family.norm_sq(i, -1.0))
        .collect();
    schedule(omega_tilde, lambda, CountertermAnchor::ScaleNorm, counterterms)
}

/// Schedule for either anchor; agrees with [`counterterm`] for
/// [`CountertermAnchor::ScaleNorm`].
pub fn counterterm_with_anchor(
    omega_tilde: f64,
    lambda: f64,
    family: &CutoffFamily,
    grid: &ModeGrid,
    anchor: CountertermAnchor,
) -> RenormSchedule {
    match anchor {
        CountertermAnchor::ScaleNorm => counterterm(omega_tilde, lambda, family),
        CountertermAnchor::MinusOne => {
            let counterterms = family
                .realized
                .iter()
                .map(|f| crate::sbmodel::counterterm(lambda, f, grid, anchor))
                .collect();
            schedule(omega_tilde, lambda, anchor, counterterms)
        }
    }
}

fn schedule(omega_tilde: f64, lambda: f64, anchor: CountertermAnchor, counterterms: Vec<f64>) -> RenormSchedule {
    let bare = counterterms.iter().map(|c| omega_tilde + c).collect();
    RenormSchedule {
        dressed_energy: omega_tilde,
        lambda,
        anchor,
        counterterms,
        bare,
    }
}

impl RenormSchedule {
    /// Renormalized model at cutoff index `i`.
    pub fn model(&self, family: &CutoffFamily, i: usize, grid: &ModeGrid, basis: &FockBasis) -> Result<SpinBoson> {
        let p = SpinBosonParams::renormalized(
            self.dressed_energy,
            self.lambda,
            family.realized(i).clone(),
            self.anchor,
        );
        SpinBoson::new(p, grid, basis)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMode {
    /// Estimate of `‖R₁(z) − R₂(z)‖`.
    Norm,
    /// Largest `‖(R₁ − R₂)Ψ‖/‖Ψ‖` over the probes.
    Strong,
}

/// `Ψ₀` followed by `count` seeded random unit vectors.
pub fn default_probes(fock_dim: usize, count: usize, seed: u64) -> Vec<Vec<C64>> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![TwoBlockState::psi0(fock_dim).to_flat()];
    for _ in 0..count {
        let v: Vec<C64> = (0..2 * fock_dim)
            .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let n = norm(&v);
        out.push(v.into_iter().map(|x| x / n).collect());
    }
    out
}

/// Distance between the resolvents of two models on the same Fock space.
pub fn resolvent_distance(
    h1: &SpinBoson,
    h2: &SpinBoson,
    z: C64,
    mode: DistanceMode,
    probes: &[Vec<C64>],
    seed: u64,
) -> Result<f64> {
    if z.im == 0.0 {
        return Err(Error::invalid("resolvent distance needs Im z != 0"));
    }
    if h1.fock_dim() != h2.fock_dim() {
        return Err(Error::invalid("models live on different Fock spaces"));
    }
    let r1 = h1.resolvent(z)?;
    let r2 = h2.resolvent(z)?;
    let diff = |a: Vec<C64>, b: Vec<C64>| -> Vec<C64> { a.into_iter().zip(b).map(|(x, y)| x - y).collect() };
    match mode {
        DistanceMode::Norm => {
            let r1c = h1.resolvent(z.conj())?;
            let r2c = h2.resolvent(z.conj())?;
            spectral_norm_estimate(
                |v| Ok(diff(r1.apply_flat(v)?, r2.apply_flat(v)?)),
                |v| Ok(diff(r1c.apply_flat(v)?, r2c.apply_flat(v)?)),
                h1.dim(),
                DISTANCE_ITERATIONS,
                seed,
            )
        }
        DistanceMode::Strong => {
            let mut best: f64 = 0.0;
            for p in probes {
                if p.len() != h1.dim() {
                    return Err(Error::invalid("probe length does not match the model"));
                }
                let n = norm(p);
                if n == 0.0 {
                    continue;
                }
                best = best.max(norm(&diff(r1.apply_flat(p)?, r2.apply_flat(p)?)) / n);
            }
            Ok(best)
        }
    }
}

/// `⟨Ψ₀, (H − z)⁻¹ Ψ₀⟩`, which equals the vacuum element of `G(z)⁻¹`.
pub fn vacuum_propagator_element(model: &SpinBoson, z: C64) -> Result<C64> {
    let (x, _) = model.resolvent_apply(z, &TwoBlockState::psi0(model.fock_dim()))?;
    Ok(x.excited[0])
}

/// Continuum increment `λ² ∫_lo^hi [1/(ω − z) − 1/(ω + 1)] dω` of the
/// vacuum self-energy for `f ≡ 1`, `ω = k`, anchored at `−1`.
pub fn flat_tail_integral(lambda: f64, z: C64, lo: f64, hi: f64) -> C64 {
    let one = C64::new(1.0, 0.0);
    let log_z = ((one * hi - z) / (one * lo - z)).ln();
    let log_1 = ((hi + 1.0) / (lo + 1.0)).ln();
    (log_z - log_1) * (lambda * lambda)
}

/// Classification of a form factor along a cutoff sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CouplingClass {
    /// `f ∈ H`
    Regular,
    /// `f ∈ H₋₁ ∖ H`
    MinusOne,
    /// `f ∈ H^r₋ₛ ∖ H₋₁` with some admissible `r < 1`
    SingularSubcritical,
    /// `f ∈ H^r₋ₛ ∖ H₋₁` with `r = 1` only
    SingularCritical,
}

impl CouplingClass {
    pub fn label(&self) -> &'static str {
        match self {
            CouplingClass::Regular => "H",
            CouplingClass::MinusOne => "H_-1 \\ H",
            CouplingClass::SingularSubcritical => "H^r_-s \\ H_-1, r<1",
            CouplingClass::SingularCritical => "H^r_-s \\ H_-1, r=1",
        }
    }

    pub fn approximation(&self) -> &'static str {
        match self {
            CouplingClass::Regular => "none",
            CouplingClass::MinusOne => "norm resolvent",
            _ => "strong resolvent",
        }
    }

    pub fn coupling(&self) -> &'static str {
        match self {
            CouplingClass::SingularCritical => "Small",
            _ => "Arbitrary",
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self, CouplingClass::SingularSubcritical | CouplingClass::SingularCritical)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Finite,
    Diverging,
}

/// Slope test on `|q|` against `Λ` over the top decade of the sweep.
pub fn divergence_slope(cutoffs: &[f64], values: &[f64]) -> f64 {
    let top = cutoffs[cutoffs.len() - 1] / 10.0;
    let (x, y): (Vec<f64>, Vec<f64>) = cutoffs
        .iter()
        .zip(values)
        .filter(|(c, _)| **c >= top * (1.0 - 1e-12))
        .map(|(c, v)| (*c, v.abs()))
        .unzip();
    if y.iter().all(|v| *v == y[0]) {
        return 0.0;
    }
    loglog_slope(&x, &y)
}

pub fn verdict(slope: f64) -> Verdict {
    if slope > DIVERGENCE_SLOPE {
        Verdict::Diverging
    } else {
        Verdict::Finite
    }
}

/// Places a family in the classification table: the divergence tests on
/// its stored norms decide between `H`, `H₋₁ ∖ H` and the singular rows,
/// and for the latter the decay fit at scale `s` decides whether some
/// `r < 1` is admissible.
pub fn classify(family: &CutoffFamily, grid: &ModeGrid, s: f64) -> Result<(CouplingClass, Option<DecayFit>)> {
    let cutoffs = family.cutoffs();
    let n0: Vec<f64> = (0..family.len()).map(|i| family.norm_sq(i, 0.0)).collect();
    let n1: Vec<f64> = (0..family.len()).map(|i| family.norm_sq(i, -1.0)).collect();
    if verdict(divergence_slope(cutoffs, &n0)) == Verdict::Finite {
        return Ok((CouplingClass::Regular, None));
    }
    if verdict(divergence_slope(cutoffs, &n1)) == Verdict::Finite {
        return Ok((CouplingClass::MinusOne, None));
    }
    let fit = decay_exponent(family.realized(family.len() - 1), s, grid, DECAY_N_MAX)?;
    if fit.r_min > fit.r_star {
        return Err(Error::invalid(format!(
            "{} is in no H^r_-s class for s = {s}",
            family.rule().label()
        )));
    }
    let class = if fit.r_min < 1.0 {
        CouplingClass::SingularSubcritical
    } else {
        CouplingClass::SingularCritical
    };
    Ok((class, Some(fit)))
}

/// One witness form factor for the classification table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table1Witness {
    pub rule: FormFactorRule,
    /// Scale exponent `s ∈ (1, 2]` for the decay test of singular witnesses.
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub witness: String,
    pub class: CouplingClass,
    pub class_label: &'static str,
    pub approximation: &'static str,
    pub coupling: &'static str,
    pub decay: Option<DecayFit>,
    pub cutoffs: Vec<f64>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub mean_slope: f64,
    pub variance_slope: f64,
    pub mean_verdict: Verdict,
    pub variance_verdict: Verdict,
    /// The mean equals the excitation energy bit for bit at every cutoff.
    pub mean_is_omega_e: bool,
}

/// `n_max` used by the decay fit that separates the singular rows.
pub const DECAY_N_MAX: usize = 64;

/// Runs each witness along the cutoffs and classifies it. Regular and
/// `H₋₁` witnesses use the bare `omega_e`; singular ones are renormalized
/// with dressed energy `omega_e`.
pub fn table1_report(
    witnesses: &[Table1Witness],
    grid: &ModeGrid,
    cutoffs: &[f64],
    omega_e: f64,
    lambda: f64,
    basis: &FockBasis,
) -> Result<Vec<Table1Row>> {
    witnesses
        .iter()
        .map(|w| {
            let family = build_family(&w.rule, grid, cutoffs)?;
            let (class, decay) = classify(&family, grid, w.s)?;
            let stats: Vec<_> = (0..family.len())
                .into_par_iter()
                .map(|i| {
                    let f = family.realized(i).clone();
                    let p = if class.is_singular() {
                        SpinBosonParams::renormalized(omega_e, lambda, f, CountertermAnchor::ScaleNorm)
                    } else {
                        SpinBosonParams::regular(omega_e, lambda, f)
                    };
                    Ok(SpinBoson::new(p, grid, basis)?.psi0_energy_stats())
                })
                .collect::<Result<_>>()?;
            let mean: Vec<f64> = stats.iter().map(|s| s.mean).collect();
            let variance: Vec<f64> = stats.iter().map(|s| s.variance).collect();
            let mean_slope = divergence_slope(cutoffs, &mean);
            let variance_slope = divergence_slope(cutoffs, &variance);
            Ok(Table1Row {
                witness: w.rule.label(),
                class,
                class_label: class.label(),
                approximation: class.approximation(),
                coupling: class.coupling(),
                decay,
                cutoffs: cutoffs.to_vec(),
                mean_is_omega_e: mean.iter().all(|m| *m == omega_e),
                mean,
                variance,
                mean_slope,
                variance_slope,
                mean_verdict: verdict(mean_slope),
                variance_verdict: verdict(variance_slope),
            })
        })
        .collect()
}

/// One line of a cutoff sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub cutoff: f64,
    pub norm_0: f64,
    pub norm_m1: f64,
    pub norm_m2: f64,
    pub omega_bare: f64,
    pub mean_energy: f64,
    pub variance_energy: f64,
    /// Distance to the previous cutoff's resolvent; NaN on the first row.
    pub res_dist_norm: f64,
    pub res_dist_strong: f64,
}

/// Sweep settings shared by every cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub omega_e: f64,
    pub lambda: f64,
    /// Renormalize with this anchor, or keep `omega_e` as the bare energy.
    pub renormalize: Option<CountertermAnchor>,
    pub z: C64,
    pub probes: usize,
    pub seed: u64,
}

/// Norms, energetics and consecutive resolvent distances along a family.
pub fn renorm_sweep(family: &CutoffFamily, grid: &ModeGrid, basis: &FockBasis, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let models: Vec<SpinBoson> = (0..family.len())
        .into_par_iter()
        .map(|i| {
            let f = family.realized(i).clone();
            let p = match spec.renormalize {
                Some(anchor) => SpinBosonParams::renormalized(spec.omega_e, spec.lambda, f, anchor),
                None => SpinBosonParams::regular(spec.omega_e, spec.lambda, f),
            };
            SpinBoson::new(p, grid, basis)
        })
        .collect::<Result<_>>()?;
    let probes = default_probes(basis.dim(), spec.probes, spec.seed);
    (0..family.len())
        .into_par_iter()
        .map(|i| {
            let stats = models[i].psi0_energy_stats();
            let (dn, ds) = if i == 0 {
                (f64::NAN, f64::NAN)
            } else {
                let (a, b) = (&models[i - 1], &models[i]);
                (
                    resolvent_distance(a, b, spec.z, DistanceMode::Norm, &probes, spec.seed)?,
                    resolvent_distance(a, b, spec.z, DistanceMode::Strong, &probes, spec.seed)?,
                )
            };
            Ok(SweepRow {
                cutoff: family.cutoffs()[i],
                norm_0: family.norm(i, 0.0),
                norm_m1: family.norm(i, -1.0),
                norm_m2: family.norm(i, -2.0),
                omega_bare: models[i].bare_omega_e(),
                mean_energy: stats.mean,
                variance_energy: stats.variance,
                res_dist_norm: dn,
                res_dist_strong: ds,
            })
        })
        .collect()
}

/// Lowest eigenvalue of the Hermitian propagator `G(x)` at real `x` below
/// the ground-sector spectrum, per coupling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdScan {
    pub z: f64,
    pub lambdas: Vec<f64>,
    pub lowest: Vec<f64>,
    /// First coupling at which `G(x)` stops being positive definite.
    pub threshold: Option<f64>,
}

/// Empirical coupling at which the renormalized propagator loses
/// invertibility near a real point. This is a finite-size observation, not
/// a bound on the true threshold.
pub fn coupling_threshold(
    omega_tilde: f64,
    f: &FormFactor,
    grid: &ModeGrid,
    basis: &FockBasis,
    anchor: CountertermAnchor,
    lambdas: &[f64],
    z: f64,
) -> Result<ThresholdScan> {
    if !(z < 0.0) {
        return Err(Error::invalid("threshold scan needs a real point below the ground-sector spectrum"));
    }
    if lambdas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("couplings must be strictly increasing"));
    }
    let lowest: Vec<f64> = lambdas
        .par_iter()
        .map(|&lambda| {
            let m = SpinBoson::new(SpinBosonParams::renormalized(omega_tilde, lambda, f.clone(), anchor), grid, basis)?;
            let g = m.propagator(C64::new(z, 0.0))?;
            Ok(lowest_eigenpairs(&g, 1)?[0].value)
        })
        .collect::<Result<_>>()?;
    let threshold = lambdas.iter().zip(&lowest).find(|(_, v)| **v <= 0.0).map(|(l, _)| *l);
    Ok(ThresholdScan {
        z,
        lambdas: lambdas.to_vec(),
        lowest,
        threshold,
    })
}
