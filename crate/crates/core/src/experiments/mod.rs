//! Batch experiments driven by JSON config files.
//!
//! A config names one experiment and its parameters; running it produces CSV
//! and JSON artifacts plus a `manifest.json` with a SHA-256 per file. Outputs
//! depend only on the config, so reruns reproduce the manifest exactly.

mod output;
mod runners;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use output::{fmt_f64, Artifact, Csv, Manifest, ManifestEntry, MANIFEST_NAME};

use crate::fock::fock_dimension;
use crate::modegrid::{build_grid, FormFactorRule, GridSpec};
use crate::renorm::Table1Witness;
use crate::sbmodel::CountertermAnchor;
use crate::{Error, Result, C64};

pub const SCHEMA_VERSION: u32 = 1;
/// Environment variable that replaces the config's `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "SBLAB_OUTPUT_DIR";
pub const FAILURE_NAME: &str = "failure.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; all cores when absent.
    #[serde(default)]
    pub workers: Option<usize>,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    Spectrum(SpectrumParams),
    ResolventCheck(ResolventCheckParams),
    RenormSweep(RenormSweepParams),
    Table1(Table1Params),
    Gsb(GsbConfig),
    Multiatom(MultiatomConfig),
    DecayClass(DecayClassParams),
}

/// Names and one-line descriptions, in a fixed order.
pub const EXPERIMENTS: [(&str, &str); 7] = [
    ("spectrum", "lowest eigenvalues of the spin-boson Hamiltonian"),
    ("resolvent-check", "propagator resolvent against the dense inverse over a z-grid"),
    ("renorm-sweep", "norms, energetics and resolvent distances along a cutoff family"),
    ("table1", "mean/variance divergence verdicts for witness form factors"),
    ("gsb", "generalized spin-boson resolvent and domain-action check"),
    ("multiatom", "block-tridiagonal N-atom resolvent and cutoff convergence"),
    ("decay-class", "decay-exponent fit deciding the admissible coupling class"),
];

pub fn list_experiments() -> String {
    EXPERIMENTS
        .iter()
        .map(|(name, desc)| format!("{name:<16} {desc}\n"))
        .collect()
}

/// Spin–boson model shared by several experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub grid: GridSpec,
    pub form_factor: FormFactorRule,
    pub n_max: usize,
    pub omega_e: f64,
    #[serde(default)]
    pub omega_g: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    pub model: ModelSpec,
    pub count: usize,
}

fn default_tolerance() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolventCheckParams {
    pub model: ModelSpec,
    /// `[re, im]` pairs.
    pub z_points: Vec<[f64; 2]>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_probes() -> usize {
    4
}

fn default_s() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenormSweepParams {
    pub grid: GridSpec,
    pub form_factor: FormFactorRule,
    pub cutoffs: Vec<f64>,
    pub n_max: usize,
    /// Bare energy, or the dressed one when `renormalize` is set.
    pub omega_e: f64,
    pub lambda: f64,
    #[serde(default)]
    pub renormalize: Option<CountertermAnchor>,
    pub z: [f64; 2],
    #[serde(default = "default_probes")]
    pub probes: usize,
    /// Scale exponent for the decay test of singular families.
    #[serde(default = "default_s")]
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table1Params {
    pub grid: GridSpec,
    pub cutoffs: Vec<f64>,
    pub n_max: usize,
    pub omega_e: f64,
    pub lambda: f64,
    pub witnesses: Vec<Table1Witness>,
}

/// A matrix entry: a real number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    pub fn value(self) -> C64 {
        match self {
            Entry::Real(x) => C64::new(x, 0.0),
            Entry::Complex([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    /// Rows index excited levels, columns ground levels.
    pub sigma_plus: Vec<Vec<Entry>>,
    pub form_factor: FormFactorRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GsbConfig {
    pub grid: GridSpec,
    pub n_max: usize,
    pub e_e: Vec<Vec<Entry>>,
    pub e_g: Vec<Vec<Entry>>,
    pub channels: Vec<ChannelSpec>,
    pub lambda: f64,
    #[serde(default)]
    pub experimental_counterterm: bool,
    pub z_points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiatomConfig {
    pub grid: GridSpec,
    pub n_max: usize,
    pub n_atoms: usize,
    /// One entry shared by all atoms, or one per atom.
    pub omega_e: Vec<f64>,
    #[serde(default)]
    pub omega_g: Vec<f64>,
    /// One rule shared by all atoms, or one per atom.
    pub form_factors: Vec<FormFactorRule>,
    pub lambda: f64,
    pub z_points: Vec<[f64; 2]>,
    /// Optional cutoff sweep of the all-excited vacuum element.
    #[serde(default)]
    pub cutoffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayClassParams {
    pub grid: GridSpec,
    pub form_factor: FormFactorRule,
    pub s_values: Vec<f64>,
    pub n_max: usize,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Spectrum(_) => "spectrum",
            Experiment::ResolventCheck(_) => "resolvent-check",
            Experiment::RenormSweep(_) => "renorm-sweep",
            Experiment::Table1(_) => "table1",
            Experiment::Gsb(_) => "gsb",
            Experiment::Multiatom(_) => "multiatom",
            Experiment::DecayClass(_) => "decay-class",
        }
    }
}

fn check_fock(modes: usize, n_max: usize, copies: usize) -> Result<()> {
    let cap = crate::fock::DEFAULT_DIMENSION_CAP;
    match fock_dimension(modes, n_max) {
        Some(d) if d.saturating_mul(copies) <= cap => Ok(()),
        Some(d) => Err(Error::TooLarge { dim: d * copies, cap }),
        None => Err(Error::TooLarge { dim: usize::MAX, cap }),
    }
}

fn check_z(points: &[[f64; 2]]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::invalid("z_points must not be empty"));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("z_points must be finite"));
    }
    Ok(())
}

fn check_cutoffs(grid: &GridSpec, cutoffs: &[f64], rule: Option<&FormFactorRule>) -> Result<()> {
    let g = build_grid(grid)?;
    crate::renorm::build_family(rule.unwrap_or(&FormFactorRule::power(0.0)), &g, cutoffs).map(|_| ())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Structural checks that need no heavy numerics.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.workers == Some(0) {
            return Err(Error::invalid("workers must be at least 1"));
        }
        match &self.experiment {
            Experiment::Spectrum(p) => {
                let g = build_grid(&p.model.grid)?;
                check_fock(g.len(), p.model.n_max, 2)?;
                if p.count == 0 {
                    return Err(Error::invalid("count must be at least 1"));
                }
                p.model.form_factor.realize(&g).map(|_| ())
            }
            Experiment::ResolventCheck(p) => {
                let g = build_grid(&p.model.grid)?;
                check_fock(g.len(), p.model.n_max, 2)?;
                let dim = 2 * fock_dimension(g.len(), p.model.n_max).unwrap_or(usize::MAX);
                if dim > crate::linalg::DENSE_ORACLE_CAP {
                    return Err(Error::invalid(format!(
                        "resolvent-check dimension {dim} exceeds the dense oracle cap"
                    )));
                }
                check_z(&p.z_points)?;
                if p.z_points.iter().any(|z| z[1] == 0.0) {
                    return Err(Error::invalid("resolvent-check needs Im z != 0"));
                }
                p.model.form_factor.realize(&g).map(|_| ())
            }
            Experiment::RenormSweep(p) => {
                let g = build_grid(&p.grid)?;
                check_fock(g.len(), p.n_max, 2)?;
                check_cutoffs(&p.grid, &p.cutoffs, Some(&p.form_factor))?;
                check_z(&[p.z])?;
                if p.z[1] == 0.0 {
                    return Err(Error::invalid("renorm-sweep needs Im z != 0"));
                }
                if !(p.s > 1.0 && p.s <= 2.0) {
                    return Err(Error::invalid("s must lie in (1, 2]"));
                }
                Ok(())
            }
            Experiment::Table1(p) => {
                let g = build_grid(&p.grid)?;
                check_fock(g.len(), p.n_max, 2)?;
                if p.witnesses.is_empty() {
                    return Err(Error::invalid("table1 needs at least one witness"));
                }
                for w in &p.witnesses {
                    check_cutoffs(&p.grid, &p.cutoffs, Some(&w.rule))?;
                }
                Ok(())
            }
            Experiment::Gsb(p) => {
                let g = build_grid(&p.grid)?;
                check_fock(g.len(), p.n_max, p.e_e.len() + p.e_g.len())?;
                check_z(&p.z_points)?;
                runners::gsb_params(p, &g).map(|_| ())
            }
            Experiment::Multiatom(p) => {
                let g = build_grid(&p.grid)?;
                crate::multiatom::sector_map(p.n_atoms)?;
                check_fock(g.len(), p.n_max, 1 << p.n_atoms)?;
                check_z(&p.z_points)?;
                if !p.cutoffs.is_empty() {
                    check_cutoffs(&p.grid, &p.cutoffs, None)?;
                }
                runners::multiatom_params(p, &g).map(|_| ())
            }
            Experiment::DecayClass(p) => {
                let g = build_grid(&p.grid)?;
                let f = p.form_factor.realize(&g)?;
                if p.s_values.is_empty() {
                    return Err(Error::invalid("s_values must not be empty"));
                }
                for &s in &p.s_values {
                    crate::modegrid::decay_exponent(&f, s, &g, p.n_max)?;
                }
                Ok(())
            }
        }
    }
}

/// Artifacts and human-readable summary lines of one run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub summary: Vec<String>,
}

/// Validates and runs the experiment, returning its artifacts unwritten.
pub fn execute(config: &ExperimentConfig) -> Result<Outcome> {
    config.validate()?;
    let run = || runners::run(config);
    match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

/// Result of [`run_config`].
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub manifest: Manifest,
    pub summary: Vec<String>,
}

#[derive(Debug, Serialize)]
struct Failure<'a> {
    experiment: &'a str,
    error: String,
    report: Option<crate::linalg::SolveReport>,
}

/// Runs and writes artifacts to `output_dir` (or `output_override`). On a
/// numerical failure the error and its solve report go to `failure.json`.
pub fn run_config(config: &ExperimentConfig, output_override: Option<&Path>) -> Result<RunSummary> {
    let dir = output_override.map(Path::to_path_buf).unwrap_or_else(|| config.output_dir.clone());
    match execute(config) {
        Ok(out) => {
            let manifest = output::write_all(
                &dir,
                &out.artifacts,
                config.schema_version,
                config.experiment.name(),
                config.seed,
            )?;
            Ok(RunSummary {
                output_dir: dir,
                manifest,
                summary: out.summary,
            })
        }
        Err(e) => {
            if e.is_numerical() {
                let f = Failure {
                    experiment: config.experiment.name(),
                    error: e.to_string(),
                    report: e.solve_report().copied(),
                };
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join(FAILURE_NAME), Artifact::json(FAILURE_NAME, &f).bytes)?;
            }
            Err(e)
        }
    }
}

/// Process exit status for a run result: 0 ok, 2 bad config, 3 numerical
/// failure, 1 for I/O trouble.
pub fn exit_code(result: &Result<RunSummary>) -> i32 {
    match result {
        Ok(_) => 0,
        Err(e) if e.is_numerical() => 3,
        Err(Error::Io(_)) => 1,
        Err(_) => 2,
    }
}
