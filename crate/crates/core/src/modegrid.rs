//! Discretized one-particle space: mode points, quadrature weights, the
//! dispersion relation, and the scale norms `‖f‖_s = (Σ w ω^s |f|²)^{1/2}`.

use serde::{Deserialize, Serialize};

use crate::fit::loglog_slope;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Dispersion {
    /// `ω = k`
    Linear,
    /// `ω = k²`
    Quadratic,
    /// `ω = √(k² + mass²)`
    Relativistic { mass: f64 },
}

impl Dispersion {
    pub fn eval(&self, k: f64) -> f64 {
        match *self {
            Dispersion::Linear => k,
            Dispersion::Quadratic => k * k,
            Dispersion::Relativistic { mass } => (k * k + mass * mass).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quadrature {
    #[default]
    Midpoint,
    Trapezoid,
    /// Midpoint rule in `u = ln k`: points `e^{u_i}`, weights `k_i·Δu`.
    /// Resolves many decades with few points; needs `k_min > 0`.
    LogMidpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub k_min: f64,
    pub k_max: f64,
    pub count: usize,
    pub dispersion: Dispersion,
    #[serde(default)]
    pub quadrature: Quadrature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
    omega: Vec<f64>,
    mass_gap: f64,
    /// Upper end of the dispersion range the grid discretizes.
    omega_support: f64,
}

pub fn build_grid(spec: &GridSpec) -> Result<ModeGrid> {
    let GridSpec {
        k_min,
        k_max,
        count,
        dispersion,
        quadrature,
    } = *spec;
    if count == 0 {
        return Err(Error::invalid("grid needs at least one point"));
    }
    if !(k_min.is_finite() && k_max.is_finite() && k_min < k_max) {
        return Err(Error::invalid(format!("bad interval [{k_min}, {k_max}]")));
    }
    let (points, weights): (Vec<f64>, Vec<f64>) = match quadrature {
        Quadrature::Midpoint => {
            let h = (k_max - k_min) / count as f64;
            (0..count)
                .map(|i| (k_min + (i as f64 + 0.5) * h, h))
                .unzip()
        }
        Quadrature::Trapezoid => {
            if count < 2 {
                return Err(Error::invalid("trapezoid rule needs at least two points"));
            }
            let h = (k_max - k_min) / (count - 1) as f64;
            (0..count)
                .map(|i| {
                    let w = if i == 0 || i == count - 1 { 0.5 * h } else { h };
                    (k_min + i as f64 * h, w)
                })
                .unzip()
        }
        Quadrature::LogMidpoint => {
            if k_min <= 0.0 {
                return Err(Error::invalid("log-midpoint rule needs k_min > 0"));
            }
            let (u0, u1) = (k_min.ln(), k_max.ln());
            let h = (u1 - u0) / count as f64;
            (0..count)
                .map(|i| {
                    let k = (u0 + (i as f64 + 0.5) * h).exp();
                    (k, k * h)
                })
                .unzip()
        }
    };
    let omega = points.iter().map(|&k| dispersion.eval(k)).collect();
    let mut grid = ModeGrid::from_parts(points, weights, omega)?;
    grid.omega_support = grid.omega_support.max(dispersion.eval(k_max));
    Ok(grid)
}

impl ModeGrid {
    /// Grid from explicit samples; checks every invariant.
    pub fn from_parts(points: Vec<f64>, weights: Vec<f64>, omega: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("grid needs at least one point"));
        }
        if weights.len() != points.len() || omega.len() != points.len() {
            return Err(Error::invalid("points, weights and dispersion lengths differ"));
        }
        if points.windows(2).any(|p| !(p[0] < p[1])) || points.iter().any(|k| !k.is_finite()) {
            return Err(Error::invalid("grid points must be finite and strictly increasing"));
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::invalid("quadrature weights must be positive"));
        }
        let mass_gap = omega.iter().copied().fold(f64::INFINITY, f64::min);
        if !(mass_gap > 0.0) || omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid(format!(
                "dispersion must be strictly positive (min ω = {mass_gap})"
            )));
        }
        let omega_support = omega.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            points,
            weights,
            omega,
            mass_gap,
            omega_support,
        })
    }

    /// Largest energy covered by the grid: `ω(k_max)` for built grids, the
    /// largest sample otherwise.
    pub fn omega_support(&self) -> f64 {
        self.omega_support
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn mass_gap(&self) -> f64 {
        self.mass_gap
    }

    /// `⟨f, g⟩ = Σ w conj(f) g`.
    pub fn inner(&self, f: &FormFactor, g: &FormFactor) -> C64 {
        self.weights
            .iter()
            .zip(f.values().iter().zip(g.values()))
            .map(|(w, (a, b))| a.conj() * b * *w)
            .sum()
    }

    /// `Σ w conj(f) g / (ω − z)`, the vacuum element of the self-energy.
    pub fn resolvent_overlap(&self, f: &FormFactor, g: &FormFactor, z: C64) -> C64 {
        (0..self.len())
            .map(|i| f.values()[i].conj() * g.values()[i] * self.weights[i] / (self.omega[i] - z))
            .sum()
    }
}

/// A form factor sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormFactor {
    values: Vec<C64>,
    label: String,
}

impl FormFactor {
    pub fn new(values: Vec<C64>, label: impl Into<String>) -> Result<Self> {
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid("form factor has non-finite entries"));
        }
        Ok(Self {
            values,
            label: label.into(),
        })
    }

    /// Samples `f(k)` at the grid points.
    pub fn from_fn<F: Fn(f64) -> C64>(grid: &ModeGrid, label: impl Into<String>, f: F) -> Result<Self> {
        Self::new(grid.points().iter().map(|&k| f(k)).collect(), label)
    }

    pub fn zero(grid: &ModeGrid) -> Self {
        Self {
            values: vec![C64::new(0.0, 0.0); grid.len()],
            label: "zero".into(),
        }
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_grid(&self, grid: &ModeGrid) -> Result<()> {
        if self.len() != grid.len() {
            return Err(Error::invalid(format!(
                "form factor '{}' has {} samples, grid has {}",
                self.label,
                self.len(),
                grid.len()
            )));
        }
        Ok(())
    }

    /// Sharp cutoff `f·1{ω ≤ Λ}`.
    pub fn truncated(&self, grid: &ModeGrid, cutoff: f64) -> Self {
        let values = self
            .values
            .iter()
            .zip(grid.omega())
            .map(|(v, &w)| if w <= cutoff { *v } else { C64::new(0.0, 0.0) })
            .collect();
        Self {
            values,
            label: format!("{}|cut={cutoff}", self.label),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
            label: format!("{}-{}", self.label, other.label),
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * s).collect(),
            label: self.label.clone(),
        }
    }
}

/// Named form-factor rules usable from config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FormFactorRule {
    /// `amplitude · k^exponent`
    Power {
        exponent: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `amplitude` on the lowest mode only.
    LowestMode {
        #[serde(default = "one")]
        amplitude: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl FormFactorRule {
    pub fn power(exponent: f64) -> Self {
        FormFactorRule::Power {
            exponent,
            amplitude: 1.0,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            FormFactorRule::Power { exponent, amplitude } if amplitude == 1.0 => format!("k^{exponent}"),
            FormFactorRule::Power { exponent, amplitude } => format!("{amplitude}*k^{exponent}"),
            FormFactorRule::LowestMode { .. } => "lowest-mode".into(),
        }
    }

    pub fn realize(&self, grid: &ModeGrid) -> Result<FormFactor> {
        match *self {
            FormFactorRule::Power { exponent, amplitude } => {
                if exponent != 0.0 && grid.points()[0] <= 0.0 {
                    return Err(Error::invalid("power-law form factor needs k > 0"));
                }
                FormFactor::from_fn(grid, self.label(), |k| {
                    C64::new(amplitude * if exponent == 0.0 { 1.0 } else { k.powf(exponent) }, 0.0)
                })
            }
            FormFactorRule::LowestMode { amplitude } => {
                let mut values = vec![C64::new(0.0, 0.0); grid.len()];
                values[0] = C64::new(amplitude, 0.0);
                FormFactor::new(values, self.label())
            }
        }
    }
}

/// `ω^s`, with the common integer exponents computed without `powf` so that
/// closed-form oracles using `1/ω` agree to the last bit.
pub(crate) fn omega_pow(omega: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else if s == 1.0 {
        omega
    } else if s == -1.0 {
        1.0 / omega
    } else if s == 2.0 {
        omega * omega
    } else if s == -2.0 {
        1.0 / (omega * omega)
    } else {
        omega.powf(s)
    }
}

/// `‖f‖_s² = Σ w ω^s |f|²`.
pub fn scale_norm_sq(f: &FormFactor, s: f64, grid: &ModeGrid) -> f64 {
    assert_eq!(f.len(), grid.len(), "scale_norm: form factor/grid length");
    (0..grid.len())
        .map(|i| grid.weights[i] * omega_pow(grid.omega[i], s) * f.values[i].norm_sqr())
        .sum()
}

pub fn scale_norm(f: &FormFactor, s: f64, grid: &ModeGrid) -> f64 {
    scale_norm_sq(f, s, grid).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// Log–log slope of `I_n` over the upper half of `[1, n_max]`.
    pub p_fit: f64,
    /// `min(1, s − p_fit)`; the class holds for `r ∈ [s − 1, r_star]`.
    pub r_star: f64,
    pub r_min: f64,
}

/// Fits the decay of `I_n = Σ w |f|² / (ω + (n−1)m)^s`.
pub fn decay_exponent(f: &FormFactor, s: f64, grid: &ModeGrid, n_max: usize) -> Result<DecayFit> {
    f.check_grid(grid)?;
    if !(s > 1.0 && s <= 2.0) {
        return Err(Error::invalid(format!("decay exponent needs s in (1, 2], got {s}")));
    }
    if n_max < 8 {
        return Err(Error::invalid("decay exponent needs n_max >= 8"));
    }
    let m = grid.mass_gap();
    let ns: Vec<usize> = (n_max / 2..=n_max).collect();
    let mut xs = Vec::with_capacity(ns.len());
    let mut ys = Vec::with_capacity(ns.len());
    for &n in &ns {
        let shift = (n - 1) as f64 * m;
        let i_n: f64 = (0..grid.len())
            .map(|i| grid.weights[i] * f.values[i].norm_sqr() / (grid.omega[i] + shift).powf(s))
            .sum();
        if i_n == 0.0 {
            return Err(Error::invalid("decay exponent of a vanishing form factor"));
        }
        xs.push(n as f64);
        ys.push(i_n);
    }
    let p_fit = loglog_slope(&xs, &ys);
    Ok(DecayFit {
        p_fit,
        r_star: (s - p_fit).min(1.0),
        r_min: s - 1.0,
    })
}
