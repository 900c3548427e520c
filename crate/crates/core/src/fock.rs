//! Truncated bosonic Fock space in the occupation-number basis.
//!
//! States are grouped by total boson number `n = 0..=n_max`. Inside a sector
//! a state is stored as its sorted list of occupied mode indices (with
//! repetition), and sectors are ordered ascending in that list. For the
//! one-boson sector this is plain mode order.

use std::io::{BufRead, Write};
use std::ops::Range;

use crate::modegrid::{omega_pow, ModeGrid};
use crate::{Error, Result, C64};

pub const DEFAULT_DIMENSION_CAP: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct FockBasis {
    modes: usize,
    n_max: usize,
    /// `offsets[n]..offsets[n+1]` is sector `n`.
    offsets: Vec<usize>,
    /// Sector `n` stores `n` mode indices per state, back to back.
    sectors: Vec<Vec<u32>>,
    /// `binom[a][b] = C(a, b)` (saturating) for ranking.
    binom: Vec<Vec<u64>>,
}

fn binomial_table(top: usize, width: usize) -> Vec<Vec<u64>> {
    let mut t = vec![vec![0u64; width + 1]; top + 1];
    for a in 0..=top {
        t[a][0] = 1;
        for b in 1..=width.min(a) {
            t[a][b] = t[a - 1][b - 1].saturating_add(if b < a { t[a - 1][b] } else { 0 });
        }
    }
    t
}

/// Number of states with at most `n_max` bosons in `modes` modes, or `None`
/// on overflow.
pub fn fock_dimension(modes: usize, n_max: usize) -> Option<usize> {
    // Σ_{n ≤ n_max} C(M+n−1, n) = C(M+n_max, n_max)
    let mut acc: u128 = 1;
    for i in 1..=n_max as u128 {
        acc = acc.checked_mul(modes as u128 + i)? / i;
    }
    usize::try_from(acc).ok()
}

pub fn build_basis(modes: usize, n_max: usize) -> Result<FockBasis> {
    FockBasis::with_cap(modes, n_max, DEFAULT_DIMENSION_CAP)
}

impl FockBasis {
    pub fn new(modes: usize, n_max: usize) -> Result<Self> {
        build_basis(modes, n_max)
    }

    pub fn with_cap(modes: usize, n_max: usize, cap: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::invalid("Fock space needs at least one mode"));
        }
        if modes > u32::MAX as usize {
            return Err(Error::invalid("too many modes"));
        }
        let dim = fock_dimension(modes, n_max).unwrap_or(usize::MAX);
        if dim > cap {
            return Err(Error::TooLarge { dim, cap });
        }
        let binom = binomial_table(modes + n_max, n_max + 1);
        let mut offsets = vec![0usize];
        let mut sectors = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let count = binom[modes + n - 1][n] as usize;
            let mut data = Vec::with_capacity(count * n);
            if n > 0 {
                let mut cur = vec![0u32; n];
                loop {
                    data.extend_from_slice(&cur);
                    // next nondecreasing sequence in lexicographic order
                    let Some(p) = (0..n).rev().find(|&p| (cur[p] as usize) < modes - 1) else {
                        break;
                    };
                    let v = cur[p] + 1;
                    for c in cur[p..].iter_mut() {
                        *c = v;
                    }
                }
            }
            debug_assert_eq!(data.len(), n * count);
            offsets.push(offsets[n] + count);
            sectors.push(data);
        }
        debug_assert_eq!(*offsets.last().unwrap(), dim);
        Ok(Self {
            modes,
            n_max,
            offsets,
            sectors,
            binom,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Sector start positions, with the dimension appended.
    pub fn sector_offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn sector_range(&self, n: usize) -> Range<usize> {
        self.offsets[n]..self.offsets[n + 1]
    }

    /// Total boson number of basis state `i`.
    pub fn sector_of(&self, i: usize) -> usize {
        self.offsets.partition_point(|&o| o <= i) - 1
    }

    /// Sorted occupied mode indices of basis state `i`, with repetition.
    pub fn mode_list(&self, i: usize) -> &[u32] {
        let n = self.sector_of(i);
        let local = i - self.offsets[n];
        &self.sectors[n][local * n..(local + 1) * n]
    }

    pub fn occupations(&self, i: usize) -> Vec<u32> {
        let mut occ = vec![0u32; self.modes];
        for &m in self.mode_list(i) {
            occ[m as usize] += 1;
        }
        occ
    }

    /// Position of the state with the given sorted mode list.
    pub fn index_of_modes(&self, list: &[u32]) -> Option<usize> {
        let n = list.len();
        if n > self.n_max
            || list.windows(2).any(|w| w[0] > w[1])
            || list.iter().any(|&m| m as usize >= self.modes)
        {
            return None;
        }
        let m = self.modes;
        let mut rank = 0u64;
        let mut prev = 0usize;
        for (p, &a) in list.iter().enumerate() {
            let a = a as usize;
            let r = n - p - 1;
            // sequences whose p-th entry lies in [prev, a)
            rank += self.binom[m - prev + r][r + 1] - self.binom[m - a + r][r + 1];
            prev = a;
        }
        Some(self.offsets[n] + rank as usize)
    }

    pub fn index_of_occupations(&self, occ: &[u32]) -> Option<usize> {
        if occ.len() != self.modes {
            return None;
        }
        let list: Vec<u32> = occ
            .iter()
            .enumerate()
            .flat_map(|(m, &k)| std::iter::repeat_n(m as u32, k as usize))
            .collect();
        self.index_of_modes(&list)
    }

    /// Free-field energies `Σ_j n_j ω_j`, one per basis state.
    pub fn energies(&self, grid: &ModeGrid) -> Vec<f64> {
        assert_eq!(grid.len(), self.modes, "basis/grid mode count");
        let omega = grid.omega();
        (0..self.dim())
            .map(|i| self.mode_list(i).iter().map(|&m| omega[m as usize]).sum())
            .collect()
    }

    pub fn check_grid(&self, grid: &ModeGrid) -> Result<()> {
        if grid.len() != self.modes {
            return Err(Error::invalid(format!(
                "grid has {} modes, Fock basis has {}",
                grid.len(),
                self.modes
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockState<'b> {
    basis: &'b FockBasis,
    coeffs: Vec<C64>,
}

pub fn vacuum(basis: &FockBasis) -> FockState<'_> {
    let mut coeffs = vec![C64::new(0.0, 0.0); basis.dim()];
    coeffs[0] = C64::new(1.0, 0.0);
    FockState { basis, coeffs }
}

impl<'b> FockState<'b> {
    pub fn new(basis: &'b FockBasis, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != basis.dim() {
            return Err(Error::invalid(format!(
                "state has {} coefficients, basis has {}",
                coeffs.len(),
                basis.dim()
            )));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::invalid("state has non-finite coefficients"));
        }
        Ok(Self { basis, coeffs })
    }

    pub fn basis(&self) -> &'b FockBasis {
        self.basis
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn norm(&self) -> f64 {
        crate::linalg::norm(&self.coeffs)
    }

    /// One line per nonzero coefficient: `n_1 … n_M re im`.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == C64::new(0.0, 0.0) {
                continue;
            }
            for n in self.basis.occupations(i) {
                write!(out, "{n} ")?;
            }
            writeln!(out, "{:.16e} {:.16e}", c.re, c.im)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(basis: &'b FockBasis, input: R) -> Result<Self> {
        let mut coeffs = vec![C64::new(0.0, 0.0); basis.dim()];
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let bad = |what: &str| Error::invalid(format!("state line {}: {what}", lineno + 1));
            if fields.len() != basis.modes() + 2 {
                return Err(bad("wrong number of fields"));
            }
            let occ = fields[..basis.modes()]
                .iter()
                .map(|f| f.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad("bad occupation"))?;
            let re: f64 = fields[basis.modes()].parse().map_err(|_| bad("bad real part"))?;
            let im: f64 = fields[basis.modes() + 1].parse().map_err(|_| bad("bad imaginary part"))?;
            let i = basis
                .index_of_occupations(&occ)
                .ok_or_else(|| bad("occupation outside the truncated basis"))?;
            coeffs[i] = C64::new(re, im);
        }
        Self::new(basis, coeffs)
    }
}

/// `‖Ψ‖_{F_s} = (Σ (1 + E)^s |c|²)^{1/2}` with `E` the free-field energy.
pub fn fock_scale_norm(psi: &FockState<'_>, s: f64, grid: &ModeGrid) -> f64 {
    scale_norm_of_coeffs(psi.basis, psi.coeffs(), s, grid)
}

/// Slice form of [`fock_scale_norm`].
pub fn scale_norm_of_coeffs(basis: &FockBasis, coeffs: &[C64], s: f64, grid: &ModeGrid) -> f64 {
    assert_eq!(coeffs.len(), basis.dim(), "fock_scale_norm: length");
    basis
        .energies(grid)
        .iter()
        .zip(coeffs)
        .map(|(e, c)| omega_pow(1.0 + e, s) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}
