//! Measured quantities: momentum moments and distributions, the reduced
//! density matrix spectrum with its entropies, diffusion fits and the
//! coarse-grained classical entropy.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::classical::ClassicalEnsemble;
use crate::error::{Error, Result};
use crate::hilbert::{momentum_index, transpose, QuantumState, Representation};
use crate::numeric::{fit_line, pairwise_sum};
use crate::params::ModelParams;

/// Eigenvalues at or below this are treated as exact zeros in the
/// von Neumann entropy.
pub const DEFAULT_EIGEN_CUTOFF: f64 = 1e-14;

/// First two moments of the center-of-mass momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub mean_sq: f64,
}

impl Moments {
    pub fn variance(&self) -> f64 {
        (self.mean_sq - self.mean * self.mean).max(0.0)
    }

    /// `Δ² = 2(⟨P²⟩ - ⟨P⟩²)/(M K²)`; undefined for `K = 0`.
    pub fn normalized_variance(&self, params: &ModelParams) -> Option<f64> {
        normalized_variance(self.variance(), params)
    }
}

pub fn normalized_variance(variance: f64, params: &ModelParams) -> Option<f64> {
    let k = params.kick;
    (k != 0.0).then(|| 2.0 * variance / (params.total_mass * k * k))
}

/// Probability of each momentum row, summed over levels, in DFT bin order.
pub fn momentum_marginal(state: &QuantumState) -> Result<Vec<f64>> {
    state.require(Representation::MomLevel)?;
    Ok(state
        .coeffs
        .par_chunks(state.n_int())
        .map(|row| row.iter().map(|c| c.norm_sqr()).sum())
        .collect())
}

pub fn quantum_moments(state: &QuantumState) -> Result<Moments> {
    let marginal = momentum_marginal(state)?;
    let nc = state.n_com();
    let hbar = state.params.hbar;
    let first: Vec<f64> = marginal
        .iter()
        .enumerate()
        .map(|(k, p)| p * hbar * momentum_index(k, nc) as f64)
        .collect();
    let second: Vec<f64> = marginal
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let pl = hbar * momentum_index(k, nc) as f64;
            p * pl * pl
        })
        .collect();
    Ok(Moments {
        mean: pairwise_sum(&first),
        mean_sq: pairwise_sum(&second),
    })
}

pub fn classical_moments(ensemble: &ClassicalEnsemble) -> Result<Moments> {
    let n = ensemble.particles.len();
    if n == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let first: Vec<f64> = ensemble.particles.iter().map(|p| p.momentum).collect();
    let second: Vec<f64> = first.iter().map(|p| p * p).collect();
    Ok(Moments {
        mean: pairwise_sum(&first) / n as f64,
        mean_sq: pairwise_sum(&second) / n as f64,
    })
}

/// A momentum probability density on uniform bins.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumDistribution {
    /// Bin centers, ascending.
    pub momenta: Vec<f64>,
    pub density: Vec<f64>,
    pub bin_width: f64,
}

impl MomentumDistribution {
    /// Exact marginal on the `P_l = ħl` grid, with density `prob / ħ`.
    pub fn quantum(state: &QuantumState) -> Result<Self> {
        let marginal = momentum_marginal(state)?;
        let nc = state.n_com();
        let hbar = state.params.hbar;
        // Ascending l: bins N/2..N hold l = -N/2..-1.
        let order = (nc / 2..nc).chain(0..nc / 2);
        let (momenta, density) = order
            .map(|k| (hbar * momentum_index(k, nc) as f64, marginal[k] / hbar))
            .unzip();
        Ok(Self {
            momenta,
            density,
            bin_width: hbar,
        })
    }

    /// Normalized histogram with bins `[j b, (j+1) b)`.
    pub fn classical(ensemble: &ClassicalEnsemble, bin_width: f64) -> Result<Self> {
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(Error::BadBin("bin_width"));
        }
        let n = ensemble.particles.len();
        if n == 0 {
            return Err(Error::EmptyEnsemble);
        }
        let mut idx: Vec<i64> = ensemble
            .particles
            .iter()
            .map(|p| (p.momentum / bin_width).floor() as i64)
            .collect();
        idx.sort_unstable();
        let (lo, hi) = (idx[0], idx[n - 1]);
        let mut counts = vec![0usize; (hi - lo + 1) as usize];
        for i in idx {
            counts[(i - lo) as usize] += 1;
        }
        let norm = 1.0 / (n as f64 * bin_width);
        Ok(Self {
            momenta: (lo..=hi).map(|j| (j as f64 + 0.5) * bin_width).collect(),
            density: counts.iter().map(|&c| c as f64 * norm).collect(),
            bin_width,
        })
    }

    pub fn total(&self) -> f64 {
        pairwise_sum(&self.density) * self.bin_width
    }

    fn central_moment(&self, mean: f64, k: i32) -> f64 {
        let v: Vec<f64> = self
            .momenta
            .iter()
            .zip(&self.density)
            .map(|(p, f)| f * (p - mean).powi(k))
            .collect();
        pairwise_sum(&v) * self.bin_width
    }

    pub fn mean(&self) -> f64 {
        self.central_moment(0.0, 1)
    }

    pub fn variance(&self) -> f64 {
        self.central_moment(self.mean(), 2)
    }

    /// `μ₄/μ₂² - 3`: 0 for a Gaussian, 3 for a two-sided exponential.
    pub fn excess_kurtosis(&self) -> f64 {
        let m = self.mean();
        let m2 = self.central_moment(m, 2);
        let m4 = self.central_moment(m, 4);
        m4 / (m2 * m2) - 3.0
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "P,f")?;
        for (p, f) in self.momenta.iter().zip(&self.density) {
            writeln!(out, "{p:e},{f:e}")?;
        }
        Ok(())
    }
}

/// Small-side partial product of the coefficient matrix,
/// `G[n, n'] = Σ_l conj(c[l, n]) c[l, n']`.
///
/// Its nonzero spectrum is that of the center-of-mass reduced density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub matrix: DMatrix<Complex64>,
}

impl GramMatrix {
    pub fn from_state(state: &QuantumState) -> Result<Self> {
        state.require(Representation::MomLevel)?;
        let (nc, ni) = (state.n_com(), state.n_int());
        let mut cols = vec![Complex64::new(0.0, 0.0); nc * ni];
        transpose(&state.coeffs, &mut cols, nc, ni);
        let upper: Vec<Vec<Complex64>> = (0..ni)
            .into_par_iter()
            .map(|a| {
                let ca = &cols[a * nc..(a + 1) * nc];
                (a..ni)
                    .map(|b| {
                        let cb = &cols[b * nc..(b + 1) * nc];
                        ca.iter().zip(cb).map(|(x, y)| x.conj() * y).sum()
                    })
                    .collect()
            })
            .collect();
        let mut m = DMatrix::from_element(ni, ni, Complex64::new(0.0, 0.0));
        for (a, row) in upper.iter().enumerate() {
            for (off, &v) in row.iter().enumerate() {
                let b = a + off;
                m[(a, b)] = v;
                m[(b, a)] = v.conj();
            }
        }
        Ok(Self { matrix: m })
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|c| c.re).sum()
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// `Tr G²`, which equals the purity `Tr ρ_R²`.
    pub fn purity(&self) -> f64 {
        let v: Vec<f64> = self.matrix.iter().map(|c| c.norm_sqr()).collect();
        pairwise_sum(&v)
    }

    /// `s_l = 1 - Tr ρ_R²`, clamped to `[0, 1]`.
    pub fn linear_entropy(&self) -> f64 {
        (1.0 - self.purity()).clamp(0.0, 1.0)
    }

    /// `-Σ λ ln λ` over eigenvalues above `cutoff`.
    pub fn von_neumann_entropy(&self, cutoff: f64) -> f64 {
        entropy_of_spectrum(&self.eigenvalues(), cutoff)
    }
}

pub fn entropy_of_spectrum(eigenvalues: &[f64], cutoff: f64) -> f64 {
    let terms: Vec<f64> = eigenvalues
        .iter()
        .filter(|&&l| l > cutoff)
        .map(|&l| -l * l.ln())
        .collect();
    pairwise_sum(&terms).max(0.0)
}

/// Shannon entropy of occupation fractions on a fixed `(R, P)` cell grid:
/// `angle_bins` equal cells on `[0, 2π)` times momentum cells `[j b, (j+1) b)`.
pub fn classical_entropy(
    ensemble: &ClassicalEnsemble,
    angle_bins: usize,
    momentum_bin: f64,
) -> Result<f64> {
    if angle_bins == 0 {
        return Err(Error::BadBin("angle_bins"));
    }
    if !(momentum_bin > 0.0 && momentum_bin.is_finite()) {
        return Err(Error::BadBin("momentum_bin"));
    }
    let n = ensemble.particles.len();
    if n == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let scale = angle_bins as f64 / (2.0 * PI);
    let mut cells: Vec<(i64, usize)> = ensemble
        .particles
        .iter()
        .map(|p| {
            let a = ((p.angle * scale) as usize).min(angle_bins - 1);
            ((p.momentum / momentum_bin).floor() as i64, a)
        })
        .collect();
    cells.sort_unstable();
    let mut terms = Vec::new();
    let mut run = 1usize;
    for i in 1..=n {
        if i < n && cells[i] == cells[i - 1] {
            run += 1;
        } else {
            let q = run as f64 / n as f64;
            terms.push(-q * q.ln());
            run = 1;
        }
    }
    Ok(pairwise_sum(&terms))
}

/// One row of a time series; absent quantities are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Record {
    pub n: u64,
    pub p_mean: Option<f64>,
    pub p2_mean: Option<f64>,
    pub delta2: Option<f64>,
    pub linear_entropy: Option<f64>,
    pub von_neumann: Option<f64>,
    pub classical_entropy: Option<f64>,
}

impl Record {
    pub fn from_moments(n: u64, m: Moments, params: &ModelParams) -> Self {
        Self {
            n,
            p_mean: Some(m.mean),
            p2_mean: Some(m.mean_sq),
            delta2: m.normalized_variance(params),
            ..Default::default()
        }
    }
}

/// What to compute for a quantum record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumObservables {
    pub linear_entropy: bool,
    pub von_neumann: bool,
    pub cutoff: f64,
}

impl Default for QuantumObservables {
    fn default() -> Self {
        Self {
            linear_entropy: true,
            von_neumann: false,
            cutoff: DEFAULT_EIGEN_CUTOFF,
        }
    }
}

/// Record for a state already in the momentum x level representation.
pub fn quantum_record(n: u64, state: &QuantumState, what: QuantumObservables) -> Result<Record> {
    let mut rec = Record::from_moments(n, quantum_moments(state)?, &state.params);
    if what.linear_entropy || what.von_neumann {
        let g = GramMatrix::from_state(state)?;
        if what.linear_entropy {
            rec.linear_entropy = Some(g.linear_entropy());
        }
        if what.von_neumann {
            rec.von_neumann = Some(g.von_neumann_entropy(what.cutoff));
        }
    }
    Ok(rec)
}

pub const CSV_HEADER: &str = "n,P_mean,P2_mean,delta2,s_l,S_vn,S_cl";

/// Per-kick observables with strictly increasing `n`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub records: Vec<Record>,
}

impl TimeSeries {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record; panics if `n` does not increase.
    pub fn push(&mut self, rec: Record) {
        if let Some(last) = self.records.last() {
            assert!(rec.n > last.n, "time series must be strictly increasing");
        }
        self.records.push(rec);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, n: u64) -> Option<&Record> {
        self.records
            .binary_search_by_key(&n, |r| r.n)
            .ok()
            .map(|i| &self.records[i])
    }

    /// `(n, value)` pairs for rows where `field` is present.
    pub fn column(&self, field: impl Fn(&Record) -> Option<f64>) -> Vec<(u64, f64)> {
        self.records
            .iter()
            .filter_map(|r| field(r).map(|v| (r.n, v)))
            .collect()
    }

    pub fn extend(&mut self, other: TimeSeries) {
        for r in other.records {
            self.push(r);
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.records {
            let cell = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.n,
                cell(r.p_mean),
                cell(r.p2_mean),
                cell(r.delta2),
                cell(r.linear_entropy),
                cell(r.von_neumann),
                cell(r.classical_entropy)
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let bad = |line: usize, what: &str| {
            Error::Io(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("time series line {line}: {what}"),
            ))
        };
        let mut lines = input.lines();
        match lines.next().transpose()? {
            Some(h) if h.trim() == CSV_HEADER => {}
            _ => return Err(bad(1, "missing or unexpected header")),
        }
        let mut series = TimeSeries::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.trim().split(',').collect();
            if f.len() != 7 {
                return Err(bad(i + 2, "expected 7 columns"));
            }
            let opt = |s: &str| -> Result<Option<f64>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| bad(i + 2, "bad number"))
                }
            };
            let n: u64 = f[0].parse().map_err(|_| bad(i + 2, "bad kick index"))?;
            if series.records.last().is_some_and(|r| r.n >= n) {
                return Err(bad(i + 2, "kick index not increasing"));
            }
            series.records.push(Record {
                n,
                p_mean: opt(f[1])?,
                p2_mean: opt(f[2])?,
                delta2: opt(f[3])?,
                linear_entropy: opt(f[4])?,
                von_neumann: opt(f[5])?,
                classical_entropy: opt(f[6])?,
            });
        }
        Ok(series)
    }
}

/// Diffusion coefficient `D = ½ d⟨P²⟩/dn` from a least-squares line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionFit {
    pub coefficient: f64,
    pub slope: f64,
    pub intercept: f64,
    pub residual_se: f64,
    pub points: usize,
}

pub fn fit_diffusion(series: &TimeSeries, n_lo: u64, n_hi: u64) -> Result<DiffusionFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = series
        .records
        .iter()
        .filter(|r| r.n >= n_lo && r.n <= n_hi)
        .filter_map(|r| r.p2_mean.map(|v| (r.n as f64, v)))
        .unzip();
    let degenerate = || Error::DegenerateWindow {
        lo: n_lo,
        hi: n_hi,
        points: x.len(),
    };
    if n_hi <= n_lo {
        return Err(degenerate());
    }
    let (first, last) = match (series.records.first(), series.records.last()) {
        (Some(a), Some(b)) => (a.n, b.n),
        _ => return Err(degenerate()),
    };
    if n_lo < first || n_hi > last {
        return Err(Error::WindowOutside { lo: n_lo, hi: n_hi, first, last });
    }
    let f = fit_line(&x, &y).ok_or_else(degenerate)?;
    Ok(DiffusionFit {
        coefficient: 0.5 * f.slope,
        slope: f.slope,
        intercept: f.intercept,
        residual_se: f.residual_se,
        points: f.points,
    })
}

/// Least-squares slope of `y` against `ln n` over `[n_lo, n_hi]`.
pub fn log_slope(points: &[(u64, f64)], n_lo: u64, n_hi: u64) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|(n, _)| *n >= n_lo && *n <= n_hi && *n > 0)
        .map(|&(n, v)| ((n as f64).ln(), v))
        .unzip();
    fit_line(&x, &y).map(|f| f.slope)
}
