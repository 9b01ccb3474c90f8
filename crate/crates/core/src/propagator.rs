//! Split-operator Floquet map for the coupled rotors, and the ordinary
//! kicked rotor as the zero-width baseline.
//!
//! One period is the exact free evolution, diagonal in the momentum x level
//! basis, followed by the kick, diagonal on the position grid. Observables are
//! taken just after the kick.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::hilbert::{momentum_index, Grids, QuantumState, Representation, SpectralBasis};
use crate::numeric::pairwise_sum;
use crate::observables::{Moments, Record, TimeSeries};
use crate::params::ModelParams;

/// Phase of the kick operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KickConvention {
    /// `exp(-i (K/ħ) cos R cos(r/2))`, consistent with the free map.
    #[default]
    ScaledByHbar,
    /// `exp(-i K cos R cos(r/2))`, with no `1/ħ`.
    Literal,
}

impl KickConvention {
    fn strength(self, params: &ModelParams) -> f64 {
        match self {
            KickConvention::ScaledByHbar => params.kick / params.hbar,
            KickConvention::Literal => params.kick,
        }
    }
}

/// Unit-modulus factors of the free propagator, in storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct FreePhases {
    /// `exp(-i ħ l² T / (2M))` per DFT bin.
    pub com: Vec<Complex64>,
    /// `exp(-i E_n T / ħ)` per level.
    pub int: Vec<Complex64>,
}

impl FreePhases {
    pub fn new(params: &ModelParams) -> Self {
        Self {
            com: com_phases(params),
            int: params
                .box_spectrum()
                .energies
                .iter()
                .map(|e| Complex64::from_polar(1.0, -e * params.period / params.hbar))
                .collect(),
        }
    }
}

fn com_phases(params: &ModelParams) -> Vec<Complex64> {
    let nc = params.n_com;
    let c = params.hbar * params.period / (2.0 * params.total_mass);
    (0..nc)
        .map(|k| {
            let l = momentum_index(k, nc) as f64;
            Complex64::from_polar(1.0, -c * l * l)
        })
        .collect()
}

/// `exp(-i κ cos R_i cos(r_j/2))` on the position grid, row-major like the state.
#[derive(Debug, Clone, PartialEq)]
pub struct KickPhases {
    pub table: Vec<Complex64>,
}

impl KickPhases {
    pub fn new(params: &ModelParams, convention: KickConvention) -> Self {
        let g = Grids::new(params);
        let kappa = convention.strength(params);
        let half: Vec<f64> = g.separations.iter().map(|r| (0.5 * r).cos()).collect();
        let table = g
            .angles
            .par_iter()
            .flat_map_iter(|a| {
                let c = kappa * a.cos();
                half.iter().map(move |h| Complex64::from_polar(1.0, -c * h))
            })
            .collect();
        Self { table }
    }
}

/// Aborts a run when probability reaches the band next to the Nyquist
/// momentum, where the periodic grid would silently wrap it around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AliasGuard {
    /// The band starts at `|l| >= edge_fraction * N_R`.
    pub edge_fraction: f64,
    /// Largest probability tolerated inside the band.
    pub tolerance: f64,
}

impl Default for AliasGuard {
    fn default() -> Self {
        Self {
            edge_fraction: 7.0 / 16.0,
            tolerance: 1e-3,
        }
    }
}

impl AliasGuard {
    pub fn limit(&self, n: usize) -> usize {
        (self.edge_fraction * n as f64).ceil() as usize
    }

    /// Probability carried by bins with `|l| >= limit`.
    pub fn tail_mass(marginal: &[f64], limit: usize) -> f64 {
        let n = marginal.len();
        let tail: Vec<f64> = marginal
            .iter()
            .enumerate()
            .filter(|(k, _)| momentum_index(*k, n).unsigned_abs() as usize >= limit)
            .map(|(_, p)| *p)
            .collect();
        pairwise_sum(&tail)
    }

    pub fn check(&self, marginal: &[f64], kick: u64) -> Result<()> {
        let limit = self.limit(marginal.len());
        let tail_mass = Self::tail_mass(marginal, limit);
        if tail_mass > self.tolerance {
            return Err(Error::Aliasing {
                kick,
                limit,
                tail_mass,
                tolerance: self.tolerance,
            });
        }
        Ok(())
    }
}

/// Run control for [`Propagator::evolve`].
#[derive(Debug, Clone, Default)]
pub struct EvolveOptions {
    /// Record after every kick whose index is a multiple of this; 0 records nothing.
    pub record_every: u64,
    pub guard: Option<AliasGuard>,
    /// When raised, evolution stops after the current kick with
    /// [`Error::Interrupted`]; the state is left at that kick.
    pub interrupt: Option<Arc<AtomicBool>>,
}

impl EvolveOptions {
    pub fn every(record_every: u64) -> Self {
        Self {
            record_every,
            ..Default::default()
        }
    }

    pub fn with_guard(mut self, guard: AliasGuard) -> Self {
        self.guard = Some(guard);
        self
    }

    /// True once the interrupt flag has been raised.
    pub fn interrupted(&self) -> bool {
        self.interrupt
            .as_ref()
            .is_some_and(|f| f.load(Ordering::Relaxed))
    }

    /// Whether kick number `kick` is on the recording schedule.
    pub fn records(&self, kick: u64) -> bool {
        self.record_every > 0 && kick.is_multiple_of(self.record_every)
    }
}

/// Planned transforms and phase tables for one parameter set.
#[derive(Debug, Clone)]
pub struct Propagator {
    params: ModelParams,
    basis: SpectralBasis,
    free: FreePhases,
    kick: KickPhases,
}

impl Propagator {
    pub fn new(params: &ModelParams) -> Self {
        Self::with_convention(params, KickConvention::default())
    }

    pub fn with_convention(params: &ModelParams, convention: KickConvention) -> Self {
        Self {
            params: *params,
            basis: SpectralBasis::new(params),
            free: FreePhases::new(params),
            kick: KickPhases::new(params, convention),
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn free_phases(&self) -> &FreePhases {
        &self.free
    }

    pub fn kick_phases(&self) -> &KickPhases {
        &self.kick
    }

    /// Free evolution over one period; leaves the state in the momentum x level basis.
    pub fn free_step(&self, state: &mut QuantumState) -> Result<()> {
        self.basis.ensure(state, Representation::MomLevel)?;
        let int = &self.free.int;
        state
            .coeffs
            .par_chunks_mut(self.params.n_int)
            .zip(self.free.com.par_iter())
            .for_each(|(row, &pc)| {
                for (c, &pn) in row.iter_mut().zip(int) {
                    *c *= pc * pn;
                }
            });
        Ok(())
    }

    /// The kick; leaves the state on the position grid and advances `kick_count`.
    pub fn kick_step(&self, state: &mut QuantumState) -> Result<()> {
        self.basis.ensure(state, Representation::PosPos)?;
        state
            .coeffs
            .par_iter_mut()
            .zip(self.kick.table.par_iter())
            .for_each(|(c, &k)| *c *= k);
        state.kick_count += 1;
        Ok(())
    }

    /// One full period: free evolution, then the kick.
    pub fn floquet_step(&self, state: &mut QuantumState) -> Result<()> {
        self.free_step(state)?;
        self.kick_step(state)
    }

    /// Applies `n` Floquet steps, calling `observer` on scheduled kicks.
    pub fn evolve<F>(
        &self,
        state: &mut QuantumState,
        n: u64,
        opts: &EvolveOptions,
        observer: F,
    ) -> Result<TimeSeries>
    where
        F: FnMut(&mut QuantumState) -> Result<Record>,
    {
        let mut series = TimeSeries::new();
        self.evolve_into(state, n, opts, &mut series, observer)?;
        Ok(series)
    }

    /// Like [`Propagator::evolve`] but appends to `series`, which keeps the
    /// rows recorded before an error or interrupt.
    pub fn evolve_into<F>(
        &self,
        state: &mut QuantumState,
        n: u64,
        opts: &EvolveOptions,
        series: &mut TimeSeries,
        mut observer: F,
    ) -> Result<()>
    where
        F: FnMut(&mut QuantumState) -> Result<Record>,
    {
        for _ in 0..n {
            self.floquet_step(state)?;
            let kick = state.kick_count;
            if let Some(guard) = opts.guard {
                // The next free step needs this representation anyway.
                self.basis.to_mom_level(state)?;
                let marginal = crate::observables::momentum_marginal(state)?;
                guard.check(&marginal, kick)?;
            }
            if opts.records(kick) {
                series.push(observer(state)?);
            }
            if opts.interrupted() {
                return Err(Error::Interrupted { kick });
            }
        }
        Ok(())
    }
}

/// The standard quantum kicked rotor `H = P²/2M + K cos R Σ δ(t - iT)` on the
/// same momentum grid.
#[derive(Clone)]
pub struct SingleRotor {
    params: ModelParams,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    free: Vec<Complex64>,
    kick: Vec<Complex64>,
}

impl std::fmt::Debug for SingleRotor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SingleRotor")
            .field("params", &self.params)
            .finish()
    }
}

impl SingleRotor {
    pub fn new(params: &ModelParams) -> Self {
        Self::with_convention(params, KickConvention::default())
    }

    pub fn with_convention(params: &ModelParams, convention: KickConvention) -> Self {
        let mut planner = FftPlanner::new();
        let g = Grids::new(params);
        let kappa = convention.strength(params);
        Self {
            params: *params,
            forward: planner.plan_fft_forward(params.n_com),
            inverse: planner.plan_fft_inverse(params.n_com),
            free: com_phases(params),
            kick: g
                .angles
                .iter()
                .map(|a| Complex64::from_polar(1.0, -kappa * a.cos()))
                .collect(),
        }
    }

    /// `|l = 0⟩` in DFT bin order.
    pub fn initial(&self) -> Vec<Complex64> {
        let mut a = vec![Complex64::new(0.0, 0.0); self.params.n_com];
        a[0] = Complex64::new(1.0, 0.0);
        a
    }

    /// One period on momentum amplitudes (DFT bin order, unit norm).
    pub fn step(&self, amps: &mut [Complex64]) {
        let n = amps.len();
        assert_eq!(n, self.params.n_com);
        for (a, p) in amps.iter_mut().zip(&self.free) {
            *a *= p;
        }
        // Momentum -> position is the inverse DFT with the e^{+ilR} kernel.
        self.inverse.process(amps);
        for (a, k) in amps.iter_mut().zip(&self.kick) {
            *a *= k;
        }
        self.forward.process(amps);
        let s = 1.0 / n as f64;
        amps.iter_mut().for_each(|a| *a *= s);
    }

    pub fn moments(&self, amps: &[Complex64]) -> Moments {
        let n = amps.len();
        let h = self.params.hbar;
        let p: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
        let first: Vec<f64> = p
            .iter()
            .enumerate()
            .map(|(k, w)| w * h * momentum_index(k, n) as f64)
            .collect();
        let second: Vec<f64> = p
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let pl = h * momentum_index(k, n) as f64;
                w * pl * pl
            })
            .collect();
        Moments {
            mean: pairwise_sum(&first),
            mean_sq: pairwise_sum(&second),
        }
    }

    /// Runs `n` periods starting from kick `start`, recording moments on schedule.
    pub fn evolve(
        &self,
        amps: &mut [Complex64],
        start: u64,
        n: u64,
        opts: &EvolveOptions,
    ) -> Result<TimeSeries> {
        let mut series = TimeSeries::new();
        self.evolve_into(amps, start, n, opts, &mut series)?;
        Ok(series)
    }

    /// Like [`SingleRotor::evolve`] but appends to `series`.
    pub fn evolve_into(
        &self,
        amps: &mut [Complex64],
        start: u64,
        n: u64,
        opts: &EvolveOptions,
        series: &mut TimeSeries,
    ) -> Result<()> {
        for kick in start + 1..=start + n {
            self.step(amps);
            if let Some(guard) = opts.guard {
                let marginal: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
                guard.check(&marginal, kick)?;
            }
            if opts.records(kick) {
                series.push(Record::from_moments(kick, self.moments(amps), &self.params));
            }
            if opts.interrupted() {
                return Err(Error::Interrupted { kick });
            }
        }
        Ok(())
    }
}
