//! Product-space wavefunctions and the unitary maps between the
//! position x position grid and the momentum x box-level basis.
//!
//! The center-of-mass angle `R` is 2π-periodic and sampled at
//! `R_j = 2πj/N_R`; its conjugate basis is the plane waves `e^{ilR}/√(2π)`
//! with `P_l = ħl`. The relative coordinate is sampled on the interior points
//! `r_j = -w + 2wj/(N_r+1)`, `j = 1..=N_r`, and expanded in the well
//! eigenfunctions, which makes the r-axis map a type-I discrete sine transform.
//!
//! Coefficients are stored row-major with the center-of-mass index as the row:
//! `coeffs[i * N_r + j]`. In the momentum representation the row index is the
//! DFT bin, i.e. `l mod N_R`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Representation {
    /// Wavefunction samples `ψ(R_i, r_j)`.
    PosPos,
    /// Expansion coefficients `c[l, n]` in the orthonormal plane-wave x box-level basis.
    MomLevel,
}

impl Representation {
    pub fn tag(self) -> u8 {
        match self {
            Representation::PosPos => 0,
            Representation::MomLevel => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Representation::PosPos),
            1 => Some(Representation::MomLevel),
            _ => None,
        }
    }
}

/// Signed momentum index of DFT bin `k` on a grid of `n` points.
#[inline]
pub fn momentum_index(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// DFT bin holding the signed momentum index `l`.
#[inline]
pub fn momentum_bin(l: i64, n: usize) -> usize {
    l.rem_euclid(n as i64) as usize
}

/// Sample points and momentum values.
#[derive(Debug, Clone)]
pub struct Grids {
    /// `R_j = 2πj/N_R`.
    pub angles: Vec<f64>,
    /// `P_l = ħl` in DFT bin order.
    pub momenta: Vec<f64>,
    /// Interior well points `r_j`, walls excluded.
    pub separations: Vec<f64>,
    pub angle_step: f64,
    pub separation_step: f64,
}

impl Grids {
    pub fn new(params: &ModelParams) -> Self {
        let (nc, ni, w) = (params.n_com, params.n_int, params.width);
        let angle_step = 2.0 * PI / nc as f64;
        let separation_step = 2.0 * w / (ni + 1) as f64;
        Self {
            angles: (0..nc).map(|j| angle_step * j as f64).collect(),
            momenta: (0..nc)
                .map(|k| params.hbar * momentum_index(k, nc) as f64)
                .collect(),
            separations: (1..=ni).map(|j| -w + separation_step * j as f64).collect(),
            angle_step,
            separation_step,
        }
    }

    /// Quadrature weight `ΔR Δr` of one position cell.
    pub fn cell_weight(&self) -> f64 {
        self.angle_step * self.separation_step
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub coeffs: Vec<Complex64>,
    pub rep: Representation,
    pub params: ModelParams,
    /// Number of kicks applied so far.
    pub kick_count: u64,
}

impl QuantumState {
    pub fn zeros(params: &ModelParams, rep: Representation) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); params.n_com * params.n_int],
            rep,
            params: *params,
            kick_count: 0,
        }
    }

    /// Uniform in `R` times the well ground state, in the momentum x level basis:
    /// the single coefficient `c[l=0, n=1] = 1`.
    pub fn initial(params: &ModelParams) -> Self {
        let mut s = Self::zeros(params, Representation::MomLevel);
        s.coeffs[0] = Complex64::new(1.0, 0.0);
        s
    }

    /// Basis state `|l⟩ ⊗ |n⟩` with `n` 1-based.
    pub fn basis(params: &ModelParams, l: i64, n: usize) -> Self {
        let mut s = Self::zeros(params, Representation::MomLevel);
        let i = momentum_bin(l, params.n_com);
        s.coeffs[i * params.n_int + n - 1] = Complex64::new(1.0, 0.0);
        s
    }

    /// Random normalized state with Gaussian-distributed coefficients.
    pub fn random<R: Rng + ?Sized>(params: &ModelParams, rep: Representation, rng: &mut R) -> Self {
        let mut s = Self::zeros(params, rep);
        for c in s.coeffs.iter_mut() {
            *c = Complex64::new(gaussian(rng), gaussian(rng));
        }
        s.normalize();
        s
    }

    pub fn n_com(&self) -> usize {
        self.params.n_com
    }

    pub fn n_int(&self) -> usize {
        self.params.n_int
    }

    /// Coefficient at (row, column) in storage order.
    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.coeffs[row * self.params.n_int + col]
    }

    /// Quadrature weight applied to `|coeff|²` in norms.
    pub fn weight(&self) -> f64 {
        match self.rep {
            Representation::MomLevel => 1.0,
            Representation::PosPos => {
                let p = &self.params;
                (2.0 * PI / p.n_com as f64) * (2.0 * p.width / (p.n_int + 1) as f64)
            }
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        let rows: Vec<f64> = self
            .coeffs
            .chunks(self.params.n_int)
            .map(|row| row.iter().map(|c| c.norm_sqr()).sum())
            .collect();
        rows.iter().sum::<f64>() * self.weight()
    }

    pub fn normalize(&mut self) {
        let s = 1.0 / self.norm_sqr().sqrt();
        self.coeffs.iter_mut().for_each(|c| *c *= s);
    }

    pub fn require(&self, rep: Representation) -> Result<()> {
        if self.rep == rep {
            Ok(())
        } else {
            Err(Error::WrongRepresentation {
                expected: rep,
                found: self.rep,
            })
        }
    }

    /// Largest coefficient difference after bringing both states to the same
    /// storage (same representation required).
    pub fn max_abs_diff(&self, other: &QuantumState) -> f64 {
        assert_eq!(self.rep, other.rep);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller; one of the pair is discarded.
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Orthonormal type-I discrete sine transform of length `n`, computed through a
/// complex FFT of the odd extension (length `2(n+1)`).
///
/// `S[k, j] = √(2/(n+1)) sin(π j k / (n+1))` is real, symmetric and its own inverse.
#[derive(Clone)]
pub struct Dst1 {
    len: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Dst1 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dst1").field("len", &self.len).finish()
    }
}

impl Dst1 {
    pub fn new(len: usize, planner: &mut FftPlanner<f64>) -> Self {
        Self {
            len,
            fft: planner.plan_fft_forward(2 * (len + 1)),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Work buffer size needed by [`Dst1::process_unscaled`].
    pub fn buffer_len(&self) -> usize {
        2 * (self.len + 1) + self.fft.get_inplace_scratch_len()
    }

    /// `x_k ← Σ_j x_j sin(π j k/(n+1))`, unnormalized.
    pub fn process_unscaled(&self, x: &mut [Complex64], work: &mut [Complex64]) {
        let n = self.len;
        let m = 2 * (n + 1);
        let (ext, scratch) = work.split_at_mut(m);
        let zero = Complex64::new(0.0, 0.0);
        ext[0] = zero;
        ext[n + 1] = zero;
        for j in 1..=n {
            ext[j] = x[j - 1];
            ext[m - j] = -x[j - 1];
        }
        self.fft.process_with_scratch(ext, scratch);
        // Y_k = -2i Σ x_j sin(πjk/(n+1))  =>  Σ = (i/2) Y_k
        for k in 1..=n {
            let y = ext[k];
            x[k - 1] = Complex64::new(-0.5 * y.im, 0.5 * y.re);
        }
    }

    /// Orthonormal transform of one vector.
    pub fn process(&self, x: &mut [Complex64]) {
        let mut work = vec![Complex64::new(0.0, 0.0); self.buffer_len()];
        self.process_unscaled(x, &mut work);
        let s = (2.0 / (self.len + 1) as f64).sqrt();
        x.iter_mut().for_each(|v| *v *= s);
    }
}

/// Planned transforms between [`Representation::PosPos`] and
/// [`Representation::MomLevel`] for one grid size. Cheap to clone.
#[derive(Clone)]
pub struct SpectralBasis {
    n_com: usize,
    n_int: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    dst: Dst1,
    /// Maps raw sums to the orthonormal coefficients, including `√(ΔR Δr)`.
    forward_scale: f64,
    inverse_scale: f64,
}

impl std::fmt::Debug for SpectralBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralBasis")
            .field("n_com", &self.n_com)
            .field("n_int", &self.n_int)
            .finish()
    }
}

impl SpectralBasis {
    pub fn new(params: &ModelParams) -> Self {
        let (nc, ni) = (params.n_com, params.n_int);
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(nc);
        let inverse = planner.plan_fft_inverse(nc);
        let dst = Dst1::new(ni, &mut planner);
        let grids_weight = (2.0 * PI / nc as f64) * (2.0 * params.width / (ni + 1) as f64);
        let forward_scale =
            grids_weight.sqrt() / (nc as f64).sqrt() * (2.0 / (ni + 1) as f64).sqrt();
        let inverse_scale = 1.0 / (forward_scale * nc as f64 * (ni + 1) as f64 / 2.0);
        Self {
            n_com: nc,
            n_int: ni,
            forward,
            inverse,
            dst,
            forward_scale,
            inverse_scale,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n_com, self.n_int)
    }

    fn check_grid(&self, state: &QuantumState) -> Result<()> {
        if state.n_com() != self.n_com || state.n_int() != self.n_int {
            return Err(Error::GridMismatch {
                expected_com: self.n_com,
                expected_int: self.n_int,
                found_com: state.n_com(),
                found_int: state.n_int(),
            });
        }
        Ok(())
    }

    /// Position grid -> momentum x level coefficients.
    pub fn to_mom_level(&self, state: &mut QuantumState) -> Result<()> {
        self.check_grid(state)?;
        state.require(Representation::PosPos)?;
        self.sine_rows(&mut state.coeffs);
        self.fft_columns(&mut state.coeffs, &self.forward);
        let s = self.forward_scale;
        state.coeffs.par_iter_mut().for_each(|c| *c *= s);
        state.rep = Representation::MomLevel;
        Ok(())
    }

    /// Exact inverse of [`SpectralBasis::to_mom_level`].
    pub fn to_pos_pos(&self, state: &mut QuantumState) -> Result<()> {
        self.check_grid(state)?;
        state.require(Representation::MomLevel)?;
        self.fft_columns(&mut state.coeffs, &self.inverse);
        self.sine_rows(&mut state.coeffs);
        let s = self.inverse_scale;
        state.coeffs.par_iter_mut().for_each(|c| *c *= s);
        state.rep = Representation::PosPos;
        Ok(())
    }

    /// Converts to `rep` if the state is not already there.
    pub fn ensure(&self, state: &mut QuantumState, rep: Representation) -> Result<()> {
        match (state.rep, rep) {
            (a, b) if a == b => Ok(()),
            (_, Representation::MomLevel) => self.to_mom_level(state),
            (_, Representation::PosPos) => self.to_pos_pos(state),
        }
    }

    fn sine_rows(&self, data: &mut [Complex64]) {
        let dst = &self.dst;
        data.par_chunks_mut(self.n_int).for_each_init(
            || vec![Complex64::new(0.0, 0.0); dst.buffer_len()],
            |work, row| dst.process_unscaled(row, work),
        );
    }

    fn fft_columns(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let (nc, ni) = (self.n_com, self.n_int);
        let mut t = vec![Complex64::new(0.0, 0.0); data.len()];
        transpose(data, &mut t, nc, ni);
        t.par_chunks_mut(nc).for_each_init(
            || vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()],
            |scratch, col| fft.process_with_scratch(col, scratch),
        );
        transpose(&t, data, ni, nc);
    }
}

/// Out-of-place transpose of a `rows x cols` row-major matrix.
pub fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const B: usize = 32;
    debug_assert_eq!(src.len(), rows * cols);
    debug_assert_eq!(dst.len(), rows * cols);
    // Parallel over output row blocks (input column blocks).
    dst.par_chunks_mut(B * rows).enumerate().for_each(|(cb, out)| {
        let c0 = cb * B;
        let c1 = (c0 + B).min(cols);
        for r0 in (0..rows).step_by(B) {
            let r1 = (r0 + B).min(rows);
            for c in c0..c1 {
                let o = &mut out[(c - c0) * rows..];
                for r in r0..r1 {
                    o[r] = src[r * cols + c];
                }
            }
        }
    });
}
