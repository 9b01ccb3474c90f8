//! Physical and numerical parameters of the coupled-rotor model.
//!
//! Two equal masses `m` on a ring, kicked by `k cos(r_i)`, are rewritten in
//! center-of-mass / relative coordinates: total mass `M = 2m`, reduced mass
//! `mu = m/2`, and center-of-mass kick strength `K = 2k`. The relative
//! coordinate lives in an infinite square well of half-width `w`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// All parameters of a run. Immutable once built by [`ModelParams::new`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Constituent mass `m`.
    pub mass: f64,
    /// Total mass `M = 2m`.
    pub total_mass: f64,
    /// Reduced mass `mu = m/2`.
    pub reduced_mass: f64,
    /// Per-particle kick strength `k`.
    pub particle_kick: f64,
    /// Center-of-mass kick strength `K = 2k`.
    pub kick: f64,
    /// Kick period `T`.
    pub period: f64,
    pub hbar: f64,
    /// Well half-width `w`; walls sit at `r = ±w`.
    pub width: f64,
    /// Number of center-of-mass basis states (`N_R`).
    pub n_com: usize,
    /// Number of internal box levels (`N_r`).
    pub n_int: usize,
    pub n_kicks: u64,
}

impl ModelParams {
    /// Builds the parameter set from the constituent quantities and validates it.
    ///
    /// `k = 0` is accepted (free evolution); every other physical quantity must be
    /// strictly positive, `w <= π`, and `N_R` must be even.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mass: f64,
        particle_kick: f64,
        period: f64,
        hbar: f64,
        width: f64,
        n_com: usize,
        n_int: usize,
        n_kicks: u64,
    ) -> Result<Self> {
        positive("m", mass)?;
        positive("T", period)?;
        positive("hbar", hbar)?;
        positive("w", width)?;
        if !(particle_kick.is_finite() && particle_kick >= 0.0) {
            return Err(invalid("k", format!("must be finite and >= 0, got {particle_kick}")));
        }
        if width > PI {
            return Err(invalid("w", format!("must not exceed pi, got {width}")));
        }
        if n_com == 0 || !n_com.is_multiple_of(2) {
            return Err(invalid("N_R", format!("must be positive and even, got {n_com}")));
        }
        if n_int == 0 {
            return Err(invalid("N_r", "must be positive".to_string()));
        }
        Ok(Self {
            mass,
            total_mass: 2.0 * mass,
            reduced_mass: 0.5 * mass,
            particle_kick,
            kick: 2.0 * particle_kick,
            period,
            hbar,
            width,
            n_com,
            n_int,
            n_kicks,
        })
    }

    /// Parameters from the center-of-mass quantities `M` and `K`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_com(
        total_mass: f64,
        kick: f64,
        period: f64,
        hbar: f64,
        width: f64,
        n_com: usize,
        n_int: usize,
        n_kicks: u64,
    ) -> Result<Self> {
        Self::new(0.5 * total_mass, 0.5 * kick, period, hbar, width, n_com, n_int, n_kicks)
    }

    /// Copy with a different well width, revalidated.
    pub fn with_width(&self, width: f64) -> Result<Self> {
        Self::new(
            self.mass,
            self.particle_kick,
            self.period,
            self.hbar,
            width,
            self.n_com,
            self.n_int,
            self.n_kicks,
        )
    }

    pub fn with_hbar(&self, hbar: f64) -> Result<Self> {
        Self::new(
            self.mass,
            self.particle_kick,
            self.period,
            hbar,
            self.width,
            self.n_com,
            self.n_int,
            self.n_kicks,
        )
    }

    pub fn with_kick(&self, kick: f64) -> Result<Self> {
        Self::new(
            self.mass,
            0.5 * kick,
            self.period,
            self.hbar,
            self.width,
            self.n_com,
            self.n_int,
            self.n_kicks,
        )
    }

    pub fn with_grid(&self, n_com: usize, n_int: usize) -> Result<Self> {
        Self::new(
            self.mass,
            self.particle_kick,
            self.period,
            self.hbar,
            self.width,
            n_com,
            n_int,
            self.n_kicks,
        )
    }

    pub fn with_kicks(&self, n_kicks: u64) -> Self {
        Self { n_kicks, ..*self }
    }

    /// The values written into checkpoints and metadata, in a fixed order.
    pub fn to_array(&self) -> [f64; 11] {
        [
            self.mass,
            self.total_mass,
            self.reduced_mass,
            self.particle_kick,
            self.kick,
            self.period,
            self.hbar,
            self.width,
            self.n_com as f64,
            self.n_int as f64,
            self.n_kicks as f64,
        ]
    }

    /// Inverse of [`ModelParams::to_array`]; derived fields are recomputed and
    /// must agree with the stored ones.
    pub fn from_array(v: &[f64; 11]) -> Result<Self> {
        let p = Self::new(v[0], v[3], v[5], v[6], v[7], v[8] as usize, v[9] as usize, v[10] as u64)?;
        if p.to_array() != *v {
            return Err(invalid("params", "derived quantities are inconsistent".to_string()));
        }
        Ok(p)
    }

    pub fn box_spectrum(&self) -> BoxSpectrum {
        BoxSpectrum::new(self)
    }
}

impl Default for ModelParams {
    /// Full-size defaults: `M = 1, mu = 0.25, K = 5, T = 1, hbar = 0.07, w = 0.5`
    /// on a 16384 x 256 grid.
    fn default() -> Self {
        Self::new(0.5, 2.5, 1.0, 0.07, 0.5, 16384, 256, 500).expect("defaults are valid")
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {v}")))
    }
}

fn invalid(name: &'static str, reason: String) -> Error {
    Error::InvalidParam { name, reason }
}

/// Spectrum of the relative motion: an infinite well on `[-w, w]` with
/// `E_n = n² π² ħ² / (8 μ w²)` and eigenfunctions
/// `φ_n(r) = sin(nπ(r + w)/(2w)) / √w`, `n = 1..=N_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSpectrum {
    pub width: f64,
    pub energies: Vec<f64>,
}

impl BoxSpectrum {
    pub fn new(params: &ModelParams) -> Self {
        let e1 = ground_energy(params.hbar, params.reduced_mass, params.width);
        let energies = (1..=params.n_int).map(|n| e1 * (n * n) as f64).collect();
        Self {
            width: params.width,
            energies,
        }
    }

    /// `E_n` for the 1-based level `n`.
    pub fn energy(&self, n: usize) -> f64 {
        self.energies[n - 1]
    }

    /// `φ_n(r)`, zero outside the well.
    pub fn eigenfunction(&self, n: usize, r: f64) -> f64 {
        let w = self.width;
        if r.abs() > w {
            return 0.0;
        }
        (n as f64 * PI * (r + w) / (2.0 * w)).sin() / w.sqrt()
    }
}

/// `E_1 = π² ħ² / (8 μ w²)`.
pub fn ground_energy(hbar: f64, reduced_mass: f64, width: f64) -> f64 {
    PI * PI * hbar * hbar / (8.0 * reduced_mass * width * width)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derives_com_quantities() {
        let p = ModelParams::new(0.5, 2.5, 1.0, 0.07, 0.5, 16, 8, 10).unwrap();
        assert_eq!(p.total_mass, 1.0);
        assert_eq!(p.reduced_mass, 0.25);
        assert_eq!(p.kick, 5.0);

        let p = ModelParams::new(1.0, 0.0, 1.0, 0.07, 0.5, 16, 8, 10).unwrap();
        assert_eq!((p.total_mass, p.reduced_mass, p.kick), (2.0, 0.5, 0.0));

        let p = ModelParams::new(2.0, 1.0, 1.0, 0.07, 0.5, 16, 8, 10).unwrap();
        assert_eq!((p.total_mass, p.reduced_mass, p.kick), (4.0, 1.0, 2.0));
        assert_eq!(p.total_mass * p.reduced_mass, p.mass * p.mass);
    }

    #[test]
    fn rederivation_is_idempotent() {
        let p = ModelParams::new(0.7, 1.3, 1.0, 0.1, 0.3, 32, 8, 5).unwrap();
        let q = ModelParams::from_com(p.total_mass, p.kick, 1.0, 0.1, 0.3, 32, 8, 5).unwrap();
        assert_eq!(p, q);
        assert_eq!(ModelParams::from_array(&p.to_array()).unwrap(), p);
    }

    #[test]
    fn rejects_bad_inputs() {
        let ok = |m, k, t, h, w, nr| ModelParams::new(m, k, t, h, w, nr, 8, 1).is_ok();
        assert!(!ok(0.0, 1.0, 1.0, 0.1, 0.5, 16));
        assert!(!ok(1.0, -1.0, 1.0, 0.1, 0.5, 16));
        assert!(!ok(1.0, 1.0, 0.0, 0.1, 0.5, 16));
        assert!(!ok(1.0, 1.0, 1.0, -0.1, 0.5, 16));
        assert!(!ok(1.0, 1.0, 1.0, 0.1, 0.0, 16));
        assert!(!ok(1.0, 1.0, 1.0, 0.1, 3.2, 16));
        assert!(!ok(1.0, 1.0, 1.0, 0.1, 0.5, 15));
        assert!(!ok(1.0, 1.0, 1.0, f64::NAN, 0.5, 16));
        assert!(ok(1.0, 1.0, 1.0, 0.1, PI, 16));
        assert!(ModelParams::new(1.0, 1.0, 1.0, 0.1, 0.5, 16, 0, 1).is_err());
    }

    #[test]
    fn box_levels() {
        let p = ModelParams::new(0.5, 2.5, 1.0, 0.07, 0.5, 16, 8, 1).unwrap();
        let s = p.box_spectrum();
        // pi^2 * 0.07^2 / (8 * 0.25 * 0.25)
        assert!((s.energy(1) - 0.096_722_123_130_675_73).abs() < 1e-15);
        for n in 1..=8 {
            assert!((s.energy(n) / s.energy(1) - (n * n) as f64).abs() < 1e-12);
        }
        let half = p.with_width(0.25).unwrap().box_spectrum();
        assert!((half.energy(1) / s.energy(1) - 4.0).abs() < 1e-12);

        for &r in &[-0.4, -0.1, 0.0, 0.2, 0.49] {
            let cos = (PI * r / (2.0 * 0.5)).cos() / 0.5f64.sqrt();
            assert!((s.eigenfunction(1, r) - cos).abs() < 1e-14);
        }
    }

    /// Lowest eigenvalue of a fine finite-difference well Hamiltonian.
    #[test]
    fn ground_energy_matches_finite_difference_well() {
        let (hbar, mu, w) = (0.07, 0.25, 0.5);
        let n = 4000;
        let h = 2.0 * w / (n + 1) as f64;
        let diag = hbar * hbar / (mu * h * h);
        let off = -hbar * hbar / (2.0 * mu * h * h);
        // Tridiagonal Toeplitz: lowest eigenvalue diag + 2 off cos(pi/(n+1)).
        // Cross-check it with inverse iteration on the actual matrix.
        let mut v = vec![1.0; n];
        let shift = 0.09;
        let mut lambda = 0.0;
        for _ in 0..20 {
            let x = solve_tridiagonal(diag - shift, off, &v);
            let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
            v = x.iter().map(|a| a / norm).collect();
            let mut hv = 0.0;
            for i in 0..n {
                let mut y = diag * v[i];
                if i > 0 {
                    y += off * v[i - 1];
                }
                if i + 1 < n {
                    y += off * v[i + 1];
                }
                hv += v[i] * y;
            }
            lambda = hv;
        }
        let exact = ground_energy(hbar, mu, w);
        assert!((lambda - exact).abs() / exact < 1e-6, "{lambda} vs {exact}");
    }

    fn solve_tridiagonal(d: f64, off: f64, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut c = vec![0.0; n];
        let mut x = vec![0.0; n];
        c[0] = off / d;
        x[0] = rhs[0] / d;
        for i in 1..n {
            let m = d - off * c[i - 1];
            c[i] = off / m;
            x[i] = (rhs[i] - off * x[i - 1]) / m;
        }
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        x
    }
}
