//! Classical counterpart: a four-dimensional symplectic map for the
//! center-of-mass angle and momentum and the relative coordinate bouncing
//! between hard walls, plus the standard map as the zero-width reference.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::observables::{Record, TimeSeries};
use crate::params::ModelParams;

/// Name of the generator used for ensemble sampling, recorded in run metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9, seed_from_u64)";

/// One phase-space point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    /// Center-of-mass angle `R` in `[0, 2π)`.
    pub angle: f64,
    /// Center-of-mass momentum `P`.
    pub momentum: f64,
    /// Relative coordinate `r` in `[-w, w]`.
    pub separation: f64,
    /// Relative momentum `p`.
    pub rel_momentum: f64,
}

/// Which map an ensemble follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dynamics {
    Coupled,
    /// The standard map; relative variables are ignored.
    SingleRotor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalEnsemble {
    pub particles: Vec<Particle>,
    pub seed: u64,
    pub params: ModelParams,
    pub dynamics: Dynamics,
    pub kick_count: u64,
}

/// Free motion over one period. The relative coordinate reflects specularly at
/// `±w`, flipping `p` at each bounce, so `p²/2μ` is unchanged.
pub fn free_flight(particle: Particle, params: &ModelParams) -> Particle {
    let t = params.period;
    let angle = wrap_angle(particle.angle + particle.momentum * t / params.total_mass);
    let w = params.width;
    let len = 2.0 * w;
    let moved = particle.separation + particle.rel_momentum * t / params.reduced_mass;
    if moved.abs() <= w {
        return Particle {
            angle,
            separation: moved,
            ..particle
        };
    }
    let x = moved + w;
    // Triangle-wave fold of the unfolded coordinate onto [0, 2w].
    let bounces = (x / len).floor();
    let odd = bounces.rem_euclid(2.0) == 1.0;
    let (folded, p) = if odd {
        ((bounces + 1.0) * len - x, -particle.rel_momentum)
    } else {
        (x - bounces * len, particle.rel_momentum)
    };
    Particle {
        angle,
        momentum: particle.momentum,
        separation: (folded - w).clamp(-w, w),
        rel_momentum: p,
    }
}

/// Impulses from the kick potential `K cos R cos(r/2)`:
/// `ΔP = K sin R cos(r/2)`, `Δp = (K/2) cos R sin(r/2)`.
pub fn kick(particle: Particle, params: &ModelParams) -> Particle {
    let k = params.kick;
    let (sr, cr) = particle.angle.sin_cos();
    let (sh, ch) = (0.5 * particle.separation).sin_cos();
    Particle {
        momentum: particle.momentum + k * sr * ch,
        rel_momentum: particle.rel_momentum + 0.5 * k * cr * sh,
        ..particle
    }
}

/// One period of the coupled map: free flight, then the kick.
pub fn step(particle: Particle, params: &ModelParams) -> Particle {
    kick(free_flight(particle, params), params)
}

/// `R ← (R + PT/M) mod 2π`, `P ← P + K sin R`.
pub fn standard_map_step(angle: f64, momentum: f64, params: &ModelParams) -> (f64, f64) {
    let a = wrap_angle(angle + momentum * params.period / params.total_mass);
    (a, momentum + params.kick * a.sin())
}

/// Maps into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can round up to TAU for tiny negative inputs.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Inverse CDF of the density `cos²(πx/2)` on `[-1, 1]`, tabulated and then
/// polished with Newton steps on the closed-form CDF.
struct GroundStateSampler {
    table: Vec<f64>,
}

impl GroundStateSampler {
    const POINTS: usize = 2049;

    fn new() -> Self {
        let table = (0..Self::POINTS)
            .map(|i| Self::cdf(-1.0 + 2.0 * i as f64 / (Self::POINTS - 1) as f64))
            .collect();
        Self { table }
    }

    fn cdf(x: f64) -> f64 {
        0.5 * (x + 1.0) + (PI * x).sin() / (2.0 * PI)
    }

    fn density(x: f64) -> f64 {
        let c = (0.5 * PI * x).cos();
        c * c
    }

    /// Point `x ∈ [-1, 1]` with `F(x) = u`: table bracket, then Newton steps
    /// that fall back to bisection when they leave the bracket.
    fn invert(&self, u: f64) -> f64 {
        let h = 2.0 / (Self::POINTS - 1) as f64;
        let i = self.table.partition_point(|&f| f <= u).clamp(1, Self::POINTS - 1);
        let (f0, f1) = (self.table[i - 1], self.table[i]);
        let (mut lo, mut hi) = (-1.0 + h * (i - 1) as f64, -1.0 + h * i as f64);
        let mut x = if f1 > f0 { lo + h * (u - f0) / (f1 - f0) } else { lo };
        for _ in 0..100 {
            let r = Self::cdf(x) - u;
            if r == 0.0 {
                break;
            }
            if r < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if hi - lo <= 4.0 * f64::EPSILON {
                break;
            }
            let newton = x - r / Self::density(x);
            x = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        x
    }
}

impl ClassicalEnsemble {
    /// `R` uniform on `[0, 2π)`, `P = 0`, `r` distributed as `cos²(πr/2w)/w`,
    /// `p = ±πħ/(2w)` with equal probability. Deterministic in `seed`.
    pub fn sample(params: &ModelParams, count: usize, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::EmptyEnsemble);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sampler = GroundStateSampler::new();
        let w = params.width;
        let p0 = PI * params.hbar / (2.0 * w);
        let particles = (0..count)
            .map(|_| {
                let angle = wrap_angle(TAU * rng.random::<f64>());
                let separation = w * sampler.invert(rng.random::<f64>());
                let rel_momentum = if rng.random_bool(0.5) { p0 } else { -p0 };
                Particle {
                    angle,
                    momentum: 0.0,
                    separation,
                    rel_momentum,
                }
            })
            .collect();
        Ok(Self {
            particles,
            seed,
            params: *params,
            dynamics: Dynamics::Coupled,
            kick_count: 0,
        })
    }

    /// Standard-map ensemble: `R` uniform, `P = 0`, relative variables at rest.
    pub fn single_rotor(params: &ModelParams, count: usize, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::EmptyEnsemble);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let particles = (0..count)
            .map(|_| Particle {
                angle: wrap_angle(TAU * rng.random::<f64>()),
                momentum: 0.0,
                separation: 0.0,
                rel_momentum: 0.0,
            })
            .collect();
        Ok(Self {
            particles,
            seed,
            params: *params,
            dynamics: Dynamics::SingleRotor,
            kick_count: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// One period for every particle.
    pub fn step(&mut self) {
        let params = self.params;
        match self.dynamics {
            Dynamics::Coupled => self
                .particles
                .par_iter_mut()
                .for_each(|p| *p = step(*p, &params)),
            Dynamics::SingleRotor => self.particles.par_iter_mut().for_each(|p| {
                let (a, m) = standard_map_step(p.angle, p.momentum, &params);
                p.angle = a;
                p.momentum = m;
            }),
        }
        self.kick_count += 1;
    }

    /// `n` periods, recording with `observer` after every `record_every`-th kick.
    pub fn evolve<F>(&mut self, n: u64, record_every: u64, mut observer: F) -> Result<TimeSeries>
    where
        F: FnMut(&ClassicalEnsemble) -> Result<Record>,
    {
        let mut series = TimeSeries::new();
        for _ in 0..n {
            self.step();
            if record_every > 0 && self.kick_count.is_multiple_of(record_every) {
                series.push(observer(self)?);
            }
        }
        Ok(series)
    }

    /// Snapshot as CSV `R,P,r,p`, full precision.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "R,P,r,p")?;
        for p in &self.particles {
            writeln!(
                out,
                "{:e},{:e},{:e},{:e}",
                p.angle, p.momentum, p.separation, p.rel_momentum
            )?;
        }
        Ok(())
    }

    /// Reads particles written by [`ClassicalEnsemble::write_csv`].
    pub fn read_particles<R: std::io::BufRead>(input: R) -> Result<Vec<Particle>> {
        let bad = |what: String| {
            Error::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, what))
        };
        let mut lines = input.lines();
        match lines.next().transpose()? {
            Some(h) if h.trim() == "R,P,r,p" => {}
            _ => return Err(bad("ensemble snapshot: missing header".into())),
        }
        let mut out = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let v: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(format!("ensemble snapshot line {}: {e}", i + 2)))?;
            if v.len() != 4 {
                return Err(bad(format!("ensemble snapshot line {}: expected 4 values", i + 2)));
            }
            out.push(Particle {
                angle: v[0],
                momentum: v[1],
                separation: v[2],
                rel_momentum: v[3],
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(w: f64) -> ModelParams {
        ModelParams::new(0.5, 2.5, 1.0, 0.07, w, 16, 8, 1).unwrap()
    }

    #[test]
    fn resting_relative_motion_stays_put() {
        let p = params(0.5);
        let q = free_flight(
            Particle {
                angle: 1.0,
                momentum: 0.3,
                separation: 0.2,
                rel_momentum: 0.0,
            },
            &p,
        );
        assert_eq!(q.separation, 0.2);
        assert!((q.angle - 1.3).abs() < 1e-15);
    }

    #[test]
    fn full_bounce_period_returns() {
        let w = 0.5;
        let mu = 0.25;
        let pr = 0.7;
        // T = 4 w mu / p
        let p = ModelParams::new(0.5, 2.5, 4.0 * w * mu / pr, 0.07, w, 16, 8, 1).unwrap();
        let q = free_flight(
            Particle {
                angle: 0.0,
                momentum: 0.0,
                separation: 0.0,
                rel_momentum: pr,
            },
            &p,
        );
        assert!(q.separation.abs() < 1e-12);
        assert_eq!(q.rel_momentum, pr);
    }

    #[test]
    fn single_bounce_flips_momentum() {
        let p = params(0.5);
        let q = free_flight(
            Particle {
                angle: 0.0,
                momentum: 0.0,
                separation: 0.4,
                rel_momentum: 0.05,
            },
            &p,
        );
        // x = 0.9 + 0.2 = 1.1 -> reflected to 0.9, r = 0.4
        assert!((q.separation - 0.4).abs() < 1e-14);
        assert_eq!(q.rel_momentum, -0.05);
    }

    #[test]
    fn kick_limits() {
        let p = params(0.5);
        let zero = p.with_kick(0.0).unwrap();
        let a = Particle {
            angle: 0.7,
            momentum: 1.0,
            separation: 0.3,
            rel_momentum: -0.2,
        };
        assert_eq!(kick(a, &zero), a);
        let b = kick(Particle { separation: 0.0, ..a }, &p);
        assert_eq!(b.rel_momentum, -0.2);
        assert!((b.momentum - (1.0 + 5.0 * 0.7f64.sin())).abs() < 1e-15);
    }

    #[test]
    fn standard_map_examples() {
        let p = ModelParams::from_com(1.0, 5.0, 1.0, 0.07, 0.5, 16, 8, 1).unwrap();
        let (a, m) = standard_map_step(PI / 2.0, 0.0, &p);
        assert!((a - PI / 2.0).abs() < 1e-15);
        assert!((m - 5.0).abs() < 1e-15);
        let z = p.with_kick(0.0).unwrap();
        assert_eq!(standard_map_step(1.0, 2.5, &z).1, 2.5);
    }

    #[test]
    fn sampler_inverts_cdf() {
        let s = GroundStateSampler::new();
        for i in 0..=100 {
            let u = i as f64 / 100.0;
            let x = s.invert(u);
            assert!((-1.0..=1.0).contains(&x), "x={x}");
            assert!((GroundStateSampler::cdf(x) - u).abs() < 1e-12, "u={u} x={x} F={}", GroundStateSampler::cdf(x));
        }
    }

    #[test]
    fn sampled_ensemble_moments() {
        let w = 0.6;
        let p = params(w);
        let n = 200_000;
        let e = ClassicalEnsemble::sample(&p, n, 42).unwrap();
        let p0 = PI * p.hbar / (2.0 * w);
        assert!(e.particles.iter().all(|q| q.momentum == 0.0));
        assert!(e.particles.iter().all(|q| q.rel_momentum.abs() == p0));
        assert!(e.particles.iter().all(|q| q.separation.abs() <= w));
        assert!(e.particles.iter().all(|q| (0.0..TAU).contains(&q.angle)));

        // <r²> = w²(1/3 - 2/π²); variance of r² from the 4th moment by quadrature.
        let m2 = w * w * (1.0 / 3.0 - 2.0 / (PI * PI));
        let m4 = {
            let k = 20_000;
            let h = 2.0 / k as f64;
            (0..k)
                .map(|i| {
                    let x = -1.0 + (i as f64 + 0.5) * h;
                    (w * x).powi(4) * (0.5 * PI * x).cos().powi(2) * h
                })
                .sum::<f64>()
        };
        let mean_r: f64 = e.particles.iter().map(|q| q.separation).sum::<f64>() / n as f64;
        let mean_r2: f64 =
            e.particles.iter().map(|q| q.separation.powi(2)).sum::<f64>() / n as f64;
        assert!(mean_r.abs() < 3.0 * (m2 / n as f64).sqrt());
        assert!((mean_r2 - m2).abs() < 4.0 * ((m4 - m2 * m2) / n as f64).sqrt());

        let again = ClassicalEnsemble::sample(&p, n, 42).unwrap();
        assert_eq!(again, e);
        assert!(ClassicalEnsemble::sample(&p, 0, 1).is_err());
    }

    #[test]
    fn snapshot_round_trip() {
        let p = params(0.5);
        let mut e = ClassicalEnsemble::sample(&p, 50, 3).unwrap();
        for _ in 0..7 {
            e.step();
        }
        let mut buf = Vec::new();
        e.write_csv(&mut buf).unwrap();
        let back = ClassicalEnsemble::read_particles(&buf[..]).unwrap();
        assert_eq!(back, e.particles);
    }
}
