//! Dense reference constructions shared by the integration tests. Nothing here
//! goes through the FFT/DST code paths under test.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use kicked_duo::hilbert::momentum_index;
use kicked_duo::classical::{self, Particle};
use kicked_duo::{Complex64, Grids, ModelParams, QuantumState};
use nalgebra::{DMatrix, DVector, Matrix4};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Unitary DFT `F[k, i] = e^{-2πi k i/N}/√N`.
pub fn dense_dft(n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |k, i| {
        let ang = -2.0 * PI * ((k * i) % n) as f64 / n as f64;
        Complex64::from_polar(1.0 / (n as f64).sqrt(), ang)
    })
}

/// Orthonormal DST-I `S[n, j] = √(2/(N+1)) sin(π (n+1)(j+1)/(N+1))`.
pub fn dense_dst(n: usize) -> DMatrix<Complex64> {
    let s = (2.0 / (n + 1) as f64).sqrt();
    DMatrix::from_fn(n, n, |a, b| {
        c(s * (PI * ((a + 1) * (b + 1)) as f64 / (n + 1) as f64).sin(), 0.0)
    })
}

/// Unitary map from weighted position samples `√(ΔR Δr) ψ` to momentum x level
/// coefficients, with the row-major (R major) ordering of the state.
pub fn dense_transform(params: &ModelParams) -> DMatrix<Complex64> {
    dense_dft(params.n_com).kronecker(&dense_dst(params.n_int))
}

pub fn to_vector(state: &QuantumState) -> DVector<Complex64> {
    DVector::from_column_slice(&state.coeffs)
}

/// Free Hamiltonian on the position grid, `U† diag(ħ²l²/2M + E_n) U`.
pub fn dense_free_hamiltonian(params: &ModelParams) -> DMatrix<Complex64> {
    let u = dense_transform(params);
    let spec = params.box_spectrum();
    let (nc, ni) = (params.n_com, params.n_int);
    let diag = DVector::from_fn(nc * ni, |idx, _| {
        let l = momentum_index(idx / ni, nc) as f64;
        let p = params.hbar * l;
        c(p * p / (2.0 * params.total_mass) + spec.energy(idx % ni + 1), 0.0)
    });
    u.adjoint() * DMatrix::from_diagonal(&diag) * u
}

pub fn dense_free_propagator(params: &ModelParams) -> DMatrix<Complex64> {
    let h = dense_free_hamiltonian(params);
    (h * c(0.0, -params.period / params.hbar)).exp()
}

pub fn dense_kick(params: &ModelParams) -> DMatrix<Complex64> {
    let g = Grids::new(params);
    let ni = params.n_int;
    let kappa = params.kick / params.hbar;
    let diag = DVector::from_fn(params.n_com * ni, |idx, _| {
        let (a, r) = (g.angles[idx / ni], g.separations[idx % ni]);
        Complex64::from_polar(1.0, -kappa * a.cos() * (0.5 * r).cos())
    });
    DMatrix::from_diagonal(&diag)
}

/// Explicit center-of-mass reduced density matrix from position samples.
pub fn reduced_density_matrix(state: &QuantumState) -> DMatrix<Complex64> {
    let (nc, ni) = (state.n_com(), state.n_int());
    let w = state.weight();
    DMatrix::from_fn(nc, nc, |a, b| {
        (0..ni)
            .map(|j| state.at(a, j) * state.at(b, j).conj())
            .sum::<Complex64>()
            * w
    })
}

pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// `J_l(x) = (1/π) ∫_0^π cos(lτ - x sin τ) dτ` by the trapezoid rule, which
/// is spectrally accurate for this periodic integrand.
pub fn bessel_j(l: i64, x: f64) -> f64 {
    let m = 4096;
    let h = PI / m as f64;
    let f = |t: f64| (l as f64 * t - x * t.sin()).cos();
    let mut s = 0.5 * (f(0.0) + f(PI));
    for i in 1..m {
        s += f(i as f64 * h);
    }
    s * h / PI
}

/// Event-driven time stepping of the relative motion between walls.
pub fn substep_flight(r: f64, p: f64, w: f64, mu: f64, t: f64, steps: usize) -> (f64, f64) {
    let dt = t / steps as f64;
    let (mut x, mut v) = (r, p / mu);
    for _ in 0..steps {
        let mut left = dt;
        loop {
            let nx = x + v * left;
            if nx > w {
                left -= (w - x) / v;
                x = w;
                v = -v;
            } else if nx < -w {
                left -= (-w - x) / v;
                x = -w;
                v = -v;
            } else {
                x = nx;
                break;
            }
        }
    }
    (x, v * mu)
}

fn as_vec(q: &Particle) -> [f64; 4] {
    [q.angle, q.momentum, q.separation, q.rel_momentum]
}

/// Jacobian determinant of one full period at `a`, by central differences.
pub fn step_jacobian_det(a: Particle, params: &ModelParams, h: f64) -> f64 {
    let base = as_vec(&a);
    let mut jac = Matrix4::<f64>::zeros();
    for col in 0..4 {
        let shifted = |s: f64| {
            let mut v = base;
            v[col] += s;
            let q = classical::step(
                Particle {
                    angle: v[0],
                    momentum: v[1],
                    separation: v[2],
                    rel_momentum: v[3],
                },
                params,
            );
            as_vec(&q)
        };
        let (plus, minus) = (shifted(h), shifted(-h));
        for row in 0..4 {
            let mut d = plus[row] - minus[row];
            if row == 0 {
                d = (d + PI).rem_euclid(TAU) - PI;
            }
            jac[(row, col)] = d / (2.0 * h);
        }
    }
    jac.determinant()
}
