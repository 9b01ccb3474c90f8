//! Benchmark fixtures.

use kicked_duo::{ModelParams, Propagator, QuantumState};

/// A propagator and a state that has already spread over a few kicks.
pub fn spread_state(n_com: usize, n_int: usize, kicks: u64) -> (Propagator, QuantumState) {
    let p = ModelParams::from_com(1.0, 5.0, 1.0, 0.25, 0.5, n_com, n_int, kicks).expect("valid parameters");
    let prop = Propagator::new(&p);
    let mut s = QuantumState::initial(&p);
    for _ in 0..kicks {
        prop.floquet_step(&mut s).expect("consistent grids");
    }
    (prop, s)
}
