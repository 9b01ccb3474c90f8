use thiserror::Error;

use crate::hilbert::Representation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("state is in {found:?} representation, expected {expected:?}")]
    WrongRepresentation {
        expected: Representation,
        found: Representation,
    },

    #[error("grid mismatch: state is {found_com}x{found_int}, expected {expected_com}x{expected_int}")]
    GridMismatch {
        expected_com: usize,
        expected_int: usize,
        found_com: usize,
        found_int: usize,
    },

    #[error(
        "momentum support reached the aliasing band at kick {kick}: \
         probability {tail_mass:.3e} at |l| >= {limit} exceeds {tolerance:.1e}"
    )]
    Aliasing {
        kick: u64,
        limit: usize,
        tail_mass: f64,
        tolerance: f64,
    },

    #[error("evolution interrupted after kick {kick}")]
    Interrupted { kick: u64 },

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("non-positive bin parameter `{0}`")]
    BadBin(&'static str),

    #[error("degenerate fit window [{lo}, {hi}] ({points} points)")]
    DegenerateWindow { lo: u64, hi: u64, points: usize },

    #[error("fit window [{lo}, {hi}] is not inside the recorded kicks [{first}, {last}]")]
    WindowOutside { lo: u64, hi: u64, first: u64, last: u64 },

    #[error("time series are misaligned at row {row}: n={left} vs n={right}")]
    Misaligned { row: usize, left: u64, right: u64 },

    #[error("bad checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
