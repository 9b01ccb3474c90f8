//! Experiment harness: configuration, figure presets, runs and comparisons.

pub mod compare;
pub mod config;
pub mod error;
pub mod run;
pub mod spec;

pub use config::{Config, Mode, Settings};
pub use error::{HarnessError, Result};
pub use run::{execute, RunContext};
pub use spec::{fig_presets, ExperimentSpec, Plan, Scale};

/// Worker count: `KICKED_DUO_WORKERS` wins over `flag`, which wins over the
/// number of available cores.
pub fn worker_count(flag: Option<usize>, env: Option<&str>) -> Result<usize> {
    if let Some(v) = env.map(str::trim).filter(|v| !v.is_empty()) {
        return match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(HarnessError::bad("KICKED_DUO_WORKERS", format!("`{v}` is not a positive integer"))),
        };
    }
    match flag {
        Some(0) => Err(HarnessError::bad("--workers", "must be positive")),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}
