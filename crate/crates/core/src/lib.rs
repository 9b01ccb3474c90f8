//! Quantum and classical dynamics of two coupled delta-kicked rotors.
//!
//! The center-of-mass motion of two equal masses on a ring is kicked by
//! `K cos R cos(r/2)`, which entangles it with the relative coordinate `r`
//! confined to a hard-walled well of half-width `w`. The crate propagates
//! wavefunctions with an exact split-operator Floquet map and classical
//! ensembles with the corresponding symplectic map, and measures momentum
//! spreading and the entropies of the center-of-mass reduced state.

pub mod checkpoint;
pub mod classical;
pub mod error;
pub mod hilbert;
pub mod numeric;
pub mod observables;
pub mod params;
pub mod propagator;

pub use classical::{ClassicalEnsemble, Dynamics, Particle};
pub use error::{Error, Result};
pub use hilbert::{Grids, QuantumState, Representation, SpectralBasis};
pub use observables::{
    fit_diffusion, GramMatrix, MomentumDistribution, QuantumObservables, Record, TimeSeries,
};
pub use params::{BoxSpectrum, ModelParams};
pub use propagator::{AliasGuard, EvolveOptions, KickConvention, Propagator, SingleRotor};

pub use num_complex::Complex64;
