//! Intrinsic-decoherence (Milburn) dynamics of a trapped ion coupled to a
//! cavity mode and a resonant laser, and the probability of reaching the
//! tripartite GHZ state `(|g,0,0⟩ ∓ i|e,1,1⟩)/√2`.
//!
//! The dynamics live in a four-state invariant block of the interaction
//! Hamiltonian. Several independent propagators are provided so that each
//! can be checked against the others; see [`engines`].

// `!(x > 0.0)` is used so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engines;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod model;
pub mod observables;

pub use engines::{DensityMatrix, EngineControls, EvolutionRequest, MonteCarloEstimate};
pub use error::{Error, Result};
pub use experiments::{Engine, PeakRecord, SweepSpec, System, TimeSeries, UnitReport};
pub use model::{BasisOrder, DerivedCouplings, HamiltonianBlock, ModeIndices, Spectrum, SystemParams};
pub use observables::{GhzSign, GhzTarget, Probability};
