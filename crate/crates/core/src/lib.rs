//! Quantum correlations of random two-qubit states under non-Markovian
//! dephasing and depolarizing noise.
//!
//! The pipeline is: draw a Haar-random state of a given rank
//! ([`states`]), push it through a local Pauli channel for a grid of noise
//! strengths ([`channels`], [`sweep`]), evaluate logarithmic negativity or
//! quantum discord at each point ([`measures`]), detect collapses and
//! revivals, and aggregate them over an ensemble ([`stats`]).
//! [`oracles`] holds closed-form results for Bell-diagonal states used to
//! cross-check the numerics.

pub mod channels;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod oracles;
pub mod states;
pub mod stats;
pub mod sweep;

pub use channels::{ChannelConfig, ChannelKind, PauliChannelWeights, Sides};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityMatrix, Subsystem};
pub use measures::{DiscordResult, Measure, MeasurementBasis, OptimizerSettings};
pub use states::{Rank, RandomStateSpec};
pub use stats::{EnsembleStats, Estimate, IndexedRecord, QcBin};
pub use sweep::{EventRecord, SweepGrid, SweepStop, Sweeper, Trajectory};


