//! Density-matrix noise simulation and error-propagation bounds.
//!
//! `krausprop-core` is the allocation-only (`no_std` + `alloc`) half of the
//! workspace. It contains:
//!
//! * [`linalg`]: dense complex matrices, qubit embedding, density matrices and
//!   random state samplers.
//! * [`channels`]: Kraus channels, the structured single/double-qubit Kraus
//!   families, probabilistic errors, thermal relaxation and the algebra that
//!   composes and converts between them.
//! * [`circuit`]: the gate library, identity chains, QFT circuits and noise
//!   models bound to gates.
//! * [`simulator`]: noiseless, exact-channel and trajectory evolution plus
//!   error-series extraction.
//! * [`bounds`]: the contraction functional, constant estimators and the
//!   closed-form plateau / linear / mixed propagation bounds.
//!
//! Everything that touches the filesystem, threads or the command line lives in
//! the `krausprop` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod channels;
pub mod circuit;
pub mod linalg;
pub mod rng;
pub mod simulator;

pub use bounds::{BoundCurve, BoundEstimate, BoundError, BoundKind, CurveKind, Sampler};
pub use channels::{
    ChannelError, ErrorKind, GateError, KrausChannel, ProbabilisticError, StructuredDqKraus,
    StructuredSqKraus, ThermalRelaxation,
};
pub use circuit::{Circuit, CircuitError, Gate, GateKind, NoiseModel, NoiseRule, NoisyCircuit};
pub use linalg::{ComplexMatrix, DensityMatrix, LinalgError, PureState, C64};
pub use simulator::{ErrorSeries, EvolutionTrace, SeriesPoint, SimError};
