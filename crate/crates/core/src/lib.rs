//! State-vector and density-matrix simulation of small quantum registers.
//!
//! Gates act on a register through small 2×2, 4×4 and 8×8 kernels applied to
//! groups of partner amplitudes selected by stride arithmetic, so no operator
//! of full register dimension is ever built. On top of the kernels sits an
//! ensemble engine that averages a set of noisy evolution paths into a single
//! density matrix per step, along with the usual decoherence diagnostics
//! (fidelity, purity, entropy, spectra, polarizations and correlations) and
//! explicit three-qubit repetition codes.
//!
//! Qubits are numbered from 1, with qubit 1 the most significant bit of the
//! decimal basis index.

pub mod densitylab;
pub mod eccodes;
mod error;
pub mod gatekit;
pub mod multiverse;
pub mod qstate;
pub mod rng;
#[cfg(feature = "testing")]
pub mod testing;

pub use densitylab::{BlochData, DensityMatrix};
pub use error::{Error, Result};
pub use gatekit::GateMatrix;
pub use multiverse::{
    AlgorithmOp, Channel, ChannelSet, KrausOperator, MetricsRecord, MetricsTrace, MultiverseRun,
    NoiseEvent, NoiseHit, NoiseModel, Schedule, Step,
};
pub use qstate::{MeasurementOutcome, QubitLabel, StateVector};

/// Complex amplitude type used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Tolerance for normalization, trace and hermiticity checks.
pub const STATE_TOL: f64 = 1e-10;
