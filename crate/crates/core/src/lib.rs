//! Quantum-noise budgets of interferometric gravitational-wave detectors.
//!
//! The interferometer is modelled as an SU(2) rotation acting on the
//! Schwinger generators of the two input modes. Photon-counting and
//! radiation-pressure position noise follow from the first and second
//! moments of those generators, so every budget here can be checked against
//! a brute-force computation on an explicit state vector.
//!
//! * [`su2_fock`]: generator matrices, states, moments (the oracle layer).
//! * [`input_states`]: coherent, squeezed, twin-Fock and intelligent inputs.
//! * [`interferometer`]: rotations, output observables, phase uncertainty.
//! * [`noise_model`]: detector configuration, budgets, optima, losses.
//! * [`cli`] and [`verify`]: command implementations behind the `qnoise` binary.

pub mod cli;
pub mod error;
pub mod input_states;
pub mod interferometer;
pub mod noise_model;
pub mod optimize;
pub mod su2_fock;
pub mod verify;

pub use error::{Error, Result};
pub use input_states::{InputStateSpec, IntelligentStateSolution};
pub use interferometer::{Observable, PhaseUncertainty};
pub use noise_model::{DetectorConfig, NoiseBudget, Optimum};
pub use su2_fock::{Basis, IrrepLabel, MomentSet, OperatorMatrix, TwoModeState};
