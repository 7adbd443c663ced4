//! Driven qubit coupled to a lossy cavity with a Lorentzian spectral density.
//!
//! The reduced dynamics is fully determined by the survival amplitude `A(t)`
//! of the dressed excited state `|A>`; every observable in this crate is a
//! function of it. Time is measured in units of `1/gamma`.

pub mod amplitude;
pub mod error;
pub mod geometric_phase;
pub mod non_markov;
pub mod numerics;
pub mod params;
pub mod state;
pub mod sweep;
pub mod temporal;

pub use amplitude::{
    amplitude_oracle_ode, amplitude_oracle_on_grid, oracle_max_deviation, AmplitudeTrajectory,
};
pub use error::{Error, Result};
pub use geometric_phase::{eigensystem, geometric_phase, EigenSystem, GeometricPhase};
pub use non_markov::{blp_measure, BlpOptions, BlpResult};
pub use params::{DerivedParams, ParamWarning, SystemParams};
pub use state::{BlochVector, QubitState};
pub use sweep::{
    run_sweep, Axis, AxisKind, Quantity, Spacing, SweepOutput, SweepRecord, SweepSpec,
};
