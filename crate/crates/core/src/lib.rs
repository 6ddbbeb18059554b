//! Wigner functions of single-mode quantum states in the Fock basis, Lindblad
//! steady states of a two-level emitter observed by a cascaded detector
//! oscillator, and reconstruction of the effective state seen by the detector.

pub mod error;
pub mod fockspace;
pub mod io;
pub mod liouvillian;
pub mod metrics;
#[doc(hidden)]
pub mod oracle;
pub mod reconstruct;
pub mod states;
pub mod verify;
pub mod wigner;

pub use error::{Error, Result};
pub use fockspace::{ComplexMatrix, DensityMatrix};
pub use states::{DriveConfig, DriveMode, SqueezeParams, StateSpec};
pub use wigner::{PhaseGrid, WignerField};
