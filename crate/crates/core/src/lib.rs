//! Fermionic one-body entanglement: occupation-number states, single-particle
//! density matrices, majorization of their spectra and the free operations of
//! fermion linear optics.

pub mod cli;
pub mod entropy;
pub mod error;
pub mod flo;
pub mod fock;
pub mod linalg;
pub mod majorization;
pub mod modemap;
pub mod schmidt;
pub mod spdm;
pub mod verify;

pub use error::{Error, Result};
pub use fock::{Mask, MixedState, PureState};
pub use flo::{MeasurementOutcome, OneBodyUnitary};
pub use spdm::{ExtendedDM, OneBodyDM, SortedSpectrum};
