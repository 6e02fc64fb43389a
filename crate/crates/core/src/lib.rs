//! Geometric phases of time-periodic rotating-frame Hamiltonians.
//!
//! The crate computes non-adiabatic (Aharonov-Anandan) phases and
//! holonomies from the frame generator `B = H̃ − A`, adiabatic Berry and
//! Wilczek-Zee phases from instantaneous eigenframes, and checks both
//! against a direct Schrödinger-propagation oracle. The three-qubit
//! Lipkin-Meshkov-Glick model is built in, together with its closed-form
//! spectra and phases.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adiabatic;
pub mod angle;
pub mod closed_form;
pub mod error;
pub mod exec;
pub mod grid;
pub mod holonomy;
pub mod linalg;
pub mod oracle;
pub mod report;
pub mod spin;
pub mod sweep;
pub mod verify;

pub use error::{PhaseError, Result};
