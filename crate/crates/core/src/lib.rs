//! Desk-scale state-vector engines for quantum devices with restricted
//! control: bichromatic trapped-ion gates, collective-spin (Dicke) dynamics
//! with one-axis twisting and GHZ generation, optical-lattice spin models
//! built from displacement gates, and spin-squeezing analysis with Monte
//! Carlo over lattice filling.
//!
//! All engines share the conventions of [`spin`] (basis index 0 is the lower
//! level, `hbar = 1`, spin operators `j = sigma/2`) and the subsystem
//! ordering of [`hilbert`] (qubits first, vibrational mode last).

pub mod dicke;
pub mod error;
pub mod hilbert;
pub mod iontrap;
pub mod lattice;
pub mod linalg;
pub mod spin;
pub mod squeeze;

#[cfg(test)]
pub(crate) mod testsupport;

pub use error::{Error, Result};
