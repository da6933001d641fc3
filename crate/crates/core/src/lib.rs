//! Simulation of two charge qubits with an always-on sz-sz coupling:
//! decoupled single-qubit gates, entanglement plateaus and a CHSH test.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bell;
pub mod circuit;
pub mod cli;
pub mod dynamics;
pub mod entangle;
pub mod error;
pub mod qmath;

pub use error::{Error, Result};
