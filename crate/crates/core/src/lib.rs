//! Dissipative qubit networks: XY-coupled qubits whose adjacent pairs decay
//! coherently into a shared zero-temperature bath.
//!
//! The crate builds the Lindblad generator for a network graph, evolves
//! density matrices, extracts steady states from the Liouvillian kernel,
//! and compares stationary pair entanglement against the closed-form dark
//! state predictions.
//!
//! Vertices are 0-based in the library API. Every external interface (JSON
//! configs, reports, CSV files, CLI output) uses 1-based vertex labels.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod darkstate;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod hilbert;
pub mod optimizer;
pub mod polariton;
pub mod report;
pub mod topology;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Dense complex operator on a (possibly truncated) basis.
pub type Operator = nalgebra::DMatrix<C64>;

/// Dense complex vector.
pub type Ket = nalgebra::DVector<C64>;

/// Largest entry modulus.
pub fn max_abs<'a>(entries: impl IntoIterator<Item = &'a C64>) -> f64 {
    entries.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
pub(crate) mod testutil;
