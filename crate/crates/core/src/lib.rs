//! Gate-based quantum reservoir computing.
//!
//! A classical sequence drives a fixed random circuit on a dense statevector;
//! Pauli-`Z` expectations of the evolving register form a feature matrix,
//! and a closed-form ridge readout maps features to targets.
//!
//! - [`sim`]: statevector, gates, exact expectations, shot sampling
//! - [`encoding`]: angle encoding and data re-uploading
//! - [`reservoir`]: the fixed random reservoir circuit
//! - [`tasks`]: STM, temporal parity and NARMA10 generators
//! - [`readout`]: ridge regression and metrics
//! - [`experiment`]: evolution modes, protocol, sweeps and the qubit scan

pub mod encoding;
pub mod error;
pub mod experiment;
pub mod readout;
pub mod reservoir;
pub mod rng;
pub mod sim;
pub mod tasks;

pub use error::{QrcError, Result};

/// Formats a float with 17 significant digits (`d.dddddddddddddddde±x`),
/// enough for a lossless round trip.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}
