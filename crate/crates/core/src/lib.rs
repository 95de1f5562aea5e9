//! Simulation toolkit for strain-reconfigurable stochastic nanomagnet neurons.
//!
//! The crate is organised bottom-up:
//!
//! - [`magnet`]: strained-ellipse energy landscape, demagnetization factors,
//!   barrier height and critical stress.
//! - [`sllg`]: finite-temperature stochastic Landau-Lifshitz-Gilbert
//!   integration of a single macrospin.
//! - [`analysis`]: binary/analog regime classification, dwell times and
//!   autocorrelation of simulated trajectories.
//! - [`neuron`]: behavioral binary and analog stochastic neuron models.
//! - [`energetics`]: gate-voltage reconfiguration cost and Arrhenius
//!   retention planning.
//! - [`anneal`]: p-bit Ising annealing with per-neuron barrier schedules.

pub mod analysis;
pub mod anneal;
pub mod constants;
pub mod energetics;
mod error;
pub mod magnet;
pub mod neuron;
pub mod rng;
pub mod sllg;

pub use error::{Error, Result};

/// Crate version, recorded in output headers and run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Formats a float with 17 significant digits, the precision used by every
/// CSV writer in this crate.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
