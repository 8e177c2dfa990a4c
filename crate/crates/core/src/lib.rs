//! Dissipative cat-state generation with synchronous (nonequilibrium) pump
//! fields, simulated on truncated Fock spaces.
//!
//! The crate is organised by role:
//!
//! * [`fock`]: operators, states and density matrices for one or two bosonic
//!   modes, with tensor products and partial traces.
//! * [`dynamics`]: the adiabatic two-photon master equation, the discrete
//!   synchronous-pump cycle map (lossless and lossy), and the second-order
//!   reduction of the cycle map to effective two-photon rates.
//! * [`meanfield`]: classical amplitude dynamics of the adiabatically
//!   eliminated model.
//! * [`analysis`]: cat-state fidelity, optimal-size search and Wigner
//!   functions.
//! * [`tunable_loss`]: the switchable pump loss channel used to emulate a
//!   synchronous pump with standing modes.
//!
//! All rates are in units of the nonlinear coupling `g_nl` and all times in
//! units of `1/g_nl`, except in [`tunable_loss::effective_loss_shift`], which
//! works in Hz. The joint Hilbert space is always ordered (signal, pump).

pub mod analysis;
pub mod dynamics;
mod error;
pub mod fock;
pub mod meanfield;
mod propagate;
mod sparse;
pub mod tunable_loss;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Index of the signal mode in joint (signal, pump) states.
pub const SIGNAL: usize = 0;
/// Index of the pump mode in joint (signal, pump) states.
pub const PUMP: usize = 1;
