//! Excitation transfer between two qubits through a thermal cavity with
//! active photon-extraction cooling.
//!
//! - [`hilbert`], [`sparse`], [`density`]: the composite space `atom ⊗ atom ⊗ field`,
//!   sparse operators, thermal states and partial traces.
//! - [`dynamics`]: Hamiltonian, Lindblad generator, adaptive integration and
//!   the cavity steady state.
//! - [`effective`]: the adiabatically eliminated two-level model.
//! - [`cooling`]: the extraction rate of a cooling-atom ensemble.
//! - [`optimizer`]: fidelity budget and its closed-form optimum.
//! - [`transfer`]: the `|ba> → |ab>` protocol on the full master equation.
//! - [`scenario`]: configuration files, presets, runs and output writers.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cooling;
pub mod density;
pub mod dynamics;
pub mod effective;
pub mod error;
pub mod hilbert;
pub mod optimizer;
pub mod params;
pub mod scenario;
pub mod sparse;
pub mod transfer;

pub use error::{Error, Result};
pub use params::SystemParams;
