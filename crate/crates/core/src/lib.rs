//! Simulation of quantum-injected optical parametric amplification (QI-OPA):
//! truncated Fock-space states, the amplified Macro-qubits, their Wigner
//! functions, the two Macro-Macro entanglement protocols and the
//! correlation / CHSH estimators used to analyse them.

pub mod error;
pub mod fock;
pub mod macrostates;
mod math;
pub mod measurement;
pub mod protocols;
pub mod wigner;

pub use error::{QiopaError, Result};
pub use math::{ln_binomial, ln_factorial};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
