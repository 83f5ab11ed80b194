//! Desk-scale toolkit for spacetime circuit codes built on bitonic
//! architectures: exact configuration counting and ranking, dyadic tilings,
//! Markov-chain gap machinery, the spacetime Hamiltonian and Pauli detection.

pub mod architecture;
pub mod configurations;
pub mod detection;
pub mod error;
pub mod hamiltonian;
pub mod lanczos;
pub mod markov;
pub mod sim;
pub mod tilings;

pub use error::{Error, Result};

/// Default state cap for brute-force enumeration.
pub const DEFAULT_CAP: usize = 1_000_000;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
