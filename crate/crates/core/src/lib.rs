//! Simulation laboratory for gradient-based optimization of variational
//! Hamiltonian ansatz (VHA) circuits.
//!
//! The crate is organised bottom-up:
//!
//! - [`sim`]: gates, moment scheduling, pure-state and density-matrix
//!   execution, depolarizing noise and shot sampling.
//! - [`pauli`]: Pauli strings and sums.
//! - [`hubbard`]: the Jordan-Wigner mapped 1D Hubbard model, its VHA
//!   decomposition and the non-interacting reference state.
//! - [`sector`]: fixed particle-number subspace machinery used by the
//!   reference energies (exact diagonalization, best achievable ansatz energy).
//! - [`ansatz`]: compilation of the VHA product into Pauli-gadget circuits with
//!   a linear parameter-to-gate binding map.
//! - [`gradient`]: energy evaluation backends, forward finite differences and
//!   the parameter-shift rule.
//! - [`descent`]: fixed learning-rate steepest descent.
//! - [`experiment`]: scenarios, seeded multi-run suites and CSV output.

pub mod ansatz;
pub mod descent;
pub mod error;
pub mod experiment;
pub mod gradient;
pub mod hubbard;
pub mod pauli;
pub mod sector;
pub mod sim;

pub use error::{Error, Result};

/// Density-matrix backends refuse circuits wider than this unless overridden.
pub const DEFAULT_DENSITY_CAP: usize = 8;

#[cfg(test)]
mod test_util;
