//! Verifiable delegation of quantum sampling, simulated end to end.
//!
//! The crate compiles Toffoli/Hadamard circuits into weighted X-Z local
//! Hamiltonians whose unique ground state is the circuit's history state,
//! checks their energy with single-qubit X/Z measurements, and drives the
//! sampling protocols built on top of that check:
//!
//! * [`qsim`]: dense statevector simulation and X/Z measurement.
//! * [`hamiltonian`]: X-Z terms, the circuit-to-Hamiltonian compiler and
//!   spectrum certification.
//! * [`energy`]: the single-shot energy test and its acceptance probability.
//! * [`qpip1`]: the cut-and-choose sampling protocol with a quantum verifier.
//! * [`qpip0`]: the classical-verifier protocols over an ideal measurement
//!   functionality.
//! * [`blind`]: the per-round homomorphic-encryption blindness compiler.
//! * [`config`] / [`report`]: experiment configuration and JSON records used
//!   by the `xzdelegate` binary.

pub mod bits;
pub mod blind;
pub mod config;
pub mod energy;
pub mod error;
pub mod hamiltonian;
pub mod outcome;
pub mod qpip0;
pub mod qpip1;
pub mod qsim;
pub mod report;
pub mod rng;
pub mod stats;

pub use bits::Bits;
pub use error::{Error, Result};
