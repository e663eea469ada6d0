//! X-Z local Hamiltonians and the circuit-to-Hamiltonian compiler.

pub mod compile;
pub mod construct;
pub mod spectrum;
pub mod term;

pub use compile::{
    compile_hamiltonian, compute_weights, padding_for, path_gap, CompileOptions, CompileReport, InputWeight,
    WeightMode, Weights,
};
pub use construct::{build_h_clock, build_h_in, build_h_prop, decompose_gate, history_state, Layout};
pub use spectrum::{
    dense_eigenvalues, ground_spectrum, lanczos_smallest, smallest_nonzero_eigenvalue, EigenMethod,
    LanczosOptions, SpectrumReport,
};
pub use term::{expand_product, HamiltonianBuilder, WeightedHamiltonian, XZTerm, DENSE_MAX_QUBITS};
