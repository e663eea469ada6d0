//! Blind delegation: a compiler wrapping any round-based protocol with
//! classical messages in per-round homomorphic encryption under fresh keys,
//! mock encryption schemes, and harnesses for simulation exactness,
//! blindness and robustness.

use thiserror::Error;

pub mod adversary;
pub mod compiler;
pub mod experiments;
pub mod protocol;
pub mod protocols;
pub mod qhe;

pub use adversary::{blind_adversary, corrupt, AdversaryKind};
pub use compiler::{check_fresh_keys, compile_blind, simulate_pstar, BlindProtocol, BlindProver, BlindVerifier};
pub use experiments::{
    blindness_experiment, fuzz_experiment, input_bit_distinguisher, simulation_check, BlindnessStats, FuzzStats,
    SchemeFactory, SimulationStats,
};
pub use protocol::{
    execute, run_protocol, Direction, ProgramProver, ProtocolSpec, Prover, RoundProtocol, SourceProtocol,
    Transcript, TranscriptEntry, VerifierSession,
};
pub use protocols::{ChainProtocol, EchoProtocol, Qpip0Protocol};
pub use qhe::{
    otp_qhe, otp_qhe_reusing, transparent_qhe, ByteFn, Capabilities, Ciphertext, EvalFn, OtpQhe, Program, PublicKey,
    QheScheme, SecretKey, TransparentQhe,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QheError {
    #[error("unsupported evaluation: {0}")]
    Unsupported(String),
    #[error("level {requested} exceeds the scheme maximum {max}")]
    LevelExceeded { requested: usize, max: usize },
    #[error("key {0:016x} would be reused")]
    KeyReuse(u64),
    #[error("unknown key {0:016x}")]
    UnknownKey(u64),
    #[error("malformed key")]
    MalformedKey,
    #[error("scheme is not classical-friendly")]
    NotClassicalFriendly,
}
