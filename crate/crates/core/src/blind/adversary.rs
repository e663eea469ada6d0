//! Named provers against compiled protocols.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::compiler::{BlindProtocol, BlindProver};
use super::protocol::{unframe, Prover};
use crate::error::Error;
use crate::rng::{self, SimRng, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdversaryKind {
    /// The honest compiled prover.
    Honest,
    /// Returns the encrypted verifier message of the round.
    EchoCiphertext,
    /// Sends empty messages.
    Abort,
    /// The honest prover with every outgoing message corrupted.
    Fuzz,
}

impl AdversaryKind {
    pub const ALL: [AdversaryKind; 4] =
        [AdversaryKind::Honest, AdversaryKind::EchoCiphertext, AdversaryKind::Abort, AdversaryKind::Fuzz];

    pub fn name(self) -> &'static str {
        match self {
            AdversaryKind::Honest => "honest",
            AdversaryKind::EchoCiphertext => "echo-ciphertext",
            AdversaryKind::Abort => "abort",
            AdversaryKind::Fuzz => "fuzz",
        }
    }
}

impl fmt::Display for AdversaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AdversaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AdversaryKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown adversary {s:?}")))
    }
}

/// The adversary `kind` against `blind`, with randomness from the prover
/// stream of `seed`.
pub fn blind_adversary(kind: AdversaryKind, blind: &BlindProtocol, seed: u64) -> Box<dyn Prover> {
    match kind {
        AdversaryKind::Honest => Box::new(blind.blind_prover()),
        AdversaryKind::EchoCiphertext => Box::new(EchoCiphertext),
        AdversaryKind::Abort => Box::new(Abort),
        AdversaryKind::Fuzz => Box::new(Corrupting { inner: blind.blind_prover(), rng: rng::stream(seed, Stream::Prover) }),
    }
}

pub struct EchoCiphertext;

impl Prover for EchoCiphertext {
    fn respond(&mut self, round: usize, message: &[u8]) -> Vec<u8> {
        let field = if round == 1 { 2 } else { 1 };
        unframe(message).and_then(|mut f| (f.len() > field).then(|| f.swap_remove(field))).unwrap_or_default()
    }
}

pub struct Abort;

impl Prover for Abort {
    fn respond(&mut self, _round: usize, _message: &[u8]) -> Vec<u8> {
        Vec::new()
    }
}

pub struct Corrupting {
    inner: BlindProver,
    rng: SimRng,
}

/// A random corruption of `msg`: bit flips, truncation, extension,
/// replacement or deletion.
pub fn corrupt(msg: &[u8], rng: &mut SimRng) -> Vec<u8> {
    let mut out = msg.to_vec();
    match rng.random_range(0..5) {
        0 if !out.is_empty() => {
            for _ in 0..rng.random_range(1..=8) {
                let i = rng.random_range(0..out.len());
                out[i] ^= 1 << rng.random_range(0..8);
            }
        }
        1 => out.truncate(rng.random_range(0..=out.len())),
        2 => {
            let mut extra = vec![0; rng.random_range(1..32)];
            rng.fill_bytes(&mut extra);
            out.extend(extra);
        }
        3 => {
            out = vec![0; rng.random_range(0..64)];
            rng.fill_bytes(&mut out);
        }
        _ => out.clear(),
    }
    out
}

impl Prover for Corrupting {
    fn respond(&mut self, round: usize, message: &[u8]) -> Vec<u8> {
        let honest = self.inner.respond(round, message);
        corrupt(&honest, &mut self.rng)
    }
}
