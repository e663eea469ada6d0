//! Round-based protocols with classical messages, executions and
//! transcripts.

use std::fmt::Write as _;
use std::rc::Rc;

use serde::Serialize;

use super::qhe::Program;
use crate::bits::Bits;
use crate::error::{Error, Result};

/// Static description of a protocol: round count, declared message sizes
/// and prover-circuit depth.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProtocolSpec {
    pub name: String,
    pub rounds: usize,
    /// Size of `v_t` for `t = 1..=rounds`.
    pub verifier_sizes: Vec<usize>,
    /// Size of `p_t` for `t = 1..=rounds`.
    pub prover_sizes: Vec<usize>,
    pub prover_depth: usize,
    /// Every prover step is a [`Program::Select`].
    pub select_only: bool,
}

impl ProtocolSpec {
    pub fn verifier_size(&self, round: usize) -> usize {
        self.verifier_sizes[round - 1]
    }

    pub fn prover_size(&self, round: usize) -> usize {
        self.prover_sizes[round - 1]
    }
}

/// The verifier of one execution. Rounds are numbered from 1.
pub trait VerifierSession {
    /// `v_1`.
    fn first(&mut self) -> Result<Vec<u8>>;
    /// `v_round` from `p_{round-1}`.
    fn next(&mut self, round: usize, reply: &[u8]) -> Result<Vec<u8>>;
    /// The output from `p_T`.
    fn output(&mut self, reply: &[u8]) -> Result<Vec<u8>>;
    /// Prover messages replaced by the default message so far.
    fn substitutions(&self) -> usize {
        0
    }
}

pub trait Prover {
    fn respond(&mut self, round: usize, message: &[u8]) -> Vec<u8>;
}

pub trait RoundProtocol {
    fn spec(&self) -> &ProtocolSpec;
    fn verifier(&self, x: &Bits, seed: u64) -> Result<Box<dyn VerifierSession>>;
    fn honest_prover(&self, x: &Bits, seed: u64) -> Box<dyn Prover>;
}

/// A protocol whose honest prover is a sequence of programs: step `t` maps
/// `v_t || st_{t-1}` to `p_t || st_t`, with `st_0` the prover input.
pub trait SourceProtocol: RoundProtocol {
    fn program(&self, round: usize) -> Program;
    fn prover_input(&self, x: &Bits) -> Vec<u8>;
}

/// `bytes` if it has the declared size, otherwise the all-zero default.
pub fn fix_size(bytes: &[u8], size: usize, substitutions: &mut usize) -> Vec<u8> {
    if bytes.len() == size {
        bytes.to_vec()
    } else {
        *substitutions += 1;
        vec![0; size]
    }
}

/// The honest prover of a source protocol, computing in the clear.
pub struct ProgramProver {
    protocol: Rc<dyn SourceProtocol>,
    state: Vec<u8>,
}

impl ProgramProver {
    pub fn new(protocol: Rc<dyn SourceProtocol>, x: &Bits) -> Self {
        let state = protocol.prover_input(x);
        ProgramProver { protocol, state }
    }
}

impl Prover for ProgramProver {
    fn respond(&mut self, round: usize, message: &[u8]) -> Vec<u8> {
        let spec = self.protocol.spec();
        if round == 0 || round > spec.rounds {
            return Vec::new();
        }
        let mut input = fix_size(message, spec.verifier_size(round), &mut 0);
        input.extend_from_slice(&self.state);
        let mut out = self.protocol.program(round).apply(&input);
        let split = spec.prover_size(round).min(out.len());
        self.state = out.split_off(split);
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    V2p,
    P2v,
    Out,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TranscriptEntry {
    pub dir: Direction,
    pub round: usize,
    #[serde(serialize_with = "hex_bytes")]
    pub hex: Vec<u8>,
}

fn hex_bytes<S: serde::Serializer>(bytes: &[u8], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&hex::encode(bytes))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
    #[serde(serialize_with = "hex_bytes")]
    pub output: Vec<u8>,
    pub substitutions: usize,
}

impl Transcript {
    pub fn rounds(&self) -> usize {
        self.entries.iter().filter(|e| e.dir == Direction::V2p).count()
    }

    pub fn verifier_message(&self, round: usize) -> Option<&[u8]> {
        self.message(Direction::V2p, round)
    }

    pub fn prover_message(&self, round: usize) -> Option<&[u8]> {
        self.message(Direction::P2v, round)
    }

    fn message(&self, dir: Direction, round: usize) -> Option<&[u8]> {
        self.entries.iter().find(|e| e.dir == dir && e.round == round).map(|e| e.hex.as_slice())
    }

    /// One JSON object per message, then the output.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let last = TranscriptEntry { dir: Direction::Out, round: self.rounds(), hex: self.output.clone() };
        for e in self.entries.iter().chain(std::iter::once(&last)) {
            let _ = writeln!(out, "{}", serde_json::to_string(e).unwrap_or_default());
        }
        out
    }
}

/// Runs `verifier` against `prover` for `rounds` rounds.
pub fn execute(verifier: &mut dyn VerifierSession, prover: &mut dyn Prover, rounds: usize) -> Result<Transcript> {
    if rounds == 0 {
        return Err(Error::Protocol("protocol has no rounds".into()));
    }
    let mut t = Transcript::default();
    let mut v = verifier.first()?;
    let mut p = Vec::new();
    for round in 1..=rounds {
        if round > 1 {
            v = verifier.next(round, &p)?;
        }
        p = prover.respond(round, &v);
        t.entries.push(TranscriptEntry { dir: Direction::V2p, round, hex: std::mem::take(&mut v) });
        t.entries.push(TranscriptEntry { dir: Direction::P2v, round, hex: p.clone() });
    }
    t.output = verifier.output(&p)?;
    t.substitutions = verifier.substitutions();
    Ok(t)
}

/// A full execution of `pi` on `x`; deterministic in `seed` and the
/// prover's own randomness.
pub fn run_protocol<P: RoundProtocol + ?Sized>(
    pi: &P,
    x: &Bits,
    prover: &mut dyn Prover,
    seed: u64,
) -> Result<(Transcript, Vec<u8>)> {
    let mut verifier = pi.verifier(x, seed)?;
    let t = execute(verifier.as_mut(), prover, pi.spec().rounds)?;
    let out = t.output.clone();
    Ok((t, out))
}

/// Length-prefixed concatenation of fields.
pub fn frame(fields: &[&[u8]]) -> Vec<u8> {
    let mut out = Vec::new();
    for f in fields {
        out.extend_from_slice(&(f.len() as u32).to_le_bytes());
        out.extend_from_slice(f);
    }
    out
}

pub fn unframe(bytes: &[u8]) -> Option<Vec<Vec<u8>>> {
    let mut fields = Vec::new();
    let mut at = 0;
    while at < bytes.len() {
        let len = u32::from_le_bytes(bytes.get(at..at + 4)?.try_into().ok()?) as usize;
        at += 4;
        fields.push(bytes.get(at..at.checked_add(len)?)?.to_vec());
        at += len;
    }
    Some(fields)
}
