//! Bundled source protocols.

use std::cell::RefCell;
use std::rc::Rc;
use std::sync::Arc;

use rand::RngCore;

use super::protocol::{fix_size, ProgramProver, ProtocolSpec, Prover, RoundProtocol, SourceProtocol, VerifierSession};
use super::qhe::Program;
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::outcome::Verdict;
use crate::qpip0::{Challenge, CopyStrategy, Functionality, Opening, Qpip0Choice, Qpip0Instance};
use crate::rng::{self, SimRng, Stream};

const NONCE: usize = 8;

fn check_len(x: &Bits, len: usize) -> Result<()> {
    if x.len() != len {
        return Err(Error::LengthMismatch { expected: len, actual: x.len() });
    }
    Ok(())
}

/// One round: the verifier sends a nonce, the prover returns its input.
#[derive(Clone, Debug)]
pub struct EchoProtocol {
    spec: ProtocolSpec,
}

impl EchoProtocol {
    pub fn new(input_len: usize) -> Self {
        EchoProtocol {
            spec: ProtocolSpec {
                name: "echo".into(),
                rounds: 1,
                verifier_sizes: vec![NONCE],
                prover_sizes: vec![input_len],
                prover_depth: 1,
                select_only: true,
            },
        }
    }
}

struct EchoVerifier {
    rng: SimRng,
    size: usize,
    substitutions: usize,
}

impl VerifierSession for EchoVerifier {
    fn first(&mut self) -> Result<Vec<u8>> {
        let mut nonce = vec![0; NONCE];
        self.rng.fill_bytes(&mut nonce);
        Ok(nonce)
    }

    fn next(&mut self, round: usize, _reply: &[u8]) -> Result<Vec<u8>> {
        Err(Error::Protocol(format!("echo has one round, asked for round {round}")))
    }

    fn output(&mut self, reply: &[u8]) -> Result<Vec<u8>> {
        Ok(fix_size(reply, self.size, &mut self.substitutions))
    }

    fn substitutions(&self) -> usize {
        self.substitutions
    }
}

impl RoundProtocol for EchoProtocol {
    fn spec(&self) -> &ProtocolSpec {
        &self.spec
    }

    fn verifier(&self, x: &Bits, seed: u64) -> Result<Box<dyn VerifierSession>> {
        check_len(x, self.spec.prover_sizes[0])?;
        Ok(Box::new(EchoVerifier { rng: rng::stream(seed, Stream::Verifier), size: x.len(), substitutions: 0 }))
    }

    fn honest_prover(&self, x: &Bits, _seed: u64) -> Box<dyn Prover> {
        Box::new(ProgramProver::new(Rc::new(self.clone()), x))
    }
}

impl SourceProtocol for EchoProtocol {
    fn program(&self, _round: usize) -> Program {
        Program::range(NONCE..NONCE + self.spec.prover_sizes[0])
    }

    fn prover_input(&self, x: &Bits) -> Vec<u8> {
        x.to_bytes()
    }
}

const CHAIN_NONCE: usize = 4;

/// Several rounds: each round the prover returns the verifier's nonce
/// followed by its input, carrying the input in its state. The output is
/// one byte flagging whether every nonce came back, then the input.
#[derive(Clone, Debug)]
pub struct ChainProtocol {
    spec: ProtocolSpec,
    input_len: usize,
}

impl ChainProtocol {
    pub fn new(input_len: usize, rounds: usize) -> Self {
        ChainProtocol {
            spec: ProtocolSpec {
                name: "chain".into(),
                rounds,
                verifier_sizes: vec![CHAIN_NONCE; rounds],
                prover_sizes: vec![CHAIN_NONCE + input_len; rounds],
                prover_depth: 1,
                select_only: true,
            },
            input_len,
        }
    }
}

struct ChainVerifier {
    rng: SimRng,
    input_len: usize,
    rounds: usize,
    nonce: Vec<u8>,
    ok: bool,
    substitutions: usize,
}

impl ChainVerifier {
    fn check(&mut self, reply: &[u8]) -> Vec<u8> {
        let p = fix_size(reply, CHAIN_NONCE + self.input_len, &mut self.substitutions);
        self.ok &= p[..CHAIN_NONCE] == self.nonce[..];
        p
    }

    fn fresh_nonce(&mut self) -> Vec<u8> {
        self.nonce = vec![0; CHAIN_NONCE];
        self.rng.fill_bytes(&mut self.nonce);
        self.nonce.clone()
    }
}

impl VerifierSession for ChainVerifier {
    fn first(&mut self) -> Result<Vec<u8>> {
        Ok(self.fresh_nonce())
    }

    fn next(&mut self, round: usize, reply: &[u8]) -> Result<Vec<u8>> {
        if round < 2 || round > self.rounds {
            return Err(Error::Protocol(format!("chain has {} rounds, asked for round {round}", self.rounds)));
        }
        self.check(reply);
        Ok(self.fresh_nonce())
    }

    fn output(&mut self, reply: &[u8]) -> Result<Vec<u8>> {
        let p = self.check(reply);
        let mut out = vec![self.ok as u8];
        out.extend_from_slice(&p[CHAIN_NONCE..]);
        Ok(out)
    }

    fn substitutions(&self) -> usize {
        self.substitutions
    }
}

impl RoundProtocol for ChainProtocol {
    fn spec(&self) -> &ProtocolSpec {
        &self.spec
    }

    fn verifier(&self, x: &Bits, seed: u64) -> Result<Box<dyn VerifierSession>> {
        check_len(x, self.input_len)?;
        if self.spec.rounds == 0 {
            return Err(Error::Protocol("chain needs at least one round".into()));
        }
        Ok(Box::new(ChainVerifier {
            rng: rng::stream(seed, Stream::Verifier),
            input_len: self.input_len,
            rounds: self.spec.rounds,
            nonce: Vec::new(),
            ok: true,
            substitutions: 0,
        }))
    }

    fn honest_prover(&self, x: &Bits, _seed: u64) -> Box<dyn Prover> {
        Box::new(ProgramProver::new(Rc::new(self.clone()), x))
    }
}

impl SourceProtocol for ChainProtocol {
    fn program(&self, _round: usize) -> Program {
        let x = CHAIN_NONCE..CHAIN_NONCE + self.input_len;
        Program::Select(vec![0..CHAIN_NONCE, x.clone(), x])
    }

    fn prover_input(&self, x: &Bits) -> Vec<u8> {
        x.to_bytes()
    }
}

/// The m-fold classical-verifier sampling protocol as a two-round message
/// protocol over a shared measurement functionality:
///
/// * `v_1`: the session ids (u32 little endian per copy).
/// * `p_1`: one commit acknowledgement byte per copy.
/// * `v_2`: one challenge byte per copy.
/// * `p_2`: per copy a tag byte and `s` bit bytes describing the opening.
///
/// The verifier accepts only openings that match the functionality's
/// records for the challenges it sent. The output is `d` (1 = Acc) followed
/// by the output bits, all zero on rejection.
///
/// The functionality is reset whenever a verifier is created, so the
/// verifier of an execution must be created before its prover acts.
#[derive(Clone)]
pub struct Qpip0Protocol {
    instance: Arc<Qpip0Instance>,
    strategies: Arc<Vec<CopyStrategy>>,
    world: Rc<RefCell<World>>,
    spec: ProtocolSpec,
}

struct World {
    functionality: Functionality,
    rng: SimRng,
}

const TAG_REJ: u8 = 0;
const TAG_ACC: u8 = 1;
const TAG_BITS: u8 = 2;
const TAG_ABORT: u8 = 3;
const TAG_INVALID: u8 = 0xff;

impl Qpip0Protocol {
    pub fn new(instance: Arc<Qpip0Instance>, strategies: Vec<CopyStrategy>) -> Result<Self> {
        let copies = strategies.len();
        if copies < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 copies, got {copies}")));
        }
        let s = instance.qubits();
        let spec = ProtocolSpec {
            name: "qpip0".into(),
            rounds: 2,
            verifier_sizes: vec![4 * copies, copies],
            prover_sizes: vec![copies, copies * (1 + s)],
            prover_depth: 2,
            select_only: false,
        };
        let world = World { functionality: Functionality::new(), rng: rng::seeded(0) };
        Ok(Qpip0Protocol { instance, strategies: Arc::new(strategies), world: Rc::new(RefCell::new(world)), spec })
    }

    pub fn honest(instance: Arc<Qpip0Instance>, copies: usize) -> Result<Self> {
        let s = vec![instance.honest(); copies];
        Qpip0Protocol::new(instance, s)
    }

    pub fn copies(&self) -> usize {
        self.strategies.len()
    }

    pub fn instance(&self) -> &Qpip0Instance {
        &self.instance
    }

    fn block(&self) -> usize {
        1 + self.instance.qubits()
    }

    fn encode(&self, opening: Option<Opening>) -> Vec<u8> {
        let mut block = vec![0; self.block()];
        match opening {
            Some(Opening::Verdict(Verdict::Rej)) => block[0] = TAG_REJ,
            Some(Opening::Verdict(Verdict::Acc)) => block[0] = TAG_ACC,
            Some(Opening::Bits(bits)) => {
                block[0] = TAG_BITS;
                for (k, b) in bits.iter().enumerate().take(block.len() - 1) {
                    block[1 + k] = b as u8;
                }
            }
            Some(Opening::Aborted) => block[0] = TAG_ABORT,
            None => block[0] = TAG_INVALID,
        }
        block
    }

    fn decode(&self, block: &[u8]) -> Option<Opening> {
        match block[0] {
            TAG_REJ => Some(Opening::Verdict(Verdict::Rej)),
            TAG_ACC => Some(Opening::Verdict(Verdict::Acc)),
            TAG_BITS => Some(Opening::Bits(Bits::from_bytes(&block[1..]))),
            TAG_ABORT => Some(Opening::Aborted),
            _ => None,
        }
    }

    /// Output encoding of a verdict and sample.
    pub fn encode_output(&self, outcome: &crate::outcome::SampleOutcome) -> Vec<u8> {
        let mut out = vec![0; 1 + self.instance.circuit.outputs().len()];
        if let Some(z) = outcome.sample() {
            out[0] = 1;
            for (k, b) in z.iter().enumerate() {
                out[1 + k] = b as u8;
            }
        }
        out
    }
}

fn read_id(bytes: &[u8], i: usize) -> u64 {
    bytes
        .get(4 * i..4 * i + 4)
        .and_then(|b| b.try_into().ok())
        .map(|b| u32::from_le_bytes(b) as u64)
        .unwrap_or(u64::MAX)
}

struct Qpip0Verifier {
    protocol: Qpip0Protocol,
    rng: SimRng,
    choice: Option<Qpip0Choice>,
    ids: Vec<u64>,
    substitutions: usize,
}

impl VerifierSession for Qpip0Verifier {
    fn first(&mut self) -> Result<Vec<u8>> {
        let choice = self.protocol.instance.choose(self.protocol.copies(), &mut self.rng)?;
        let mut world = self.protocol.world.borrow_mut();
        self.ids = choice.h.iter().map(|h| world.functionality.open_session(h.clone())).collect();
        self.choice = Some(choice);
        Ok(self.ids.iter().flat_map(|&id| (id as u32).to_le_bytes()).collect())
    }

    fn next(&mut self, round: usize, reply: &[u8]) -> Result<Vec<u8>> {
        if round != 2 {
            return Err(Error::Protocol(format!("qpip0 has 2 rounds, asked for round {round}")));
        }
        fix_size(reply, self.protocol.copies(), &mut self.substitutions);
        let choice = self.choice.as_ref().ok_or_else(|| Error::Protocol("no first message".into()))?;
        Ok((0..self.protocol.copies()).map(|i| (i == choice.r) as u8).collect())
    }

    fn output(&mut self, reply: &[u8]) -> Result<Vec<u8>> {
        let p = fix_size(reply, self.protocol.spec.prover_sizes[1], &mut self.substitutions);
        let choice = self.choice.as_ref().ok_or_else(|| Error::Protocol("no first message".into()))?;
        let world = self.protocol.world.borrow();
        let mut openings = Vec::with_capacity(self.ids.len());
        for (i, block) in p.chunks(self.protocol.block()).enumerate() {
            let expected = if i == choice.r { Challenge::Hadamard } else { Challenge::Test };
            let claimed = self.protocol.decode(block);
            let recorded = world.functionality.session(self.ids[i]).ok().filter(|s| s.view().challenge == Some(expected));
            match (claimed, recorded.and_then(|s| s.opening())) {
                (Some(c), Some(r)) if &c == r => openings.push(c),
                _ => return Ok(self.protocol.encode_output(&crate::outcome::SampleOutcome::Rej)),
            }
        }
        Ok(self.protocol.encode_output(&self.protocol.instance.decide(choice, &openings)))
    }

    fn substitutions(&self) -> usize {
        self.substitutions
    }
}

impl RoundProtocol for Qpip0Protocol {
    fn spec(&self) -> &ProtocolSpec {
        &self.spec
    }

    fn verifier(&self, x: &Bits, seed: u64) -> Result<Box<dyn VerifierSession>> {
        if x != &self.instance.x {
            return Err(Error::InvalidArgument(format!("instance was compiled for input {}", self.instance.x)));
        }
        *self.world.borrow_mut() =
            World { functionality: Functionality::new(), rng: rng::stream(seed, Stream::Functionality) };
        Ok(Box::new(Qpip0Verifier {
            protocol: self.clone(),
            rng: rng::stream(seed, Stream::Verifier),
            choice: None,
            ids: Vec::new(),
            substitutions: 0,
        }))
    }

    fn honest_prover(&self, x: &Bits, _seed: u64) -> Box<dyn Prover> {
        Box::new(ProgramProver::new(Rc::new(self.clone()), x))
    }
}

impl SourceProtocol for Qpip0Protocol {
    fn program(&self, round: usize) -> Program {
        let this = self.clone();
        let copies = self.copies();
        match round {
            1 => Program::Function(Rc::new(move |input: &[u8]| {
                let mut world = this.world.borrow_mut();
                let mut out: Vec<u8> = (0..copies)
                    .map(|i| world.functionality.commit(read_id(input, i), &this.strategies[i]).is_ok() as u8)
                    .collect();
                out.extend(input.iter().take(4 * copies));
                out
            })),
            _ => Program::Function(Rc::new(move |input: &[u8]| {
                let ids = input.get(copies..).unwrap_or(&[]);
                let mut guard = this.world.borrow_mut();
                let world = &mut *guard;
                let mut out = Vec::new();
                for i in 0..copies {
                    let id = read_id(ids, i);
                    let c = Challenge::from_bit(input.get(i).copied().unwrap_or(0));
                    let opening = world
                        .functionality
                        .challenge(id, c)
                        .and_then(|_| world.functionality.open(id, &mut world.rng))
                        .ok();
                    out.extend(this.encode(opening));
                }
                out
            })),
        }
    }

    fn prover_input(&self, x: &Bits) -> Vec<u8> {
        x.to_bytes()
    }
}
