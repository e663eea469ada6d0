//! The blindness compiler: every round's messages travel encrypted under a
//! fresh key, the previous secret key is handed to the prover encrypted
//! under the new one, and the prover key-switches its state by evaluating
//! decryption homomorphically.

use std::cell::RefCell;
use std::rc::Rc;

use super::protocol::{
    execute, fix_size, frame, unframe, ProtocolSpec, Prover, RoundProtocol, SourceProtocol, Transcript,
    VerifierSession,
};
use super::qhe::{Ciphertext, EvalFn, Program, PublicKey, QheScheme, SecretKey};
use super::QheError;
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::rng::{self, SimRng, Stream};

/// The compiled protocol. Round count and message semantics are those of
/// the source; only the encoding changes.
#[derive(Clone)]
pub struct BlindProtocol {
    source: Rc<dyn SourceProtocol>,
    qhe: Rc<dyn QheScheme>,
    spec: ProtocolSpec,
    level: usize,
}

pub fn compile_blind(source: Rc<dyn SourceProtocol>, qhe: Rc<dyn QheScheme>) -> Result<BlindProtocol> {
    let caps = qhe.capabilities();
    if !caps.classical_friendly {
        return Err(QheError::NotClassicalFriendly.into());
    }
    let src = source.spec();
    if !caps.functions && !src.select_only {
        return Err(QheError::Unsupported(format!("{} cannot evaluate the prover of {}", qhe.name(), src.name)).into());
    }
    // One extra level for the homomorphic decryption in key switching.
    let level = src.prover_depth + 1;
    if level > qhe.max_level() {
        return Err(QheError::LevelExceeded { requested: level, max: qhe.max_level() }.into());
    }
    let spec = ProtocolSpec { name: format!("blind-{}", src.name), ..src.clone() };
    Ok(BlindProtocol { source, qhe, spec, level })
}

impl BlindProtocol {
    pub fn source(&self) -> &Rc<dyn SourceProtocol> {
        &self.source
    }

    pub fn qhe(&self) -> &Rc<dyn QheScheme> {
        &self.qhe
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn blind_verifier(&self, x: &Bits, seed: u64) -> Result<BlindVerifier> {
        Ok(BlindVerifier {
            inner: self.source.verifier(x, seed)?,
            chain: KeyChain::new(self, x, seed),
            substitutions: 0,
        })
    }

    /// An execution together with the verifier's per-round keys.
    pub fn run_with_keys(
        &self,
        x: &Bits,
        prover: &mut dyn Prover,
        seed: u64,
    ) -> Result<(Transcript, Vec<(PublicKey, SecretKey)>)> {
        let mut v = self.blind_verifier(x, seed)?;
        let t = execute(&mut v, prover, self.spec.rounds)?;
        Ok((t, v.chain.keys))
    }

    pub fn blind_prover(&self) -> BlindProver {
        BlindProver { source: self.source.clone(), qhe: self.qhe.clone(), state: None }
    }
}

impl RoundProtocol for BlindProtocol {
    fn spec(&self) -> &ProtocolSpec {
        &self.spec
    }

    fn verifier(&self, x: &Bits, seed: u64) -> Result<Box<dyn VerifierSession>> {
        Ok(Box::new(self.blind_verifier(x, seed)?))
    }

    fn honest_prover(&self, _x: &Bits, _seed: u64) -> Box<dyn Prover> {
        Box::new(self.blind_prover())
    }
}

/// The verifier-side key schedule, shared by the compiled verifier and the
/// simulated prover so both draw identical keys from the same stream.
struct KeyChain {
    qhe: Rc<dyn QheScheme>,
    spec: ProtocolSpec,
    level: usize,
    input: Vec<u8>,
    rng: SimRng,
    keys: Vec<(PublicKey, SecretKey)>,
}

impl KeyChain {
    fn new(blind: &BlindProtocol, x: &Bits, seed: u64) -> Self {
        KeyChain {
            qhe: blind.qhe.clone(),
            spec: blind.source.spec().clone(),
            level: blind.level,
            input: blind.source.prover_input(x),
            rng: rng::stream(seed, Stream::Qhe),
            keys: Vec::new(),
        }
    }

    /// Round 1: `pk_1, enc(x), enc(v_1)`. Round `t`: `pk_t, enc(v_t),
    /// enc(sk_{t-1})`.
    fn wrap(&mut self, round: usize, v: &[u8]) -> Result<Vec<u8>> {
        let prev = self.keys.last().map(|(_, sk)| sk.clone());
        let carried = if round == 1 { self.input.clone() } else { prev.map(|sk| sk.0).unwrap_or_default() };
        let (pk, sk) = self.qhe.keygen(self.level, carried.len() + v.len(), &mut self.rng)?;
        let msg = if round == 1 {
            let ct_x = self.qhe.enc(&pk, &carried, &mut self.rng)?;
            let ct_v = self.qhe.enc(&pk, v, &mut self.rng)?;
            frame(&[&pk.0, &ct_x.0, &ct_v.0])
        } else {
            let ct_v = self.qhe.enc(&pk, v, &mut self.rng)?;
            let ct_sk = self.qhe.enc(&pk, &carried, &mut self.rng)?;
            frame(&[&pk.0, &ct_v.0, &ct_sk.0])
        };
        self.keys.push((pk, sk));
        Ok(msg)
    }

    /// `p_round` from the prover's ciphertext, defaulted on a bad size.
    fn unwrap_reply(&self, round: usize, reply: &[u8], substitutions: &mut usize) -> Vec<u8> {
        let plain = match self.keys.get(round - 1) {
            Some((_, sk)) => self.qhe.dec(sk, &Ciphertext(reply.to_vec())),
            None => Vec::new(),
        };
        fix_size(&plain, self.spec.prover_size(round), substitutions)
    }
}

pub struct BlindVerifier {
    inner: Box<dyn VerifierSession>,
    chain: KeyChain,
    substitutions: usize,
}

impl BlindVerifier {
    pub fn keys(&self) -> &[(PublicKey, SecretKey)] {
        &self.chain.keys
    }
}

impl VerifierSession for BlindVerifier {
    fn first(&mut self) -> Result<Vec<u8>> {
        let v = self.inner.first()?;
        self.chain.wrap(1, &v)
    }

    fn next(&mut self, round: usize, reply: &[u8]) -> Result<Vec<u8>> {
        let p = self.chain.unwrap_reply(round - 1, reply, &mut self.substitutions);
        let v = self.inner.next(round, &p)?;
        self.chain.wrap(round, &v)
    }

    fn output(&mut self, reply: &[u8]) -> Result<Vec<u8>> {
        let p = self.chain.unwrap_reply(self.chain.spec.rounds, reply, &mut self.substitutions);
        self.inner.output(&p)
    }

    fn substitutions(&self) -> usize {
        self.substitutions + self.inner.substitutions()
    }
}

/// The honest prover of the compiled protocol. It never sees a plaintext.
pub struct BlindProver {
    source: Rc<dyn SourceProtocol>,
    qhe: Rc<dyn QheScheme>,
    state: Option<Ciphertext>,
}

impl BlindProver {
    fn step(&mut self, round: usize, message: &[u8]) -> Option<Vec<u8>> {
        let fields = unframe(message)?;
        let [pk, a, b] = <[Vec<u8>; 3]>::try_from(fields).ok()?;
        let pk = PublicKey(pk);
        let (ct_v, state) = if round == 1 {
            (Ciphertext(b), Ciphertext(a))
        } else {
            let old = self.state.take()?;
            let switched = self.qhe.eval(&pk, &EvalFn::DecryptWith(old), &[&Ciphertext(b)]).ok()?;
            (Ciphertext(a), switched)
        };
        let spec = self.source.spec();
        let split = spec.prover_size(round);
        let out = self.qhe.eval(&pk, &EvalFn::Program(self.source.program(round)), &[&ct_v, &state]).ok()?;
        let p = self.qhe.eval(&pk, &EvalFn::Program(Program::range(0..split)), &[&out]).ok()?;
        let rest = self.qhe.eval(&pk, &EvalFn::Program(Program::range(split..usize::MAX)), &[&out]).ok()?;
        self.state = Some(rest);
        Some(p.0)
    }
}

impl Prover for BlindProver {
    fn respond(&mut self, round: usize, message: &[u8]) -> Vec<u8> {
        if round == 0 || round > self.source.spec().rounds {
            return Vec::new();
        }
        self.step(round, message).unwrap_or_default()
    }
}

/// A prover for the source protocol that plays the compiled verifier
/// towards `adversary`: it draws the keys itself, forwards each `v_t`
/// encrypted, and decrypts the adversary's replies.
pub struct SimulatedProver {
    adversary: Box<dyn Prover>,
    chain: KeyChain,
    failed: Option<Error>,
    view: Rc<RefCell<Vec<Vec<u8>>>>,
}

pub fn simulate_pstar(blind: &BlindProtocol, adversary: Box<dyn Prover>, x: &Bits, seed: u64) -> SimulatedProver {
    SimulatedProver { adversary, chain: KeyChain::new(blind, x, seed), failed: None, view: Rc::default() }
}

impl SimulatedProver {
    /// Messages shown to the adversary so far.
    pub fn view(&self) -> Vec<Vec<u8>> {
        self.view.borrow().clone()
    }

    /// A key-generation or encryption failure, if one happened.
    pub fn failure(&self) -> Option<&Error> {
        self.failed.as_ref()
    }
}

impl Prover for SimulatedProver {
    fn respond(&mut self, round: usize, message: &[u8]) -> Vec<u8> {
        if round == 0 || round > self.chain.spec.rounds {
            return Vec::new();
        }
        let v = fix_size(message, self.chain.spec.verifier_size(round), &mut 0);
        let wrapped = match self.chain.wrap(round, &v) {
            Ok(m) => m,
            Err(e) => {
                self.failed = Some(e);
                return Vec::new();
            }
        };
        self.view.borrow_mut().push(wrapped.clone());
        let reply = self.adversary.respond(round, &wrapped);
        self.chain.unwrap_reply(round, &reply, &mut 0)
    }
}

fn contains(hay: &[u8], needle: &[u8]) -> bool {
    !needle.is_empty() && hay.windows(needle.len()).any(|w| w == needle)
}

/// Checks that no secret key appears in any verifier message except
/// `sk_{t-1}` inside the round-`t` key field, encrypted under `pk_t`.
pub fn check_fresh_keys(
    qhe: &dyn QheScheme,
    transcript: &Transcript,
    keys: &[(PublicKey, SecretKey)],
) -> std::result::Result<(), String> {
    for round in 1..=transcript.rounds() {
        let msg = transcript.verifier_message(round).ok_or(format!("round {round}: no verifier message"))?;
        let fields = unframe(msg).ok_or(format!("round {round}: unparsable verifier message"))?;
        if fields.len() != 3 {
            return Err(format!("round {round}: expected 3 fields, found {}", fields.len()));
        }
        let (pk, sk) = keys.get(round - 1).ok_or(format!("round {round}: no key"))?;
        if fields[0] != pk.0 {
            return Err(format!("round {round}: key field is not pk_{round}"));
        }
        for (f, field) in fields.iter().enumerate() {
            let key_field = round > 1 && f == 2;
            for (s, (_, other)) in keys.iter().enumerate() {
                if key_field && s + 2 == round {
                    continue;
                }
                if contains(field, &other.0) {
                    return Err(format!("round {round}: sk_{} exposed in field {f}", s + 1));
                }
            }
            if key_field {
                let ct = Ciphertext(field.clone());
                if qhe.dec(sk, &ct) != keys[round - 2].1 .0 {
                    return Err(format!("round {round}: key field is not sk_{} under pk_{round}", round - 1));
                }
                for (s, (_, other)) in keys.iter().enumerate() {
                    if s + 1 != round && !qhe.dec(other, &ct).is_empty() {
                        return Err(format!("round {round}: key field opens under sk_{}", s + 1));
                    }
                }
            }
        }
    }
    Ok(())
}
