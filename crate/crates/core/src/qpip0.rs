//! Sampling with a classical verifier over an ideal measurement
//! functionality.
//!
//! The measurement protocol is modelled by [`Functionality`]: the verifier
//! opens a session with a private X/Z basis choice `h`, the prover commits
//! to a [`CopyStrategy`], and the verifier sends a challenge. A testing
//! challenge returns a verdict, a Hadamard challenge returns measured bits.
//! A committed strategy is either bound to a state, broken (an arbitrary
//! test pass rate together with arbitrary Hadamard-round bits), or aborted.
//! Errors that vanish with the security parameter are modelled as zero.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::Bits;
use crate::energy::{parity_sign, sample_term, term_basis, verdict_for};
use crate::error::{Error, Result};
use crate::hamiltonian::{compile_hamiltonian, history_state, CompileOptions, CompileReport};
use crate::outcome::{SampleOutcome, Verdict};
use crate::qsim::{tv_distance, BasisChoice, Circuit, Distribution, StateVector};
use crate::rng;
use crate::stats::{tv_confidence_radius, CI_DELTA};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Phase {
    KeySent,
    Committed,
    ChallengeSent,
    Done,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Challenge {
    Test,
    Hadamard,
}

impl Challenge {
    pub fn bit(self) -> u8 {
        match self {
            Challenge::Test => 0,
            Challenge::Hadamard => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Self {
        if bit & 1 == 0 {
            Challenge::Test
        } else {
            Challenge::Hadamard
        }
    }
}

/// Where a broken commitment's Hadamard-round bits come from.
#[derive(Clone, Debug, PartialEq)]
pub enum BitSource {
    Uniform,
    Fixed(Bits),
}

impl BitSource {
    fn draw<R: Rng + ?Sized>(&self, qubits: usize, rng: &mut R) -> Bits {
        match self {
            BitSource::Uniform => (0..qubits).map(|_| rng.random::<bool>()).collect(),
            BitSource::Fixed(bits) => bits.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum CopyStrategy {
    Bind(Arc<StateVector>),
    Break { test_pass_prob: f64, source: BitSource },
    Abort,
}

impl CopyStrategy {
    pub fn bind(state: StateVector) -> Self {
        CopyStrategy::Bind(Arc::new(state))
    }

    pub fn broken(test_pass_prob: f64, source: BitSource) -> Self {
        CopyStrategy::Break { test_pass_prob, source }
    }

    /// Probability that a testing challenge is passed.
    pub fn test_pass_prob(&self) -> f64 {
        match self {
            CopyStrategy::Bind(_) => 1.0,
            CopyStrategy::Break { test_pass_prob, .. } => *test_pass_prob,
            CopyStrategy::Abort => 0.0,
        }
    }

    fn validate(&self, qubits: usize) -> Result<()> {
        match self {
            CopyStrategy::Bind(state) if state.qubits() != qubits => {
                Err(Error::LengthMismatch { expected: qubits, actual: state.qubits() })
            }
            CopyStrategy::Break { test_pass_prob, .. } if !(0.0..=1.0).contains(test_pass_prob) => {
                Err(Error::InvalidArgument(format!("test pass probability {test_pass_prob} outside [0, 1]")))
            }
            CopyStrategy::Break { source: BitSource::Fixed(bits), .. } if bits.len() != qubits => {
                Err(Error::LengthMismatch { expected: qubits, actual: bits.len() })
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Commitment {
    Pending,
    Bound(Arc<StateVector>),
    Broken { test_pass_prob: f64, source: BitSource },
    Aborted,
}

/// What the functionality returns on opening.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Opening {
    Verdict(Verdict),
    Bits(Bits),
    Aborted,
}

impl fmt::Display for Opening {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Opening::Verdict(v) => write!(f, "{v:?}"),
            Opening::Bits(b) => write!(f, "{b}"),
            Opening::Aborted => f.write_str("abort"),
        }
    }
}

/// One run of the measurement protocol on one copy.
#[derive(Clone, Debug)]
pub struct MeasurementSession {
    session_id: u64,
    h: BasisChoice,
    phase: Phase,
    commitment: Commitment,
    c: Option<Challenge>,
    opening: Option<Opening>,
}

/// The part of a session the prover can observe.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SessionView {
    pub session_id: u64,
    pub qubits: usize,
    pub phase: Phase,
    pub challenge: Option<Challenge>,
}

impl MeasurementSession {
    pub fn new(session_id: u64, h: BasisChoice) -> Self {
        MeasurementSession { session_id, h, phase: Phase::KeySent, commitment: Commitment::Pending, c: None, opening: None }
    }

    pub fn id(&self) -> u64 {
        self.session_id
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn qubits(&self) -> usize {
        self.h.len()
    }

    pub fn commitment(&self) -> &Commitment {
        &self.commitment
    }

    pub fn opening(&self) -> Option<&Opening> {
        self.opening.as_ref()
    }

    pub fn view(&self) -> SessionView {
        SessionView { session_id: self.session_id, qubits: self.qubits(), phase: self.phase, challenge: self.c }
    }

    fn expect(&self, phase: Phase) -> Result<()> {
        if self.phase != phase {
            return Err(Error::Protocol(format!(
                "session {} is in phase {:?}, expected {phase:?}",
                self.session_id, self.phase
            )));
        }
        Ok(())
    }

    pub fn commit(&mut self, strategy: &CopyStrategy) -> Result<()> {
        self.expect(Phase::KeySent)?;
        strategy.validate(self.qubits())?;
        self.commitment = match strategy {
            CopyStrategy::Bind(state) => Commitment::Bound(state.clone()),
            CopyStrategy::Break { test_pass_prob, source } => {
                Commitment::Broken { test_pass_prob: *test_pass_prob, source: source.clone() }
            }
            CopyStrategy::Abort => Commitment::Aborted,
        };
        self.phase = Phase::Committed;
        Ok(())
    }

    pub fn challenge(&mut self, c: Challenge) -> Result<()> {
        self.expect(Phase::Committed)?;
        self.c = Some(c);
        self.phase = Phase::ChallengeSent;
        Ok(())
    }

    pub fn open<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Opening> {
        self.expect(Phase::ChallengeSent)?;
        let c = self.c.ok_or_else(|| Error::Protocol("no challenge recorded".into()))?;
        let opening = match (&self.commitment, c) {
            (Commitment::Aborted, _) => Opening::Aborted,
            (Commitment::Pending, _) => return Err(Error::Protocol("opening an uncommitted session".into())),
            (Commitment::Bound(_), Challenge::Test) => Opening::Verdict(Verdict::Acc),
            (Commitment::Broken { test_pass_prob, .. }, Challenge::Test) => {
                Opening::Verdict(Verdict::from_bool(rng.random::<f64>() < *test_pass_prob))
            }
            (Commitment::Bound(state), Challenge::Hadamard) => Opening::Bits(state.measure_xz(&self.h, rng)?),
            (Commitment::Broken { source, .. }, Challenge::Hadamard) => Opening::Bits(source.draw(self.qubits(), rng)),
        };
        self.opening = Some(opening.clone());
        self.phase = Phase::Done;
        Ok(opening)
    }
}

/// Challenge and open a committed session in one call.
pub fn measurement_open<R: Rng + ?Sized>(
    session: &mut MeasurementSession,
    c: Challenge,
    rng: &mut R,
) -> Result<Opening> {
    session.challenge(c)?;
    session.open(rng)
}

/// The set of sessions of one protocol execution.
#[derive(Clone, Debug, Default)]
pub struct Functionality {
    sessions: Vec<MeasurementSession>,
}

impl Functionality {
    pub fn new() -> Self {
        Functionality::default()
    }

    pub fn open_session(&mut self, h: BasisChoice) -> u64 {
        let id = self.sessions.len() as u64;
        self.sessions.push(MeasurementSession::new(id, h));
        id
    }

    pub fn session(&self, id: u64) -> Result<&MeasurementSession> {
        self.sessions.get(id as usize).ok_or_else(|| Error::Protocol(format!("unknown session {id}")))
    }

    fn session_mut(&mut self, id: u64) -> Result<&mut MeasurementSession> {
        self.sessions.get_mut(id as usize).ok_or_else(|| Error::Protocol(format!("unknown session {id}")))
    }

    pub fn commit(&mut self, id: u64, strategy: &CopyStrategy) -> Result<()> {
        self.session_mut(id)?.commit(strategy)
    }

    pub fn challenge(&mut self, id: u64, c: Challenge) -> Result<()> {
        self.session_mut(id)?.challenge(c)
    }

    pub fn open<R: Rng + ?Sized>(&mut self, id: u64, rng: &mut R) -> Result<Opening> {
        self.session_mut(id)?.open(rng)
    }

    pub fn views(&self) -> Vec<SessionView> {
        self.sessions.iter().map(MeasurementSession::view).collect()
    }

    pub fn len(&self) -> usize {
        self.sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.is_empty()
    }
}

/// A compiled circuit and input shared by the single-copy and the m-fold
/// protocol.
#[derive(Clone, Debug)]
pub struct Qpip0Instance {
    pub circuit: Circuit,
    pub x: Bits,
    pub report: CompileReport,
    pub history: Arc<StateVector>,
}

/// One single-copy execution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NaiveOutcome {
    pub c: Challenge,
    pub term_index: usize,
    pub d: Verdict,
    /// Output-wire bits on an accepted Hadamard round.
    pub z: Option<Bits>,
}

/// The verifier's private choices for one m-fold execution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Qpip0Choice {
    /// The Hadamard copy.
    pub r: usize,
    /// Sampled term per copy; `None` for the Hadamard copy.
    pub terms: Vec<Option<usize>>,
    pub h: Vec<BasisChoice>,
}

/// One m-fold execution with its per-copy trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Qpip0Run {
    pub r: usize,
    pub openings: Vec<Opening>,
    pub outcome: SampleOutcome,
}

impl Qpip0Instance {
    pub fn new(circuit: &Circuit, x: &Bits, epsilon: f64, padding: Option<usize>, options: CompileOptions) -> Result<Self> {
        let report = compile_hamiltonian(circuit, x, epsilon, padding, options)?;
        let history = Arc::new(history_state(&report.circuit_padded, x)?);
        Ok(Qpip0Instance { circuit: circuit.clone(), x: x.clone(), report, history })
    }

    pub fn qubits(&self) -> usize {
        self.report.qubits
    }

    pub fn honest(&self) -> CopyStrategy {
        CopyStrategy::Bind(self.history.clone())
    }

    pub fn ideal(&self) -> Result<Distribution> {
        crate::qsim::output_distribution(&self.circuit, &self.x)
    }

    /// `1 - (padding + 1)/(T' + 1)`.
    pub fn eps_pad(&self) -> f64 {
        crate::qpip1::eps_pad(self.report.padding, self.report.t_padded)
    }

    /// A register-wide bit string carrying `z` on the output wires and
    /// zeros elsewhere.
    pub fn embed_outputs(&self, z: &Bits) -> Result<Bits> {
        let outputs = self.circuit.outputs();
        if z.len() != outputs.len() {
            return Err(Error::LengthMismatch { expected: outputs.len(), actual: z.len() });
        }
        let mut bits = Bits::zeros(self.qubits());
        for (j, &w) in outputs.iter().enumerate() {
            bits.set(w, z.get(j));
        }
        Ok(bits)
    }

    /// The single-copy protocol.
    pub fn run_naive<R: Rng + ?Sized>(&self, strategy: &CopyStrategy, rng: &mut R) -> Result<NaiveOutcome> {
        let h = &self.report.hamiltonian;
        let term_index = sample_term(h, rng)?;
        let (alpha, term) = h.terms()[term_index];
        let c = Challenge::from_bit(rng.random::<bool>() as u8);
        let mut f = Functionality::new();
        let id = f.open_session(term_basis(&term, self.qubits()));
        f.commit(id, strategy)?;
        f.challenge(id, c)?;
        let (d, z) = match f.open(id, rng)? {
            Opening::Aborted => (Verdict::Rej, None),
            Opening::Verdict(v) => (v, None),
            Opening::Bits(bits) => {
                let d = verdict_for(alpha, parity_sign(&term, &bits));
                (d, d.is_acc().then(|| bits.select(self.circuit.outputs())))
            }
        };
        Ok(NaiveOutcome { c, term_index, d, z })
    }

    /// The verifier's choice of Hadamard copy and per-copy bases.
    pub fn choose<R: Rng + ?Sized>(&self, copies: usize, rng: &mut R) -> Result<Qpip0Choice> {
        if copies < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 copies, got {copies}")));
        }
        let h = &self.report.hamiltonian;
        let r = rng.random_range(0..copies);
        let mut terms = Vec::with_capacity(copies);
        let mut bases = Vec::with_capacity(copies);
        for i in 0..copies {
            if i == r {
                terms.push(None);
                bases.push(BasisChoice::all_z(self.qubits()));
            } else {
                let t = sample_term(h, rng)?;
                terms.push(Some(t));
                bases.push(term_basis(&h.terms()[t].1, self.qubits()));
            }
        }
        Ok(Qpip0Choice { r, terms, h: bases })
    }

    /// Runs the sessions of a prepared choice: every copy but `r` is
    /// tested, copy `r` is opened in the Hadamard round.
    pub fn execute<R: Rng + ?Sized>(
        &self,
        choice: &Qpip0Choice,
        strategies: &[CopyStrategy],
        functionality: &mut Functionality,
        rng: &mut R,
    ) -> Result<Vec<Opening>> {
        if strategies.len() != choice.h.len() {
            return Err(Error::LengthMismatch { expected: choice.h.len(), actual: strategies.len() });
        }
        let ids: Vec<u64> = choice.h.iter().map(|h| functionality.open_session(h.clone())).collect();
        for (&id, s) in ids.iter().zip(strategies) {
            functionality.commit(id, s)?;
        }
        for (i, &id) in ids.iter().enumerate() {
            functionality.challenge(id, if i == choice.r { Challenge::Hadamard } else { Challenge::Test })?;
        }
        ids.iter().map(|&id| functionality.open(id, rng)).collect()
    }

    /// `(Rej, _)` unless every testing copy accepts; otherwise the output
    /// wires of the Hadamard copy.
    pub fn decide(&self, choice: &Qpip0Choice, openings: &[Opening]) -> SampleOutcome {
        let mut z = None;
        for (i, o) in openings.iter().enumerate() {
            match (i == choice.r, o) {
                (false, Opening::Verdict(Verdict::Acc)) => {}
                (true, Opening::Bits(bits)) if bits.len() == self.qubits() => {
                    z = Some(bits.select(self.circuit.outputs()))
                }
                _ => return SampleOutcome::Rej,
            }
        }
        match z {
            Some(z) => SampleOutcome::Acc(z),
            None => SampleOutcome::Rej,
        }
    }

    pub fn run_traced<R: Rng + ?Sized>(&self, strategies: &[CopyStrategy], rng: &mut R) -> Result<Qpip0Run> {
        let choice = self.choose(strategies.len(), rng)?;
        let mut f = Functionality::new();
        let openings = self.execute(&choice, strategies, &mut f, rng)?;
        let outcome = self.decide(&choice, &openings);
        Ok(Qpip0Run { r: choice.r, openings, outcome })
    }

    pub fn run<R: Rng + ?Sized>(&self, strategies: &[CopyStrategy], rng: &mut R) -> Result<SampleOutcome> {
        Ok(self.run_traced(strategies, rng)?.outcome)
    }

    /// `Pr[d = Acc]` by enumerating the Hadamard copy:
    /// `(1/M') sum_r [r can open] prod_{i != r} pass_i`.
    pub fn exact_accept_probability(strategies: &[CopyStrategy]) -> f64 {
        let total = strategies.len() as f64;
        (0..strategies.len())
            .map(|r| {
                if matches!(strategies[r], CopyStrategy::Abort) {
                    return 0.0;
                }
                strategies.iter().enumerate().filter(|(i, _)| *i != r).map(|(_, s)| s.test_pass_prob()).product::<f64>()
            })
            .sum::<f64>()
            / total
    }
}

/// One single-copy execution with a freshly compiled instance.
pub fn run_qpip_naive<R: Rng + ?Sized>(
    strategy: &CopyStrategy,
    circuit: &Circuit,
    x: &Bits,
    epsilon: f64,
    rng: &mut R,
) -> Result<NaiveOutcome> {
    Qpip0Instance::new(circuit, x, epsilon, None, CompileOptions::default())?.run_naive(strategy, rng)
}

/// One m-fold execution with a freshly compiled instance.
pub fn run_qpip0<R: Rng + ?Sized>(
    strategies: &[CopyStrategy],
    circuit: &Circuit,
    x: &Bits,
    epsilon: f64,
    rng: &mut R,
) -> Result<SampleOutcome> {
    Qpip0Instance::new(circuit, x, epsilon, None, CompileOptions::default())?.run(strategies, rng)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Qpip0Stats {
    pub copies: usize,
    pub trials: usize,
    pub accepted: usize,
    pub accept_rate: f64,
    pub exact_accept: f64,
    pub tv_acc_conditional: f64,
    pub ci_conditional: f64,
    pub eps_pad: f64,
    pub hadamard_counts: BTreeMap<usize, usize>,
    pub seed: u64,
}

pub fn qpip0_monte_carlo(
    instance: &Qpip0Instance,
    strategies: &[CopyStrategy],
    trials: usize,
    seed: u64,
) -> Result<(Qpip0Stats, Vec<Qpip0Run>)> {
    let runs: Vec<Qpip0Run> = (0..trials as u64)
        .into_par_iter()
        .map(|i| instance.run_traced(strategies, &mut rng::trial(seed, i)))
        .collect::<Result<_>>()?;
    let accepted: Vec<&Bits> = runs.iter().filter_map(|r| r.outcome.sample()).collect();
    let tv = if accepted.is_empty() {
        0.0
    } else {
        tv_distance(&Distribution::from_samples(accepted.iter().copied()), &instance.ideal()?)
    };
    let mut hadamard_counts = BTreeMap::new();
    for run in &runs {
        *hadamard_counts.entry(run.r).or_insert(0) += 1;
    }
    let cells = 1usize << instance.circuit.outputs().len().min(30);
    let stats = Qpip0Stats {
        copies: strategies.len(),
        trials,
        accepted: accepted.len(),
        accept_rate: accepted.len() as f64 / trials.max(1) as f64,
        exact_accept: Qpip0Instance::exact_accept_probability(strategies),
        tv_acc_conditional: tv,
        ci_conditional: tv_confidence_radius(cells, accepted.len(), CI_DELTA),
        eps_pad: instance.eps_pad(),
        hadamard_counts,
        seed,
    };
    Ok((stats, runs))
}
