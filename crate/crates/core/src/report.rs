//! Subcommand drivers producing JSON records (and CSV or JSON-lines traces).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::rc::Rc;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use crate::bits::Bits;
use crate::blind::{
    blind_adversary, blindness_experiment, compile_blind, fuzz_experiment, otp_qhe, otp_qhe_reusing, run_protocol,
    simulation_check, transparent_qhe, AdversaryKind, ChainProtocol, EchoProtocol, Qpip0Protocol, QheScheme,
    SourceProtocol,
};
use crate::config::{
    circuit_to_text, BlindExperiment, BlindProtocolName, ExperimentConfig, Qpip0Strategy, Qpip1Strategy,
    SchemeName, VgsState,
};
use crate::energy::{
    closeness_bound, trace_distance_pure, vgs_accept_prob_analytic, vgs_accept_prob_exact, vgs_accept_prob_mixed,
    vgs_monte_carlo, vgs_round, EXACT_MAX_QUBITS,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{
    compile_hamiltonian, ground_spectrum, history_state, padding_for, CompileReport, EigenMethod, DENSE_MAX_QUBITS,
};
use crate::qpip0::{qpip0_monte_carlo, BitSource, CopyStrategy, Qpip0Instance};
use crate::qpip1::{
    estimate_output_tv, iid_accept_probability, qpip1_params, sample_outcomes, ProverStrategy, Qpip1Instance,
};
use crate::qsim::{perturb, random_state, StateVector};
use crate::rng::{self, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    Compile,
    Spectrum,
    Vgs,
    Qpip1,
    Qpip0,
    Blind,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Compile => "compile",
            Command::Spectrum => "spectrum",
            Command::Vgs => "vgs",
            Command::Qpip1 => "qpip1",
            Command::Qpip0 => "qpip0",
            Command::Blind => "blind",
        }
    }
}

/// A finished command: the JSON record and an optional per-trial trace.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub record: Value,
    pub trace: Option<String>,
}

impl Output {
    /// Pretty JSON with a trailing newline.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.record).unwrap_or_default();
        s.push('\n');
        s
    }
}

fn value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Protocol(format!("serialization failed: {e}")))
}

pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<Output> {
    match command {
        Command::Compile => cmd_compile(cfg),
        Command::Spectrum => cmd_spectrum(cfg),
        Command::Vgs => cmd_vgs(cfg),
        Command::Qpip1 => cmd_qpip1(cfg),
        Command::Qpip0 => cmd_qpip0(cfg),
        Command::Blind => cmd_blind(cfg),
    }
}

struct Compiled {
    circuit_text: String,
    x: Bits,
    report: CompileReport,
}

fn compile(cfg: &ExperimentConfig) -> Result<Compiled> {
    let circuit = cfg.circuit()?;
    let x = cfg.input(&circuit)?;
    let report = compile_hamiltonian(&circuit, &x, cfg.epsilon(), cfg.padding, cfg.compile_options())?;
    Ok(Compiled { circuit_text: circuit_to_text(&circuit), x, report })
}

fn header(command: Command, cfg: &ExperimentConfig, c: &Compiled) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(command.name()));
    m.insert("circuit".into(), json!(c.circuit_text));
    m.insert("x".into(), json!(c.x.to_string()));
    m.insert("epsilon".into(), json!(cfg.epsilon()));
    m.insert("padding".into(), json!(c.report.padding));
    m.insert("t_padded".into(), json!(c.report.t_padded));
    m.insert("qubits".into(), json!(c.report.qubits));
    m
}

pub fn cmd_compile(cfg: &ExperimentConfig) -> Result<Output> {
    let c = compile(cfg)?;
    let mut m = header(Command::Compile, cfg, &c);
    m.insert("report".into(), value(&c.report)?);
    Ok(Output { record: Value::Object(m), trace: None })
}

pub fn cmd_spectrum(cfg: &ExperimentConfig) -> Result<Output> {
    let c = compile(cfg)?;
    let h = &c.report.hamiltonian;
    let k = cfg.spectrum.k.unwrap_or(4);
    let history = history_state(&c.report.circuit_padded, &c.x)?;
    let spec = ground_spectrum(h, k, cfg.spectrum.method, Some(&history))?;
    let mut m = header(Command::Spectrum, cfg, &c);
    m.insert("spectrum".into(), value(&spec)?);
    if cfg.spectrum.cross_check {
        let other = if spec.method == EigenMethod::Dense { EigenMethod::Iterative } else { EigenMethod::Dense };
        if other == EigenMethod::Dense && h.qubits() > DENSE_MAX_QUBITS {
            return Err(Error::TooManyQubits { qubits: h.qubits(), cap: DENSE_MAX_QUBITS });
        }
        let alt = ground_spectrum(h, k, other, None)?;
        let diff = spec.eigenvalues.iter().zip(&alt.eigenvalues).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        m.insert("cross_check".into(), json!({ "method": other, "eigenvalues": alt.eigenvalues, "max_abs_diff": diff }));
    }
    Ok(Output { record: Value::Object(m), trace: None })
}

pub fn cmd_vgs(cfg: &ExperimentConfig) -> Result<Output> {
    let seed = cfg.seed()?;
    let trials = cfg.trials(10_000);
    let c = compile(cfg)?;
    let h = &c.report.hamiltonian;
    let history = history_state(&c.report.circuit_padded, &c.x)?;
    let state = match cfg.vgs.state {
        VgsState::History => history.clone(),
        VgsState::Perturbed => {
            let delta = cfg.vgs.perturbation.unwrap_or(0.1);
            perturb(&history, delta, &mut rng::stream(seed, Stream::Harness))?
        }
    };
    let energy = h.expectation(&state)?;
    let stats = vgs_monte_carlo(h, &state, trials, seed)?;
    let exact = if state.qubits() <= EXACT_MAX_QUBITS { Some(vgs_accept_prob_exact(h, &state)?) } else { None };
    let mut m = header(Command::Vgs, cfg, &c);
    m.insert("state".into(), json!(format!("{:?}", cfg.vgs.state).to_lowercase()));
    m.insert("energy".into(), json!(energy));
    m.insert("alpha_l1".into(), json!(h.alpha_l1()));
    m.insert("accept_analytic".into(), json!(vgs_accept_prob_analytic(h, &state)?));
    m.insert("accept_exact".into(), json!(exact));
    m.insert("accept_mixed".into(), json!(vgs_accept_prob_mixed(h)?));
    m.insert("closeness_bound".into(), json!(closeness_bound(energy.max(0.0))?));
    m.insert("trace_distance_to_history".into(), json!(trace_distance_pure(&state, &history)?));
    m.insert("monte_carlo".into(), value(&stats)?);
    m.insert("seed".into(), json!(seed));
    m.insert("trials".into(), json!(trials));
    let mut trace = String::from("trial,term,r,verdict\n");
    for i in 0..trials as u64 {
        let round = vgs_round(h, &state, &mut rng::trial(seed, i))?;
        let _ = writeln!(trace, "{i},{},{},{:?}", round.term_index, round.r, round.verdict);
    }
    Ok(Output { record: Value::Object(m), trace: Some(trace) })
}

pub fn cmd_qpip1(cfg: &ExperimentConfig) -> Result<Output> {
    let seed = cfg.seed()?;
    let trials = cfg.trials(1000);
    let circuit = cfg.circuit()?;
    let x = cfg.input(&circuit)?;
    let eps = cfg.epsilon();
    let padding = match cfg.padding {
        Some(p) => p,
        None => padding_for(circuit.len(), eps)?,
    };
    let q = &cfg.qpip1;
    let report = compile_hamiltonian(&circuit, &x, eps, Some(padding), cfg.compile_options())?;
    let mut overrides = cfg.qpip1_overrides();
    overrides.padding = Some(padding);
    let params = qpip1_params(circuit.len(), q.lambda, eps, q.scale_mode, &overrides, Some(report.alpha_l1))
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!("qpip1"));
    m.insert("circuit".into(), json!(circuit_to_text(&circuit)));
    m.insert("x".into(), json!(x.to_string()));
    m.insert("epsilon".into(), json!(eps));
    m.insert("params".into(), value(&params)?);
    m.insert("seed".into(), json!(seed));
    m.insert("trials".into(), json!(trials));
    if let Err(e) = params.instantiable() {
        m.insert("runnable".into(), json!(false));
        m.insert("reason".into(), json!(e.to_string()));
        return Ok(Output { record: Value::Object(m), trace: None });
    }
    let inst = Qpip1Instance::new(&circuit, &x, params.clone(), cfg.compile_options())?;
    let mut hrng = rng::stream(seed, Stream::Harness);
    let strategy = match q.strategy {
        Qpip1Strategy::Honest => ProverStrategy::Honest,
        Qpip1Strategy::Zero => ProverStrategy::ProductStates(vec![StateVector::zero(inst.qubits())?; inst.copies]),
        Qpip1Strategy::Random => ProverStrategy::ProductStates(
            (0..inst.copies).map(|_| random_state(inst.qubits(), &mut hrng)).collect::<Result<_>>()?,
        ),
    };
    let prover = inst.prepare(&strategy)?;
    let est = estimate_output_tv(&inst, &prover, trials, seed)?;
    let honest_copy = inst.copy_stats(&inst.history)?.accept;
    m.insert("runnable".into(), json!(true));
    m.insert("strategy".into(), json!(strategy.name()));
    m.insert("t_padded".into(), json!(inst.report.t_padded));
    m.insert("qubits".into(), json!(inst.qubits()));
    m.insert("threshold".into(), json!(inst.threshold()));
    m.insert("honest_copy_accept".into(), json!(honest_copy));
    m.insert("honest_accept_exact".into(), json!(iid_accept_probability(inst.tested, params.kappa, honest_copy)));
    m.insert("estimate".into(), value(&est)?);
    let mut trace = String::from("trial,d,z\n");
    for (i, o) in sample_outcomes(&inst, &prover, trials, seed)?.iter().enumerate() {
        let _ = writeln!(trace, "{i},{:?},{}", o.verdict(), o.sample().map(Bits::to_string).unwrap_or_default());
    }
    Ok(Output { record: Value::Object(m), trace: Some(trace) })
}

pub fn cmd_qpip0(cfg: &ExperimentConfig) -> Result<Output> {
    let seed = cfg.seed()?;
    let trials = cfg.trials(1000);
    let circuit = cfg.circuit()?;
    let x = cfg.input(&circuit)?;
    let inst = Qpip0Instance::new(&circuit, &x, cfg.epsilon(), cfg.padding, cfg.compile_options())?;
    let q = &cfg.qpip0;
    let copies = q.copies.unwrap_or(4);
    let source = match q.bits.as_deref() {
        None | Some("uniform") => BitSource::Uniform,
        Some(z) => BitSource::Fixed(inst.embed_outputs(&z.parse().map_err(|e: Error| Error::Config(e.to_string()))?)?),
    };
    let broken = CopyStrategy::broken(q.test_pass_prob.unwrap_or(0.0), source);
    let position = q.position.unwrap_or(0);
    if position >= copies {
        return Err(Error::Config(format!("position {position} outside {copies} copies")));
    }
    let mut strategies = vec![inst.honest(); copies];
    match q.strategy {
        Qpip0Strategy::Honest => {}
        Qpip0Strategy::OneBreak => strategies[position] = broken.clone(),
        Qpip0Strategy::AllBreak => strategies = vec![broken.clone(); copies],
        Qpip0Strategy::OneAbort => strategies[position] = CopyStrategy::Abort,
    }
    let mut m = header(
        Command::Qpip0,
        cfg,
        &Compiled { circuit_text: circuit_to_text(&circuit), x: x.clone(), report: inst.report.clone() },
    );
    m.insert("strategy".into(), json!(format!("{:?}", q.strategy)));
    m.insert("binding_model".into(), json!(q.strategy != Qpip0Strategy::AllBreak));
    m.insert("seed".into(), json!(seed));
    m.insert("trials".into(), json!(trials));
    let mut trace = String::new();
    if q.naive {
        let strategy = &strategies[position];
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        trace.push_str("trial,c,term,d,z\n");
        for i in 0..trials as u64 {
            let o = inst.run_naive(strategy, &mut rng::trial(seed, i))?;
            *counts.entry(format!("c{}_{:?}", o.c.bit(), o.d)).or_default() += 1;
            let z = o.z.as_ref().map(Bits::to_string).unwrap_or_default();
            let _ = writeln!(trace, "{i},{},{},{:?},{z}", o.c.bit(), o.term_index, o.d);
        }
        m.insert("protocol".into(), json!("naive"));
        m.insert("counts".into(), json!(counts));
    } else {
        let (stats, runs) = qpip0_monte_carlo(&inst, &strategies, trials, seed)?;
        trace.push_str("trial,r,d,z\n");
        for (i, run) in runs.iter().enumerate() {
            let z = run.outcome.sample().map(Bits::to_string).unwrap_or_default();
            let _ = writeln!(trace, "{i},{},{:?},{z}", run.r, run.outcome.verdict());
        }
        m.insert("protocol".into(), json!("m-fold"));
        m.insert("stats".into(), value(&stats)?);
    }
    Ok(Output { record: Value::Object(m), trace: Some(trace) })
}

fn scheme_factory(name: SchemeName) -> impl Fn() -> Rc<dyn QheScheme> {
    move || -> Rc<dyn QheScheme> {
        match name {
            SchemeName::Transparent => Rc::new(transparent_qhe()),
            SchemeName::Otp => Rc::new(otp_qhe()),
            SchemeName::OtpReusing => Rc::new(otp_qhe_reusing()),
        }
    }
}

pub fn cmd_blind(cfg: &ExperimentConfig) -> Result<Output> {
    let seed = cfg.seed()?;
    let b = &cfg.blind;
    let (source, x): (Rc<dyn SourceProtocol>, Bits) = match b.protocol {
        BlindProtocolName::Echo | BlindProtocolName::Chain => {
            let x = cfg.x.clone().ok_or_else(|| Error::Config("blind protocols need `x`".into()))?;
            let p: Rc<dyn SourceProtocol> = if b.protocol == BlindProtocolName::Echo {
                Rc::new(EchoProtocol::new(x.len()))
            } else {
                Rc::new(ChainProtocol::new(x.len(), b.rounds.unwrap_or(3)))
            };
            (p, x)
        }
        BlindProtocolName::Qpip0 => {
            let circuit = cfg.circuit()?;
            let x = cfg.input(&circuit)?;
            let inst = Qpip0Instance::new(&circuit, &x, cfg.epsilon(), cfg.padding, cfg.compile_options())?;
            (Rc::new(Qpip0Protocol::honest(Arc::new(inst), b.copies.unwrap_or(4))?), x)
        }
    };
    let factory = scheme_factory(b.scheme);
    let adversary = b.adversary.unwrap_or(AdversaryKind::Honest);
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!("blind"));
    m.insert("protocol".into(), json!(source.spec().name));
    m.insert("scheme".into(), json!(factory().name()));
    m.insert("x".into(), json!(x.to_string()));
    m.insert("seed".into(), json!(seed));
    let mut trace = None;
    match b.experiment {
        BlindExperiment::Run => {
            let blind = compile_blind(source.clone(), factory())?;
            let mut prover = blind_adversary(adversary, &blind, seed);
            let (t, out) = run_protocol(&blind, &x, prover.as_mut(), seed)?;
            m.insert("adversary".into(), json!(adversary));
            m.insert("rounds".into(), json!(t.rounds()));
            m.insert("source_rounds".into(), json!(source.spec().rounds));
            m.insert("output".into(), json!(hex::encode(&out)));
            m.insert("transcript".into(), value(&t)?);
            trace = Some(t.to_jsonl());
        }
        BlindExperiment::Simulation => {
            let trials = cfg.trials(1000);
            let kinds: Vec<AdversaryKind> = match b.adversary {
                Some(k) => vec![k],
                None => AdversaryKind::ALL.to_vec(),
            };
            let stats = kinds
                .into_iter()
                .map(|k| simulation_check(source.clone(), &factory, k, &x, seed, trials))
                .collect::<Result<Vec<_>>>()?;
            m.insert("trials".into(), json!(trials));
            m.insert("simulation".into(), value(&stats)?);
        }
        BlindExperiment::Blindness => {
            let trials = cfg.trials(10_000);
            let stats = blindness_experiment(source.clone(), &factory, adversary, &x, trials, seed)?;
            m.insert("trials".into(), json!(trials));
            m.insert("blindness".into(), value(&stats)?);
        }
        BlindExperiment::Fuzz => {
            let trials = cfg.trials(10_000);
            let stats = fuzz_experiment(source.clone(), &factory, &x, trials, seed)?;
            m.insert("trials".into(), json!(trials));
            m.insert("fuzz".into(), value(&stats)?);
        }
    }
    Ok(Output { record: Value::Object(m), trace })
}
