//! Simulation, blindness and robustness harnesses for compiled protocols.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::rc::Rc;

use serde::Serialize;

use super::adversary::{blind_adversary, AdversaryKind};
use super::compiler::{compile_blind, simulate_pstar};
use super::protocol::{run_protocol, unframe, SourceProtocol, Transcript};
use super::qhe::QheScheme;
use crate::bits::Bits;
use crate::error::Result;
use crate::rng;

/// Builds a fresh scheme instance per execution.
pub type SchemeFactory<'a> = &'a dyn Fn() -> Rc<dyn QheScheme>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationStats {
    pub protocol: String,
    pub scheme: String,
    pub adversary: AdversaryKind,
    pub runs: usize,
    /// Seeds whose outputs differ between the two experiments.
    pub mismatches: usize,
    /// Seeds where the adversary saw different messages.
    pub view_mismatches: usize,
    pub source_rounds: usize,
    pub compiled_rounds: usize,
    /// Distinct outputs observed, hex encoded, with counts.
    pub outputs: BTreeMap<String, usize>,
    pub first_seed: u64,
}

/// Runs, for every seed, the adversary against the compiled verifier and
/// the simulated direct prover against the source verifier, and compares
/// outputs and adversary views.
pub fn simulation_check(
    source: Rc<dyn SourceProtocol>,
    scheme: SchemeFactory,
    kind: AdversaryKind,
    x: &Bits,
    first_seed: u64,
    runs: usize,
) -> Result<SimulationStats> {
    let mut stats = SimulationStats {
        protocol: source.spec().name.clone(),
        scheme: scheme().name().into(),
        adversary: kind,
        runs,
        mismatches: 0,
        view_mismatches: 0,
        source_rounds: source.spec().rounds,
        compiled_rounds: 0,
        outputs: BTreeMap::new(),
        first_seed,
    };
    for seed in first_seed..first_seed + runs as u64 {
        let blind = compile_blind(source.clone(), scheme())?;
        let mut adversary = blind_adversary(kind, &blind, seed);
        let (compiled, out) = run_protocol(&blind, x, adversary.as_mut(), seed)?;

        let blind = compile_blind(source.clone(), scheme())?;
        let mut pstar = simulate_pstar(&blind, blind_adversary(kind, &blind, seed), x, seed);
        let (_, direct) = run_protocol(source.as_ref(), x, &mut pstar, seed)?;
        if let Some(e) = pstar.failure() {
            return Err(e.clone());
        }

        stats.compiled_rounds = stats.compiled_rounds.max(compiled.rounds());
        stats.mismatches += (out != direct) as usize;
        let view: Vec<&[u8]> = (1..=compiled.rounds()).filter_map(|r| compiled.verifier_message(r)).collect();
        stats.view_mismatches += (view != pstar.view().iter().map(Vec::as_slice).collect::<Vec<_>>()) as usize;
        *stats.outputs.entry(hex::encode(&out)).or_default() += 1;
    }
    Ok(stats)
}

/// The distinguisher: low bit of the last byte of the encrypted input in
/// the first verifier message.
pub fn input_bit_distinguisher(transcript: &Transcript) -> bool {
    transcript
        .verifier_message(1)
        .and_then(unframe)
        .and_then(|f| f.get(1).and_then(|ct| ct.last().copied()))
        .is_some_and(|b| b & 1 == 1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlindnessStats {
    pub protocol: String,
    pub scheme: String,
    pub adversary: AdversaryKind,
    pub trials: usize,
    pub x: Bits,
    /// Rate at which the distinguisher fires on transcripts for `x`.
    pub rate_x: f64,
    /// Rate on transcripts for the all-zero input.
    pub rate_zero: f64,
    pub advantage: f64,
    pub sigma: f64,
    pub seed: u64,
}

/// Distinguishing advantage between transcripts on `x` and on `0^|x|`
/// over `trials` independent executions of each.
pub fn blindness_experiment(
    source: Rc<dyn SourceProtocol>,
    scheme: SchemeFactory,
    kind: AdversaryKind,
    x: &Bits,
    trials: usize,
    seed: u64,
) -> Result<BlindnessStats> {
    let zero = Bits::zeros(x.len());
    let mut hits = [0usize; 2];
    for i in 0..trials as u64 {
        for (j, input) in [x, &zero].into_iter().enumerate() {
            let run_seed = rng::trial_seed(seed, 2 * i + j as u64);
            let blind = compile_blind(source.clone(), scheme())?;
            let mut adversary = blind_adversary(kind, &blind, run_seed);
            let (t, _) = run_protocol(&blind, input, adversary.as_mut(), run_seed)?;
            hits[j] += input_bit_distinguisher(&t) as usize;
        }
    }
    let n = trials.max(1) as f64;
    let (px, p0) = (hits[0] as f64 / n, hits[1] as f64 / n);
    Ok(BlindnessStats {
        protocol: source.spec().name.clone(),
        scheme: scheme().name().into(),
        adversary: kind,
        trials,
        x: x.clone(),
        rate_x: px,
        rate_zero: p0,
        advantage: px - p0,
        sigma: (px * (1.0 - px) / n + p0 * (1.0 - p0) / n).sqrt(),
        seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FuzzStats {
    pub protocol: String,
    pub scheme: String,
    pub runs: usize,
    pub completed: usize,
    pub errors: usize,
    pub panics: usize,
    /// Runs where the verifier replaced at least one prover message.
    pub substituted: usize,
    /// First output byte (the verdict for sampling protocols) with counts.
    pub verdicts: BTreeMap<u8, usize>,
    pub seed: u64,
}

/// Runs the corrupting adversary against the compiled verifier.
pub fn fuzz_experiment(
    source: Rc<dyn SourceProtocol>,
    scheme: SchemeFactory,
    x: &Bits,
    runs: usize,
    seed: u64,
) -> Result<FuzzStats> {
    let mut stats = FuzzStats {
        protocol: source.spec().name.clone(),
        scheme: scheme().name().into(),
        runs,
        completed: 0,
        errors: 0,
        panics: 0,
        substituted: 0,
        verdicts: BTreeMap::new(),
        seed,
    };
    for i in 0..runs as u64 {
        let run_seed = rng::trial_seed(seed, i);
        let blind = compile_blind(source.clone(), scheme())?;
        let result = catch_unwind(AssertUnwindSafe(|| {
            let mut adversary = blind_adversary(AdversaryKind::Fuzz, &blind, run_seed);
            run_protocol(&blind, x, adversary.as_mut(), run_seed)
        }));
        match result {
            Ok(Ok((t, out))) => {
                stats.completed += 1;
                stats.substituted += (t.substitutions > 0) as usize;
                *stats.verdicts.entry(out.first().copied().unwrap_or(0)).or_default() += 1;
            }
            Ok(Err(_)) => stats.errors += 1,
            Err(_) => stats.panics += 1,
        }
    }
    Ok(stats)
}
