//! The cut-and-choose sampling protocol with a single-qubit-measuring
//! verifier.
//!
//! The prover sends `M` copies of the history state of the padded circuit.
//! The verifier picks a uniform test set `I` of size `m` and an output copy
//! `k` outside it, runs the energy test on every copy in `I`, and measures
//! the data register of copy `k` in the Z basis. It accepts the output
//! wires of copy `k` iff the number of passed tests `Y` exceeds
//! `m/2 - kappa m`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigUint;
use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::bits::Bits;
use crate::energy::{term_accept_probabilities, term_basis};
use crate::error::{Error, Result};
use crate::hamiltonian::{compile_hamiltonian, history_state, padding_for, CompileOptions, CompileReport};
use crate::outcome::SampleOutcome;
use crate::qsim::{output_distribution, sample_index, tv_distance, BasisChoice, Circuit, Distribution, StateVector};
use crate::rng;
use crate::stats::{binomial_tail_above, tv_confidence_radius, CI_DELTA};

/// Largest copy count a run will instantiate.
pub const MAX_COPIES: usize = 4096;

/// Largest number of copies a joint (entangled) strategy may span.
pub const MAX_JOINT_COPIES: usize = 3;

/// Largest `C(M, m) (M - m)` the exact oracle will enumerate.
pub const MAX_ENUMERATION: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleMode {
    /// The asymptotic parameters of the soundness proof.
    Paper,
    /// Every parameter given explicitly.
    #[default]
    Desk,
}

fn serialize_decimal<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_str_radix(10))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Qpip1Params {
    /// `M`, the number of copies.
    #[serde(serialize_with = "serialize_decimal")]
    pub copies: BigUint,
    /// `m`, the number of tested copies.
    #[serde(serialize_with = "serialize_decimal")]
    pub tested: BigUint,
    pub kappa: f64,
    pub padding: usize,
    pub scale_mode: ScaleMode,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Qpip1Overrides {
    pub copies: Option<usize>,
    pub tested: Option<usize>,
    pub kappa: Option<f64>,
    pub padding: Option<usize>,
}

/// `epsilon` as an exact dyadic fraction `num / 2^shift`.
fn dyadic(epsilon: f64) -> (BigUint, u32) {
    let bits = epsilon.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut mant, mut shift) = if exp == 0 { (frac, 1074) } else { (frac | (1u64 << 52), 1075 - exp) };
    while mant % 2 == 0 && shift > 0 {
        mant /= 2;
        shift -= 1;
    }
    (BigUint::from(mant), shift as u32)
}

/// `ceil(coeff / epsilon^power)` computed exactly.
fn ceil_over_power(coeff: BigUint, epsilon: f64, power: u32) -> BigUint {
    let (num, shift) = dyadic(epsilon);
    let numer = coeff << (shift as usize * power as usize);
    let denom = num.pow(power);
    (numer + &denom - 1u32) / denom
}

/// Protocol parameters. The asymptotic mode derives `M`, `m`, `kappa` and the padding
/// from `T`, `lambda` and `epsilon` and needs `sum |alpha|` of the compiled
/// Hamiltonian; desk mode takes all four from `overrides`.
pub fn qpip1_params(
    t: usize,
    lambda: u64,
    epsilon: f64,
    mode: ScaleMode,
    overrides: &Qpip1Overrides,
    alpha_l1: Option<f64>,
) -> Result<Qpip1Params> {
    let params = match mode {
        ScaleMode::Paper => {
            let alpha_l1 = alpha_l1
                .ok_or_else(|| Error::InvalidArgument("asymptotic mode needs sum |alpha| of the hamiltonian".into()))?;
            let padding = padding_for(t, epsilon)?;
            let tb = BigUint::from(t as u64);
            let lb = BigUint::from(lambda);
            Qpip1Params {
                copies: ceil_over_power(BigUint::from(649u32) * tb.pow(41) * &lb * &lb, epsilon, 51),
                tested: ceil_over_power(tb.pow(20) * &lb, epsilon, 24),
                kappa: epsilon * epsilon / (192.0 * alpha_l1),
                padding: overrides.padding.unwrap_or(padding),
                scale_mode: mode,
            }
        }
        ScaleMode::Desk => {
            let missing = |f: &str| Error::InvalidArgument(format!("desk mode requires `{f}`"));
            Qpip1Params {
                copies: BigUint::from(overrides.copies.ok_or_else(|| missing("copies"))?),
                tested: BigUint::from(overrides.tested.ok_or_else(|| missing("tested"))?),
                kappa: overrides.kappa.ok_or_else(|| missing("kappa"))?,
                padding: overrides.padding.ok_or_else(|| missing("padding"))?,
                scale_mode: mode,
            }
        }
    };
    if params.tested >= params.copies {
        return Err(Error::InvalidArgument(format!(
            "tested copies {} must be fewer than copies {}",
            params.tested, params.copies
        )));
    }
    if params.kappa.is_nan() || params.kappa <= 0.0 {
        return Err(Error::InvalidArgument(format!("kappa {} must be positive", params.kappa)));
    }
    Ok(params)
}

impl Qpip1Params {
    /// `(M, m)` as machine integers, if they fit the run budget.
    pub fn instantiable(&self) -> Result<(usize, usize)> {
        let to_usize = |v: &BigUint| -> Option<usize> { v.to_string().parse::<usize>().ok() };
        match (to_usize(&self.copies), to_usize(&self.tested)) {
            (Some(big_m), Some(m)) if big_m <= MAX_COPIES => Ok((big_m, m)),
            _ => Err(Error::InvalidArgument(format!(
                "{} copies exceed the run budget of {MAX_COPIES}",
                self.copies
            ))),
        }
    }
}

/// Acceptance threshold `m/2 - kappa m`: accept iff `Y` is strictly above.
pub fn threshold(tested: usize, kappa: f64) -> f64 {
    tested as f64 / 2.0 - kappa * tested as f64
}

/// The mass of the history state on clock times before the last gate of
/// the unpadded circuit, `1 - (padding + 1)/(T' + 1)`.
pub fn eps_pad(padding: usize, t_padded: usize) -> f64 {
    1.0 - (padding as f64 + 1.0) / (t_padded as f64 + 1.0)
}

/// `Pr[Bin(m, p) > m/2 - kappa m]`.
pub fn iid_accept_probability(tested: usize, kappa: f64, p: f64) -> f64 {
    binomial_tail_above(tested as u64, p, threshold(tested, kappa))
}

#[derive(Clone, Debug)]
pub enum ProverStrategy {
    /// Every copy is the history state.
    Honest,
    /// An arbitrary state per copy.
    ProductStates(Vec<StateVector>),
    /// One state spanning the listed copies (copy `copies[j]` on qubits
    /// `[j s, (j+1) s)`); every other copy is honest.
    JointState { copies: Vec<usize>, state: StateVector },
}

impl ProverStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            ProverStrategy::Honest => "honest",
            ProverStrategy::ProductStates(_) => "product-states",
            ProverStrategy::JointState { .. } => "joint-state",
        }
    }
}

/// Born-rule statistics of one copy under the verifier's measurements.
#[derive(Clone, Debug)]
pub struct CopyStats {
    /// Acceptance probability of each term when it is sampled.
    pub accept_by_term: Vec<f64>,
    /// Acceptance probability of one energy test.
    pub accept: f64,
    /// Distribution of the output wires under a Z measurement.
    pub output: Distribution,
}

#[derive(Clone, Debug)]
enum CopyModel {
    Product(Arc<CopyStats>),
    Joint,
}

/// A strategy bound to an instance, with per-copy statistics precomputed.
#[derive(Clone, Debug)]
pub struct PreparedProver {
    name: &'static str,
    copies: Vec<CopyModel>,
    joint: Option<(Vec<usize>, StateVector)>,
}

impl PreparedProver {
    pub fn name(&self) -> &'static str {
        self.name
    }

    /// Per-copy statistics, when every copy is a product state.
    pub fn product_stats(&self) -> Option<Vec<Arc<CopyStats>>> {
        self.copies
            .iter()
            .map(|c| match c {
                CopyModel::Product(s) => Some(s.clone()),
                CopyModel::Joint => None,
            })
            .collect()
    }
}

/// A compiled circuit and input together with protocol parameters.
#[derive(Clone, Debug)]
pub struct Qpip1Instance {
    pub circuit: Circuit,
    pub x: Bits,
    pub params: Qpip1Params,
    pub report: CompileReport,
    pub history: StateVector,
    pub copies: usize,
    pub tested: usize,
    term_weights: Vec<f64>,
}

impl Qpip1Instance {
    pub fn new(circuit: &Circuit, x: &Bits, params: Qpip1Params, options: CompileOptions) -> Result<Self> {
        let (copies, tested) = params.instantiable()?;
        let report = compile_hamiltonian(circuit, x, 0.5, Some(params.padding), options)?;
        let history = history_state(&report.circuit_padded, x)?;
        let term_weights = report.hamiltonian.terms().iter().map(|(a, _)| a.abs()).collect();
        Ok(Qpip1Instance { circuit: circuit.clone(), x: x.clone(), params, report, history, copies, tested, term_weights })
    }

    /// Qubits per copy.
    pub fn qubits(&self) -> usize {
        self.report.qubits
    }

    pub fn threshold(&self) -> f64 {
        threshold(self.tested, self.params.kappa)
    }

    pub fn eps_pad(&self) -> f64 {
        eps_pad(self.params.padding, self.report.t_padded)
    }

    pub fn ideal(&self) -> Result<Distribution> {
        ideal_sampler(&self.circuit, &self.x)
    }

    pub fn copy_stats(&self, state: &StateVector) -> Result<CopyStats> {
        let h = &self.report.hamiltonian;
        let accept_by_term = term_accept_probabilities(h, state)?;
        let accept =
            accept_by_term.iter().zip(&self.term_weights).map(|(p, w)| p * w).sum::<f64>() / h.alpha_l1();
        let output = state.marginal(self.circuit.outputs())?;
        Ok(CopyStats { accept_by_term, accept, output })
    }

    pub fn prepare(&self, strategy: &ProverStrategy) -> Result<PreparedProver> {
        let s = self.qubits();
        let honest = || -> Result<Arc<CopyStats>> { Ok(Arc::new(self.copy_stats(&self.history)?)) };
        match strategy {
            ProverStrategy::Honest => {
                let stats = honest()?;
                Ok(PreparedProver {
                    name: strategy.name(),
                    copies: vec![CopyModel::Product(stats); self.copies],
                    joint: None,
                })
            }
            ProverStrategy::ProductStates(states) => {
                if states.len() != self.copies {
                    return Err(Error::LengthMismatch { expected: self.copies, actual: states.len() });
                }
                let copies = states
                    .iter()
                    .map(|st| {
                        if st.qubits() != s {
                            return Err(Error::LengthMismatch { expected: s, actual: st.qubits() });
                        }
                        Ok(CopyModel::Product(Arc::new(self.copy_stats(st)?)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(PreparedProver { name: strategy.name(), copies, joint: None })
            }
            ProverStrategy::JointState { copies, state } => {
                if copies.is_empty() || copies.len() > MAX_JOINT_COPIES {
                    return Err(Error::InvalidArgument(format!(
                        "joint state must span 1..={MAX_JOINT_COPIES} copies"
                    )));
                }
                if state.qubits() != copies.len() * s {
                    return Err(Error::LengthMismatch { expected: copies.len() * s, actual: state.qubits() });
                }
                let stats = honest()?;
                let mut models = vec![CopyModel::Product(stats); self.copies];
                for (position, &c) in copies.iter().enumerate() {
                    if c >= self.copies || copies[..position].contains(&c) {
                        return Err(Error::InvalidArgument(format!("bad joint copy index {c}")));
                    }
                    models[c] = CopyModel::Joint;
                }
                Ok(PreparedProver { name: strategy.name(), copies: models, joint: Some((copies.clone(), state.clone())) })
            }
        }
    }

    /// The verifier's choice: test set `I` (sorted) and output copy `k`.
    pub fn choose<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<usize>, usize) {
        let mut tested = index::sample(rng, self.copies, self.tested).into_vec();
        tested.sort_unstable();
        let mut j = rng.random_range(0..self.copies - self.tested);
        let mut k = 0;
        for c in 0..self.copies {
            if tested.binary_search(&c).is_err() {
                if j == 0 {
                    k = c;
                    break;
                }
                j -= 1;
            }
        }
        (tested, k)
    }

    /// One protocol execution.
    pub fn run<R: Rng + ?Sized>(&self, prover: &PreparedProver, rng: &mut R) -> Result<SampleOutcome> {
        let (tested, k) = self.choose(rng);
        let terms: Vec<usize> = tested.iter().map(|_| sample_index(&self.term_weights, rng)).collect();
        let mut passed = 0usize;
        for (&i, &term) in tested.iter().zip(&terms) {
            if let CopyModel::Product(stats) = &prover.copies[i] {
                passed += (rng.random::<f64>() < stats.accept_by_term[term]) as usize;
            }
        }
        let mut z = match &prover.copies[k] {
            CopyModel::Product(stats) => Some(stats.output.sample(rng)),
            CopyModel::Joint => None,
        };
        if let Some((group, state)) = &prover.joint {
            let (joint_passed, joint_z) = self.measure_joint(group, state, &tested, &terms, k, rng)?;
            passed += joint_passed;
            if joint_z.is_some() {
                z = joint_z;
            }
        }
        let z = z.ok_or_else(|| Error::Protocol("output copy was not measured".into()))?;
        Ok(if passed as f64 > self.threshold() { SampleOutcome::Acc(z) } else { SampleOutcome::Rej })
    }

    /// Measures every copy of a joint group in the role the verifier
    /// assigned it: tested copies in their term's basis, the output copy in
    /// Z on the output wires, others not at all.
    fn measure_joint<R: Rng + ?Sized>(
        &self,
        group: &[usize],
        state: &StateVector,
        tested: &[usize],
        terms: &[usize],
        k: usize,
        rng: &mut R,
    ) -> Result<(usize, Option<Bits>)> {
        let s = self.qubits();
        let h = &self.report.hamiltonian;
        let mut basis = Vec::with_capacity(group.len() * s);
        let mut wires = Vec::new();
        let mut roles = Vec::new();
        for (position, &c) in group.iter().enumerate() {
            let offset = position * s;
            if let Ok(idx) = tested.binary_search(&c) {
                let (alpha, term) = h.terms()[terms[idx]];
                basis.extend(term_basis(&term, s).0.iter());
                let start = wires.len();
                wires.extend((0..s).filter(|q| term.support() >> q & 1 == 1).map(|q| q + offset));
                roles.push((Some(alpha), start..wires.len()));
            } else {
                basis.extend(std::iter::repeat_n(true, s));
                if c == k {
                    let start = wires.len();
                    wires.extend(self.circuit.outputs().iter().map(|q| q + offset));
                    roles.push((None, start..wires.len()));
                }
            }
        }
        let rotated = state.rotated_to(&BasisChoice(Bits::new(basis)))?;
        let bits = rotated.marginal(&wires)?.sample(rng);
        let mut passed = 0;
        let mut z = None;
        for (alpha, range) in roles {
            let slice = Bits::new(bits.as_slice()[range].to_vec());
            match alpha {
                Some(alpha) => {
                    let r: i8 = if slice.count_ones() % 2 == 1 { -1 } else { 1 };
                    passed += crate::energy::verdict_for(alpha, r).is_acc() as usize;
                }
                None => z = Some(slice),
            }
        }
        Ok((passed, z))
    }

    /// Exact joint distribution of `(d, z)` for a product-state prover, by
    /// enumerating every test set and output copy and summing over the
    /// test outcomes.
    pub fn exact_outcomes(&self, prover: &PreparedProver) -> Result<BTreeMap<SampleOutcome, f64>> {
        let stats = prover
            .product_stats()
            .ok_or_else(|| Error::InvalidArgument("exact oracle needs a product-state prover".into()))?;
        let (big_m, m) = (self.copies, self.tested);
        let subsets = (0..m).fold(1u64, |acc, i| acc * (big_m - i) as u64 / (i + 1) as u64);
        if subsets.saturating_mul((big_m - m) as u64) > MAX_ENUMERATION {
            return Err(Error::InvalidArgument("too many test sets to enumerate".into()));
        }
        let mut out: BTreeMap<SampleOutcome, f64> = BTreeMap::new();
        let weight = 1.0 / (subsets as f64 * (big_m - m) as f64);
        for tested in combinations(big_m, m) {
            // Distribution of Y as a Poisson binomial over the tested copies.
            let mut y = vec![1.0];
            for &i in &tested {
                let p = stats[i].accept;
                let mut next = vec![0.0; y.len() + 1];
                for (c, &q) in y.iter().enumerate() {
                    next[c] += q * (1.0 - p);
                    next[c + 1] += q * p;
                }
                y = next;
            }
            let accept: f64 = y.iter().enumerate().filter(|(c, _)| *c as f64 > self.threshold()).map(|(_, q)| q).sum();
            for k in (0..big_m).filter(|c| !tested.contains(c)) {
                for (z, pz) in stats[k].output.iter() {
                    *out.entry(SampleOutcome::Acc(z.clone())).or_default() += weight * accept * pz;
                }
                *out.entry(SampleOutcome::Rej).or_default() += weight * (1.0 - accept);
            }
        }
        Ok(out)
    }

    /// `Pr[k = j]` over the verifier's choice, by enumeration.
    pub fn output_copy_probability(&self, j: usize) -> f64 {
        let (big_m, m) = (self.copies, self.tested);
        let mut hits = 0u64;
        let mut total = 0u64;
        for tested in combinations(big_m, m) {
            for k in (0..big_m).filter(|c| !tested.contains(c)) {
                total += 1;
                hits += (k == j) as u64;
            }
        }
        hits as f64 / total as f64
    }
}

/// All `m`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..m).collect();
    if m > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - m {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..m {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// One execution with a freshly compiled instance.
pub fn run_qpip1<R: Rng + ?Sized>(
    strategy: &ProverStrategy,
    circuit: &Circuit,
    x: &Bits,
    params: &Qpip1Params,
    rng: &mut R,
) -> Result<SampleOutcome> {
    let instance = Qpip1Instance::new(circuit, x, params.clone(), CompileOptions::default())?;
    let prover = instance.prepare(strategy)?;
    instance.run(&prover, rng)
}

/// The ideal output distribution of the circuit on `x`.
pub fn ideal_sampler(circuit: &Circuit, x: &Bits) -> Result<Distribution> {
    output_distribution(circuit, x)
}

/// Monte Carlo comparison of the real experiment `(d, z)` with the ideal
/// one `(d, z_ideal)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TvEstimate {
    pub trials: usize,
    pub accepted: usize,
    pub accept_rate: f64,
    /// Estimated `||(d, z) - (d, z_ideal)||_TV`.
    pub tv_estimate: f64,
    /// TV distance between accepted outputs and the ideal distribution.
    pub tv_acc_conditional: f64,
    /// Confidence radius on `tv_estimate` at failure probability `CI_DELTA`.
    pub ci: f64,
    /// Confidence radius on `tv_acc_conditional`.
    pub ci_conditional: f64,
    pub eps_pad: f64,
    pub seed: u64,
}

/// Outcomes of `trials` independent executions, in trial order.
pub fn sample_outcomes(
    instance: &Qpip1Instance,
    prover: &PreparedProver,
    trials: usize,
    seed: u64,
) -> Result<Vec<SampleOutcome>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|i| instance.run(prover, &mut rng::trial(seed, i)))
        .collect()
}

pub fn estimate_output_tv(
    instance: &Qpip1Instance,
    prover: &PreparedProver,
    trials: usize,
    seed: u64,
) -> Result<TvEstimate> {
    if trials < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 trials, got {trials}")));
    }
    let outcomes = sample_outcomes(instance, prover, trials, seed)?;
    let ideal = instance.ideal()?;
    let accepted: Vec<&Bits> = outcomes.iter().filter_map(|o| o.sample()).collect();
    let accept_rate = accepted.len() as f64 / trials as f64;
    let tv_acc_conditional =
        if accepted.is_empty() { 0.0 } else { tv_distance(&Distribution::from_samples(accepted.iter().copied()), &ideal) };
    let cells = 1usize << instance.circuit.outputs().len().min(30);
    Ok(TvEstimate {
        trials,
        accepted: accepted.len(),
        accept_rate,
        tv_estimate: (accept_rate * tv_acc_conditional).clamp(0.0, 1.0),
        tv_acc_conditional,
        ci: tv_confidence_radius(cells + 1, trials, CI_DELTA),
        ci_conditional: tv_confidence_radius(cells, accepted.len(), CI_DELTA),
        eps_pad: instance.eps_pad(),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::Gate;

    fn hadamard() -> Circuit {
        Circuit::new(1, 0, vec![Gate::Hadamard(0)], vec![0]).unwrap()
    }

    fn desk(copies: usize, tested: usize, kappa: f64, padding: usize) -> Qpip1Params {
        let o = Qpip1Overrides { copies: Some(copies), tested: Some(tested), kappa: Some(kappa), padding: Some(padding) };
        qpip1_params(1, 1, 0.5, ScaleMode::Desk, &o, None).unwrap()
    }

    #[test]
    fn asymptotic_parameters() {
        let p = qpip1_params(2, 1, 0.5, ScaleMode::Paper, &Qpip1Overrides::default(), Some(100.0)).unwrap();
        assert_eq!(p.copies, BigUint::from(649u32) << 92usize);
        assert_eq!(p.tested, BigUint::from(1u32) << 44usize);
        assert_eq!(p.padding, 24);
        assert!(p.instantiable().is_err());
        let p = qpip1_params(1, 1, 0.1, ScaleMode::Paper, &Qpip1Overrides::default(), Some(100.0)).unwrap();
        assert!((p.kappa - 5.208333333333334e-7).abs() < 1e-18);
        let json = serde_json::to_value(&p).unwrap();
        assert!(json["copies"].as_str().unwrap().len() > 50);
    }

    #[test]
    fn desk_parameters() {
        let p = desk(32, 16, 0.05, 8);
        assert_eq!(p.instantiable().unwrap(), (32, 16));
        let o = Qpip1Overrides { copies: Some(4), tested: Some(4), kappa: Some(0.1), padding: Some(0) };
        assert!(qpip1_params(1, 1, 0.5, ScaleMode::Desk, &o, None).is_err());
        assert!(qpip1_params(1, 1, 0.5, ScaleMode::Desk, &Qpip1Overrides::default(), None).is_err());
    }

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(5, 0), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn honest_copy_passes_half_the_time() {
        let inst = Qpip1Instance::new(&hadamard(), &"0".parse().unwrap(), desk(4, 2, 0.1, 1), CompileOptions::default())
            .unwrap();
        let stats = inst.copy_stats(&inst.history).unwrap();
        assert!((stats.accept - 0.5).abs() < 1e-9);
        assert!((inst.output_copy_probability(3) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn exact_oracle_sums_to_one() {
        let inst = Qpip1Instance::new(&hadamard(), &"1".parse().unwrap(), desk(4, 2, 0.1, 1), CompileOptions::default())
            .unwrap();
        let prover = inst.prepare(&ProverStrategy::Honest).unwrap();
        let dist = inst.exact_outcomes(&prover).unwrap();
        assert!((dist.values().sum::<f64>() - 1.0).abs() < 1e-12);
        let accept = 1.0 - dist[&SampleOutcome::Rej];
        assert!((accept - iid_accept_probability(2, 0.1, 0.5)).abs() < 1e-12);
    }

    #[test]
    fn runs_are_seeded() {
        let inst = Qpip1Instance::new(&hadamard(), &"0".parse().unwrap(), desk(8, 4, 0.1, 1), CompileOptions::default())
            .unwrap();
        let prover = inst.prepare(&ProverStrategy::Honest).unwrap();
        let a = sample_outcomes(&inst, &prover, 200, 5).unwrap();
        assert_eq!(a, sample_outcomes(&inst, &prover, 200, 5).unwrap());
    }
}
