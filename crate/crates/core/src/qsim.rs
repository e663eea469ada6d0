//! Dense statevector simulation of Toffoli/Hadamard/Identity circuits.
//!
//! Wire `q` is bit `q` of an amplitude index (little-endian) everywhere in
//! the crate. X-basis outcomes are reported as `|+> -> 0`, `|-> -> 1`, so bit
//! `b` always corresponds to the Pauli eigenvalue `(-1)^b`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};

/// Largest register the dense simulator will allocate.
pub const MAX_QUBITS: usize = 26;

const NORM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    Hadamard(usize),
    Toffoli(usize, usize, usize),
    Identity(usize),
}

impl Gate {
    pub fn wires(&self) -> Vec<usize> {
        match *self {
            Gate::Hadamard(q) | Gate::Identity(q) => vec![q],
            Gate::Toffoli(a, b, c) => vec![a, b, c],
        }
    }

    fn check(&self, qubits: usize) -> Result<()> {
        for w in self.wires() {
            if w >= qubits {
                return Err(Error::WireOutOfRange { wire: w, qubits });
            }
        }
        if let Gate::Toffoli(a, b, c) = *self {
            if a == b || b == c || a == c {
                return Err(Error::InvalidCircuit(format!(
                    "toffoli wires must be distinct, got ({a}, {b}, {c})"
                )));
            }
        }
        Ok(())
    }
}

/// A circuit on `n` input wires followed by `m` ancilla wires.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n: usize,
    m: usize,
    gates: Vec<Gate>,
    outputs: Vec<usize>,
}

impl Circuit {
    pub fn new(n: usize, m: usize, gates: Vec<Gate>, outputs: Vec<usize>) -> Result<Self> {
        let width = n + m;
        for g in &gates {
            g.check(width)?;
        }
        for (i, &o) in outputs.iter().enumerate() {
            if o >= width {
                return Err(Error::WireOutOfRange { wire: o, qubits: width });
            }
            if outputs[..i].contains(&o) {
                return Err(Error::InvalidCircuit(format!("output wire {o} listed twice")));
            }
        }
        Ok(Circuit { n, m, gates, outputs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Data wires, `n + m`.
    pub fn width(&self) -> usize {
        self.n + self.m
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends `count` identity gates on wire 0.
    pub fn padded(&self, count: usize) -> Result<Circuit> {
        if count > 0 && self.width() == 0 {
            return Err(Error::InvalidCircuit("cannot pad a circuit with no wires".into()));
        }
        let mut gates = self.gates.clone();
        gates.extend(std::iter::repeat_n(Gate::Identity(0), count));
        Ok(Circuit { gates, ..self.clone() })
    }

    pub(crate) fn check_input(&self, x: &Bits) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, actual: x.len() });
        }
        Ok(())
    }

    /// Basis-state index of `|x, 0^m>`.
    pub(crate) fn initial_index(&self, x: &Bits) -> usize {
        x.to_index() as usize
    }
}

/// The per-qubit basis choice of an X/Z measurement: bit 0 = X, bit 1 = Z.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisChoice(pub Bits);

impl BasisChoice {
    pub fn all_z(qubits: usize) -> Self {
        BasisChoice(Bits::ones(qubits))
    }

    pub fn all_x(qubits: usize) -> Self {
        BasisChoice(Bits::zeros(qubits))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_x(&self, qubit: usize) -> bool {
        !self.0.get(qubit)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amps: Vec<Complex64>,
}

fn check_qubits(qubits: usize) -> Result<()> {
    if qubits > MAX_QUBITS {
        return Err(Error::TooManyQubits { qubits, cap: MAX_QUBITS });
    }
    Ok(())
}

impl StateVector {
    pub fn zero(qubits: usize) -> Result<Self> {
        Self::basis(qubits, 0)
    }

    /// Computational basis state `|index>`.
    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        check_qubits(qubits)?;
        let dim = 1usize << qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { qubits, amps })
    }

    /// Normalized amplitudes of length `2^qubits`.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let state = Self::from_amplitudes_unnormalized(amps)?;
        let n2 = state.norm_sqr();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(state)
    }

    /// Rescales to unit norm.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        let mut state = Self::from_amplitudes_unnormalized(amps)?;
        let norm = state.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        state.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(state)
    }

    /// Any vector of power-of-two length; used for `H|v>` and other
    /// intermediate results that are not states.
    pub fn from_amplitudes_unnormalized(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {} is not a power of two",
                amps.len()
            )));
        }
        let qubits = amps.len().trailing_zeros() as usize;
        check_qubits(qubits)?;
        Ok(StateVector { qubits, amps })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::LengthMismatch { expected: self.dim(), actual: other.dim() });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.check(self.qubits)?;
        match *gate {
            Gate::Identity(_) => {}
            Gate::Hadamard(q) => {
                let bit = 1usize << q;
                for i in 0..self.amps.len() {
                    if i & bit == 0 {
                        let (a, b) = (self.amps[i], self.amps[i | bit]);
                        self.amps[i] = (a + b) * FRAC_1_SQRT_2;
                        self.amps[i | bit] = (a - b) * FRAC_1_SQRT_2;
                    }
                }
            }
            Gate::Toffoli(a, b, c) => {
                let controls = (1usize << a) | (1usize << b);
                let target = 1usize << c;
                for i in 0..self.amps.len() {
                    if i & controls == controls && i & target == 0 {
                        self.amps.swap(i, i | target);
                    }
                }
            }
        }
        Ok(())
    }

    /// Born-rule probabilities of every basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Computational-basis distribution marginalized onto `wires` (in order).
    pub fn marginal(&self, wires: &[usize]) -> Result<Distribution> {
        for &w in wires {
            if w >= self.qubits {
                return Err(Error::WireOutOfRange { wire: w, qubits: self.qubits });
            }
        }
        let mut acc: BTreeMap<u64, f64> = BTreeMap::new();
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let key = wires
                .iter()
                .enumerate()
                .fold(0u64, |k, (j, &w)| k | ((((i >> w) & 1) as u64) << j));
            *acc.entry(key).or_default() += p;
        }
        Ok(Distribution(
            acc.into_iter().map(|(k, p)| (Bits::from_index(k, wires.len()), p)).collect(),
        ))
    }

    /// Rotates every X-basis qubit of `h` into the Z basis.
    pub fn rotated_to(&self, h: &BasisChoice) -> Result<StateVector> {
        if h.len() != self.qubits {
            return Err(Error::LengthMismatch { expected: self.qubits, actual: h.len() });
        }
        let mut rotated = self.clone();
        for q in (0..self.qubits).filter(|&q| h.is_x(q)) {
            rotated.apply_gate(&Gate::Hadamard(q))?;
        }
        Ok(rotated)
    }

    /// One sample of the destructive X/Z measurement of every qubit.
    pub fn measure_xz<R: Rng + ?Sized>(&self, h: &BasisChoice, rng: &mut R) -> Result<Bits> {
        let rotated = self.rotated_to(h)?;
        let index = sample_index(&rotated.probabilities(), rng);
        Ok(Bits::from_index(index as u64, self.qubits))
    }
}

/// Samples an index proportionally to `weights` (need not sum to one).
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last_nonzero = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_nonzero = i;
            if u < w {
                return i;
            }
            u -= w;
        }
    }
    last_nonzero
}

/// A random state with independent complex Gaussian amplitudes, which is
/// Haar distributed after normalization.
pub fn random_state<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> Result<StateVector> {
    if qubits > MAX_QUBITS {
        return Err(Error::TooManyQubits { qubits, cap: MAX_QUBITS });
    }
    let amps = (0..1usize << qubits).map(|_| gaussian(rng)).collect();
    StateVector::normalized(amps)
}

/// `state + delta * g` renormalized, with `g` a random unit vector.
pub fn perturb<R: Rng + ?Sized>(state: &StateVector, delta: f64, rng: &mut R) -> Result<StateVector> {
    let g = random_state(state.qubits(), rng)?;
    StateVector::normalized(state.amplitudes().iter().zip(g.amplitudes()).map(|(a, b)| a + b * delta).collect())
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    // Box-Muller
    let u: f64 = 1.0 - rng.random::<f64>();
    let v: f64 = rng.random::<f64>();
    let r = (-2.0 * u.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * v;
    Complex64::new(r * theta.cos(), r * theta.sin())
}

/// `new_basis_state`: `|bits>` on `qubits` wires.
pub fn new_basis_state(qubits: usize, bits: &Bits) -> Result<StateVector> {
    if bits.len() != qubits {
        return Err(Error::LengthMismatch { expected: qubits, actual: bits.len() });
    }
    StateVector::basis(qubits, bits.to_index() as usize)
}

/// `U_T ... U_1 |x, 0^m>`.
pub fn run_circuit(circuit: &Circuit, x: &Bits) -> Result<StateVector> {
    circuit.check_input(x)?;
    let mut state = StateVector::basis(circuit.width(), circuit.initial_index(x))?;
    for g in circuit.gates() {
        state.apply_gate(g)?;
    }
    Ok(state)
}

/// Exact output distribution of `circuit` on `x`, on its output wires.
pub fn output_distribution(circuit: &Circuit, x: &Bits) -> Result<Distribution> {
    run_circuit(circuit, x)?.marginal(circuit.outputs())
}

/// A finite distribution over bitstrings.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Distribution(pub BTreeMap<Bits, f64>);

impl Distribution {
    pub fn point(bits: Bits) -> Self {
        Distribution(BTreeMap::from([(bits, 1.0)]))
    }

    pub fn uniform(len: usize) -> Self {
        let p = 0.5f64.powi(len as i32);
        Distribution((0..1u64 << len).map(|i| (Bits::from_index(i, len), p)).collect())
    }

    /// Empirical distribution of a sample.
    pub fn from_samples<'a, I: IntoIterator<Item = &'a Bits>>(samples: I) -> Self {
        let mut counts: BTreeMap<Bits, f64> = BTreeMap::new();
        let mut total = 0.0;
        for s in samples {
            *counts.entry(s.clone()).or_default() += 1.0;
            total += 1.0;
        }
        if total > 0.0 {
            counts.values_mut().for_each(|c| *c /= total);
        }
        Distribution(counts)
    }

    pub fn prob(&self, bits: &Bits) -> f64 {
        self.0.get(bits).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Bits, &f64)> {
        self.0.iter()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Bits {
        let keys: Vec<&Bits> = self.0.keys().collect();
        let weights: Vec<f64> = self.0.values().copied().collect();
        keys[sample_index(&weights, rng)].clone()
    }
}

/// Total variation distance; missing keys read as zero.
pub fn tv_distance(p: &Distribution, q: &Distribution) -> f64 {
    let mut sum = 0.0;
    for (k, &pk) in &p.0 {
        sum += (pk - q.prob(k)).abs();
    }
    for (k, &qk) in &q.0 {
        if !p.0.contains_key(k) {
            sum += qk.abs();
        }
    }
    0.5 * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn b(s: &str) -> Bits {
        s.parse().unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn basis_states() {
        let s = new_basis_state(1, &b("0")).unwrap();
        assert_eq!(s.amplitudes()[0], c(1.0));
        let s = new_basis_state(2, &b("10")).unwrap();
        assert_eq!(s.amplitudes()[0b01], c(1.0));
        let s = new_basis_state(3, &b("111")).unwrap();
        assert_eq!(s.amplitudes()[7], c(1.0));
        assert!(new_basis_state(2, &b("1")).is_err());
    }

    #[test]
    fn gates_on_basis_states() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_gate(&Gate::Hadamard(0)).unwrap();
        assert!((s.amplitudes()[0] - c(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((s.amplitudes()[1] - c(FRAC_1_SQRT_2)).norm() < 1e-15);

        let mut s = new_basis_state(3, &b("110")).unwrap();
        s.apply_gate(&Gate::Toffoli(0, 1, 2)).unwrap();
        assert_eq!(s, new_basis_state(3, &b("111")).unwrap());

        let before = s.clone();
        s.apply_gate(&Gate::Identity(2)).unwrap();
        assert_eq!(s, before);

        assert!(matches!(
            s.apply_gate(&Gate::Hadamard(3)),
            Err(Error::WireOutOfRange { wire: 3, qubits: 3 })
        ));
    }

    #[test]
    fn circuit_validation() {
        assert!(Circuit::new(2, 0, vec![Gate::Toffoli(0, 0, 1)], vec![]).is_err());
        assert!(Circuit::new(1, 0, vec![Gate::Hadamard(1)], vec![]).is_err());
        assert!(Circuit::new(2, 0, vec![], vec![1, 1]).is_err());
        assert!(Circuit::new(2, 0, vec![], vec![2]).is_err());
    }

    #[test]
    fn small_circuits() {
        let empty = Circuit::new(1, 0, vec![], vec![0]).unwrap();
        assert_eq!(run_circuit(&empty, &b("1")).unwrap(), new_basis_state(1, &b("1")).unwrap());
        assert_eq!(output_distribution(&empty, &b("0")).unwrap(), Distribution::point(b("0")));

        let h = Circuit::new(1, 0, vec![Gate::Hadamard(0)], vec![0]).unwrap();
        let d = output_distribution(&h, &b("0")).unwrap();
        assert!((d.prob(&b("0")) - 0.5).abs() < 1e-15);
        assert!((d.prob(&b("1")) - 0.5).abs() < 1e-15);
        assert!(run_circuit(&h, &b("01")).is_err());
    }

    #[test]
    fn tv_examples() {
        let p = Distribution(BTreeMap::from([(b("0"), 0.75), (b("1"), 0.25)]));
        let q = Distribution::uniform(1);
        assert_eq!(tv_distance(&p, &p), 0.0);
        assert!((tv_distance(&p, &q) - 0.25).abs() < 1e-15);
        assert_eq!(tv_distance(&Distribution::point(b("0")), &Distribution::point(b("1"))), 1.0);
    }

    #[test]
    fn deterministic_measurements() {
        let mut rng = seeded(1);
        let zero = StateVector::zero(1).unwrap();
        let mut plus = zero.clone();
        plus.apply_gate(&Gate::Hadamard(0)).unwrap();
        for _ in 0..100 {
            assert_eq!(zero.measure_xz(&BasisChoice(b("1")), &mut rng).unwrap(), b("0"));
            assert_eq!(plus.measure_xz(&BasisChoice(b("0")), &mut rng).unwrap(), b("0"));
        }
        assert!(zero.measure_xz(&BasisChoice(b("11")), &mut rng).is_err());
    }

    #[test]
    fn qubit_cap() {
        assert!(matches!(StateVector::zero(MAX_QUBITS + 1), Err(Error::TooManyQubits { .. })));
    }
}
