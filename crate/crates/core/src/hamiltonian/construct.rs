//! The three constraint Hamiltonians of the history-state construction.
//!
//! Register layout: data wires `[0, n+m)` followed by `T'` unary clock wires.
//! Clock time `t` is the pattern `1^t 0^(T'-t)`; clock qubit `j` (1-based)
//! lives on wire `n + m + j - 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

use super::term::{expand_product, HamiltonianBuilder, WeightedHamiltonian, XZTerm};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::qsim::{Circuit, Gate, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub n: usize,
    pub m: usize,
    pub t_padded: usize,
}

impl Layout {
    pub fn of(circuit: &Circuit) -> Layout {
        Layout { n: circuit.n(), m: circuit.m(), t_padded: circuit.len() }
    }

    pub fn data_wires(&self) -> usize {
        self.n + self.m
    }

    pub fn qubits(&self) -> usize {
        self.n + self.m + self.t_padded
    }

    /// Wire of clock qubit `j`, `1 <= j <= T'`.
    pub fn clock_wire(&self, j: usize) -> usize {
        debug_assert!(j >= 1 && j <= self.t_padded);
        self.n + self.m + j - 1
    }

    /// Basis index of the legal clock state for time `t` (data wires zero).
    pub fn clock_index(&self, t: usize) -> usize {
        ((1usize << t) - 1) << self.data_wires()
    }
}

type Sum = Vec<(f64, XZTerm)>;

fn identity() -> Sum {
    vec![(1.0, XZTerm::IDENTITY)]
}

/// `(I + sign Z_q)`.
fn one_plus_z(q: usize, sign: f64) -> Sum {
    vec![(1.0, XZTerm::IDENTITY), (sign, XZTerm::z(q))]
}

/// X-Z expansion of a gate's unitary. All three gates are Hermitian.
pub fn decompose_gate(gate: &Gate) -> Sum {
    match *gate {
        Gate::Identity(_) => identity(),
        Gate::Hadamard(q) => vec![(FRAC_1_SQRT_2, XZTerm::x(q)), (FRAC_1_SQRT_2, XZTerm::z(q))],
        Gate::Toffoli(a, b, c) => {
            let za = XZTerm::z(a);
            let zb = XZTerm::z(b);
            let xc = XZTerm::x(c);
            let zab = za.mul(&zb).expect("distinct wires");
            vec![
                (0.75, XZTerm::IDENTITY),
                (0.25, za),
                (0.25, zb),
                (-0.25, zab),
                (0.25, xc),
                (-0.25, za.mul(&xc).expect("distinct wires")),
                (-0.25, zb.mul(&xc).expect("distinct wires")),
                (0.25, zab.mul(&xc).expect("distinct wires")),
            ]
        }
    }
}

/// Input penalty: input wires must hold `x` and ancillas `0` whenever the
/// first clock qubit reads `0`.
pub fn build_h_in(x: &Bits, layout: &Layout) -> Result<WeightedHamiltonian> {
    if x.len() != layout.n {
        return Err(Error::LengthMismatch { expected: layout.n, actual: x.len() });
    }
    if layout.data_wires() == 0 {
        return Err(Error::InvalidArgument("empty data register".into()));
    }
    if layout.t_padded == 0 {
        return Err(Error::InvalidArgument("clock register needs at least one qubit".into()));
    }
    let c1 = layout.clock_wire(1);
    let mut b = HamiltonianBuilder::new(layout.qubits())?;
    for i in 0..layout.data_wires() {
        // (I - (-1)^x_i Z_i) for inputs, (I - Z_i) for ancillas
        let want_one = i < layout.n && x.get(i);
        let sign = if want_one { 1.0 } else { -1.0 };
        b.add_all(0.25, expand_product(&[one_plus_z(i, sign), one_plus_z(c1, 1.0)])?)?;
    }
    Ok(b.build())
}

/// Clock penalty: `sum_t |01><01|` on consecutive clock qubits.
pub fn build_h_clock(layout: &Layout) -> Result<WeightedHamiltonian> {
    let t = layout.t_padded;
    let mut b = HamiltonianBuilder::new(layout.qubits())?;
    if t >= 2 {
        b.add(0.25, XZTerm::z(layout.clock_wire(1)))?;
        b.add(-0.25, XZTerm::z(layout.clock_wire(t)))?;
        for j in 1..t {
            let zz = XZTerm::z(layout.clock_wire(j)).mul(&XZTerm::z(layout.clock_wire(j + 1)))?;
            b.add(0.25, XZTerm::IDENTITY)?;
            b.add(-0.25, zz)?;
        }
    }
    Ok(b.build())
}

/// Propagation penalty `sum_t H^t`, where on the legal clock space
/// `H^t = 1/2 (|t><t| + |t-1><t-1| - U_t |t><t-1| - U_t |t-1><t|)`.
///
/// Locally, `H^t = 1/2 P1(c_{t-1}) P0(c_{t+1}) (I - U_t X_{c_t})` with the
/// projector on a missing neighbour dropped at `t = 1` and `t = T'`.
pub fn build_h_prop(circuit_padded: &Circuit) -> Result<WeightedHamiltonian> {
    let layout = Layout::of(circuit_padded);
    let t_max = layout.t_padded;
    let mut b = HamiltonianBuilder::new(layout.qubits())?;
    for (idx, gate) in circuit_padded.gates().iter().enumerate() {
        let t = idx + 1;
        let mut condition: Vec<Sum> = Vec::new();
        if t > 1 {
            condition.push(one_plus_z(layout.clock_wire(t - 1), -1.0));
        }
        if t < t_max {
            condition.push(one_plus_z(layout.clock_wire(t + 1), 1.0));
        }
        // Each (I +- Z) is twice a projector.
        let scale = 0.5 * 0.5f64.powi(condition.len() as i32);
        let projector = expand_product(&condition)?;
        b.add_all(scale, projector.iter().copied())?;

        let mut hop_factors = condition;
        hop_factors.push(decompose_gate(gate));
        hop_factors.push(vec![(1.0, XZTerm::x(layout.clock_wire(t)))]);
        b.add_all(-scale, expand_product(&hop_factors)?)?;
    }
    Ok(b.build())
}

/// `1/sqrt(T'+1) sum_{t=0}^{T'} U_t...U_1 |x,0> (x) |1^t 0^(T'-t)>`.
pub fn history_state(circuit_padded: &Circuit, x: &Bits) -> Result<StateVector> {
    circuit_padded.check_input(x)?;
    let layout = Layout::of(circuit_padded);
    let mut data = StateVector::basis(layout.data_wires(), circuit_padded.initial_index(x))?;
    let qubits = layout.qubits();
    if qubits > crate::qsim::MAX_QUBITS {
        return Err(Error::TooManyQubits { qubits, cap: crate::qsim::MAX_QUBITS });
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << qubits];
    let weight = 1.0 / ((layout.t_padded + 1) as f64).sqrt();
    for t in 0..=layout.t_padded {
        if t > 0 {
            data.apply_gate(&circuit_padded.gates()[t - 1])?;
        }
        let clock = layout.clock_index(t);
        for (i, a) in data.amplitudes().iter().enumerate() {
            amps[clock | i] = a * weight;
        }
    }
    StateVector::from_amplitudes(amps)
}
