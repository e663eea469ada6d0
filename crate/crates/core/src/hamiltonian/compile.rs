//! Penalty weights and the full compilation `H = J_in H_in + J_clock H_clock + J_prop H_prop`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize, Serializer};

use super::construct::{build_h_clock, build_h_in, build_h_prop, Layout};
use super::spectrum::smallest_nonzero_eigenvalue;
use super::term::{WeightedHamiltonian, DENSE_MAX_QUBITS, MAX_TERM_QUBITS};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::qsim::Circuit;

/// Registers up to this size get exact (numeric) weights under `WeightMode::Auto`.
pub const AUTO_NUMERIC_MAX_QUBITS: usize = 10;

/// Eigenvalues below this are treated as part of a kernel.
const KERNEL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    /// Closed-form norm bounds and path-graph eigenvalues.
    Analytic,
    /// Exact norms and restricted eigenvalues by dense diagonalization.
    Numeric,
    /// Numeric when the register is small enough, analytic otherwise.
    #[default]
    Auto,
}

/// Weight on the input penalty.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputWeight {
    /// `J_in = T' + 1`, which compensates the `1/(T'+1)` overlap of the
    /// history state with the time-0 subspace.
    #[default]
    ClockScaled,
    /// `J_in = 1`.
    Unit,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileOptions {
    pub weights: WeightMode,
    pub input: InputWeight,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Weights {
    pub j_in: f64,
    pub j_clock: f64,
    pub j_prop: f64,
    /// Smallest nonzero eigenvalue of `H_clock` used in the denominator.
    pub lambda_clock: f64,
    /// Smallest nonzero eigenvalue of `H_prop` used in the denominator.
    pub lambda_prop: f64,
    /// Norm (or bound) of `J_in H_in`.
    pub norm_in: f64,
    /// Norm (or bound) of `J_in H_in + J_clock H_clock`.
    pub norm_in_clock: f64,
    pub mode: WeightMode,
}

/// `8 B^2 + 2 B`.
fn projection_numerator(b: f64) -> f64 {
    8.0 * b * b + 2.0 * b
}

/// `1 - cos(pi / (T' + 1))`, the smallest nonzero eigenvalue of half the
/// path Laplacian on `T' + 1` vertices.
pub fn path_gap(t_padded: usize) -> f64 {
    1.0 - (PI / (t_padded as f64 + 1.0)).cos()
}

/// `ceil(6T / eps)`, tolerant of binary rounding in the quotient.
pub fn padding_for(gates: usize, epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} not in (0, 1)")));
    }
    let q = 6.0 * gates as f64 / epsilon;
    let r = q.round();
    Ok(if (q - r).abs() <= 1e-9 * q.max(1.0) { r as usize } else { q.ceil() as usize })
}

fn is_diagonal(h: &WeightedHamiltonian) -> bool {
    h.terms().iter().all(|(_, t)| t.xmask() == 0)
}

/// Diagonal entries of a diagonal Hamiltonian, by enumeration.
fn diagonal(h: &WeightedHamiltonian) -> Result<Vec<f64>> {
    if !is_diagonal(h) {
        return Err(Error::InvalidArgument("hamiltonian has off-diagonal terms".into()));
    }
    if h.qubits() > DENSE_MAX_QUBITS {
        return Err(Error::TooManyQubits { qubits: h.qubits(), cap: DENSE_MAX_QUBITS });
    }
    Ok((0..1usize << h.qubits())
        .map(|i| h.terms().iter().map(|(a, t)| a * t.act(i).1).sum())
        .collect())
}

fn diagonal_norm(h: &WeightedHamiltonian) -> Result<f64> {
    Ok(diagonal(h)?.into_iter().fold(0.0, |m, d| m.max(d.abs())))
}

fn min_nonzero_diagonal(h: &WeightedHamiltonian) -> Result<Option<f64>> {
    Ok(diagonal(h)?.into_iter().filter(|&d| d > KERNEL_TOL).reduce(f64::min))
}

/// Weights from a two-stage projection bound: first `H_clock` against
/// `J_in H_in`, then `H_prop` against their sum.
pub fn compute_weights(
    h_in: &WeightedHamiltonian,
    h_clock: &WeightedHamiltonian,
    h_prop: &WeightedHamiltonian,
    layout: &Layout,
    options: CompileOptions,
) -> Result<Weights> {
    let qubits = layout.qubits();
    for h in [h_in, h_clock, h_prop] {
        if h.qubits() != qubits {
            return Err(Error::LengthMismatch { expected: qubits, actual: h.qubits() });
        }
    }
    let t = layout.t_padded;
    let j_in = match options.input {
        InputWeight::ClockScaled => (t + 1) as f64,
        InputWeight::Unit => 1.0,
    };
    let mode = match options.weights {
        WeightMode::Auto if qubits <= AUTO_NUMERIC_MAX_QUBITS => WeightMode::Numeric,
        WeightMode::Auto => WeightMode::Analytic,
        m => m,
    };
    match mode {
        WeightMode::Numeric => {
            if qubits > DENSE_MAX_QUBITS {
                return Err(Error::TooManyQubits { qubits, cap: DENSE_MAX_QUBITS });
            }
            let scaled_in = WeightedHamiltonian::linear_combination(&[(j_in, h_in)])?;
            let norm_in = diagonal_norm(&scaled_in)?;
            // T' = 1 has no clock constraint; any positive denominator works.
            let lambda_clock = min_nonzero_diagonal(h_clock)?.unwrap_or(1.0);
            let j_clock = projection_numerator(norm_in) / lambda_clock;
            let h1 = WeightedHamiltonian::linear_combination(&[(j_in, h_in), (j_clock, h_clock)])?;
            let norm_in_clock = diagonal_norm(&h1)?;
            let lambda_prop = smallest_nonzero_eigenvalue(h_prop, KERNEL_TOL)?
                .ok_or_else(|| Error::InvalidArgument("propagation hamiltonian is zero".into()))?;
            let j_prop = projection_numerator(norm_in_clock) / lambda_prop;
            Ok(Weights { j_in, j_clock, j_prop, lambda_clock, lambda_prop, norm_in, norm_in_clock, mode })
        }
        _ => {
            let norm_in = j_in * layout.data_wires() as f64;
            let lambda_clock = 1.0;
            let j_clock = projection_numerator(norm_in);
            let norm_in_clock = norm_in + j_clock * t.saturating_sub(1) as f64;
            let lambda_prop = path_gap(t);
            let j_prop = projection_numerator(norm_in_clock) / lambda_prop;
            Ok(Weights {
                j_in,
                j_clock,
                j_prop,
                lambda_clock,
                lambda_prop,
                norm_in,
                norm_in_clock,
                mode: WeightMode::Analytic,
            })
        }
    }
}

fn serialize_terms<S: Serializer>(h: &WeightedHamiltonian, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(h.to_text().lines())
}

#[derive(Clone, Debug, Serialize)]
pub struct CompileReport {
    pub j_in: f64,
    pub j_clock: f64,
    pub j_prop: f64,
    pub lambda_clock: f64,
    pub lambda_prop: f64,
    pub weight_mode: WeightMode,
    pub input_weight: InputWeight,
    /// Gate count before padding.
    pub t: usize,
    pub padding: usize,
    pub t_padded: usize,
    pub layout: Layout,
    pub qubits: usize,
    pub term_count: usize,
    /// `term_count / t_padded`.
    pub terms_per_step: f64,
    pub max_locality: usize,
    pub max_abs_alpha: f64,
    pub alpha_l1: f64,
    #[serde(rename = "terms", serialize_with = "serialize_terms")]
    pub hamiltonian: WeightedHamiltonian,
    #[serde(skip)]
    pub circuit_padded: Circuit,
    #[serde(skip)]
    pub h_in: WeightedHamiltonian,
    #[serde(skip)]
    pub h_clock: WeightedHamiltonian,
    #[serde(skip)]
    pub h_prop: WeightedHamiltonian,
}

/// Pads `circuit` with identities and compiles `H_{C'(x)}`.
pub fn compile_hamiltonian(
    circuit: &Circuit,
    x: &Bits,
    epsilon: f64,
    padding_override: Option<usize>,
    options: CompileOptions,
) -> Result<CompileReport> {
    circuit.check_input(x)?;
    let padding = match padding_override {
        Some(p) => p,
        None => padding_for(circuit.len(), epsilon)?,
    };
    let padded = circuit.padded(padding)?;
    let layout = Layout::of(&padded);
    if layout.t_padded == 0 {
        return Err(Error::InvalidCircuit("no gates after padding".into()));
    }
    if layout.qubits() > MAX_TERM_QUBITS {
        return Err(Error::TooManyQubits { qubits: layout.qubits(), cap: MAX_TERM_QUBITS });
    }
    let h_in = build_h_in(x, &layout)?;
    let h_clock = build_h_clock(&layout)?;
    let h_prop = build_h_prop(&padded)?;
    let w = compute_weights(&h_in, &h_clock, &h_prop, &layout, options)?;
    let hamiltonian =
        WeightedHamiltonian::linear_combination(&[(w.j_in, &h_in), (w.j_clock, &h_clock), (w.j_prop, &h_prop)])?;
    Ok(CompileReport {
        j_in: w.j_in,
        j_clock: w.j_clock,
        j_prop: w.j_prop,
        lambda_clock: w.lambda_clock,
        lambda_prop: w.lambda_prop,
        weight_mode: w.mode,
        input_weight: options.input,
        t: circuit.len(),
        padding,
        t_padded: layout.t_padded,
        layout,
        qubits: layout.qubits(),
        term_count: hamiltonian.len(),
        terms_per_step: hamiltonian.len() as f64 / layout.t_padded as f64,
        max_locality: hamiltonian.max_locality(),
        max_abs_alpha: hamiltonian.max_abs_alpha(),
        alpha_l1: hamiltonian.alpha_l1(),
        hamiltonian,
        circuit_padded: padded,
        h_in,
        h_clock,
        h_prop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::construct::history_state;
    use crate::qsim::Gate;

    fn identities(t: usize) -> Circuit {
        Circuit::new(1, 0, vec![Gate::Identity(0); t], vec![0]).unwrap()
    }

    #[test]
    fn padding_count() {
        assert_eq!(padding_for(2, 0.5).unwrap(), 24);
        assert_eq!(padding_for(2, 0.1).unwrap(), 120);
        assert_eq!(padding_for(1, 0.7).unwrap(), 9);
        assert!(padding_for(1, 1.0).is_err());
        let c = Circuit::new(1, 0, vec![Gate::Hadamard(0), Gate::Hadamard(0)], vec![0]).unwrap();
        let opts = CompileOptions { weights: WeightMode::Analytic, ..Default::default() };
        let r = compile_hamiltonian(&c, &"0".parse().unwrap(), 0.5, None, opts).unwrap();
        assert_eq!(r.t_padded, 26);
        assert!(r.max_locality <= 6);
    }

    #[test]
    fn analytic_clock_weight_unit_input() {
        let c = identities(1);
        let layout = Layout::of(&c);
        let x: Bits = "0".parse().unwrap();
        let opts = CompileOptions { weights: WeightMode::Analytic, input: InputWeight::Unit };
        let w = compute_weights(
            &build_h_in(&x, &layout).unwrap(),
            &build_h_clock(&layout).unwrap(),
            &build_h_prop(&c).unwrap(),
            &layout,
            opts,
        )
        .unwrap();
        assert_eq!(w.j_clock, 10.0);
    }

    #[test]
    fn numeric_path_gap_for_identities() {
        for t in 1..=6 {
            let c = identities(t);
            let layout = Layout::of(&c);
            let x: Bits = "1".parse().unwrap();
            let opts = CompileOptions { weights: WeightMode::Numeric, ..Default::default() };
            let w = compute_weights(
                &build_h_in(&x, &layout).unwrap(),
                &build_h_clock(&layout).unwrap(),
                &build_h_prop(&c).unwrap(),
                &layout,
                opts,
            )
            .unwrap();
            let rel = (w.lambda_prop - path_gap(t)).abs() / path_gap(t);
            assert!(rel < 0.1, "T'={t}: {} vs {}", w.lambda_prop, path_gap(t));
            if t == 2 {
                assert!((w.lambda_prop - 0.5).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn compiled_hamiltonian_annihilates_history() {
        let c = Circuit::new(1, 0, vec![Gate::Hadamard(0)], vec![0]).unwrap();
        let x: Bits = "0".parse().unwrap();
        for weights in [WeightMode::Analytic, WeightMode::Numeric] {
            let r = compile_hamiltonian(&c, &x, 0.5, Some(1), CompileOptions { weights, ..Default::default() })
                .unwrap();
            let psi = history_state(&r.circuit_padded, &x).unwrap();
            let res = r.hamiltonian.apply(&psi).unwrap().norm_sqr().sqrt();
            assert!(res < 1e-9, "{res}");
        }
    }

    #[test]
    fn report_json_fields() {
        let c = identities(2);
        let r = compile_hamiltonian(&c, &"0".parse().unwrap(), 0.5, Some(0), CompileOptions::default()).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in ["j_clock", "j_prop", "t_padded", "term_count", "max_locality", "terms"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["terms"].as_array().unwrap().len(), r.term_count);
    }
}
