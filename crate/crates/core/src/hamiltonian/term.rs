use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::StateVector;

/// Largest register a term mask can address.
pub const MAX_TERM_QUBITS: usize = 64;

/// Largest dimension for which dense matrices are materialized.
pub const DENSE_MAX_QUBITS: usize = 13;

/// A tensor product of Pauli X and Z factors with disjoint supports.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct XZTerm {
    xmask: u64,
    zmask: u64,
}

impl XZTerm {
    pub const IDENTITY: XZTerm = XZTerm { xmask: 0, zmask: 0 };

    pub fn new(xmask: u64, zmask: u64) -> Result<Self> {
        if xmask & zmask != 0 {
            return Err(Error::InvalidArgument(format!(
                "X and Z on the same qubit (mask {:#x}) would form a Y factor",
                xmask & zmask
            )));
        }
        Ok(XZTerm { xmask, zmask })
    }

    pub fn x(q: usize) -> Self {
        XZTerm { xmask: 1 << q, zmask: 0 }
    }

    pub fn z(q: usize) -> Self {
        XZTerm { xmask: 0, zmask: 1 << q }
    }

    pub fn xmask(&self) -> u64 {
        self.xmask
    }

    pub fn zmask(&self) -> u64 {
        self.zmask
    }

    pub fn support(&self) -> u64 {
        self.xmask | self.zmask
    }

    pub fn locality(&self) -> usize {
        self.support().count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.support() == 0
    }

    /// Product of two terms. Equal factors cancel; an X meeting a Z on the
    /// same qubit has no X-Z form and is rejected.
    pub fn mul(&self, other: &XZTerm) -> Result<XZTerm> {
        if (self.xmask & other.zmask) | (self.zmask & other.xmask) != 0 {
            return Err(Error::InvalidArgument("product of X and Z on one qubit".into()));
        }
        Ok(XZTerm { xmask: self.xmask ^ other.xmask, zmask: self.zmask ^ other.zmask })
    }

    /// `P|index> = sign * |target>`.
    #[inline]
    pub fn act(&self, index: usize) -> (usize, f64) {
        let sign = if (index as u64 & self.zmask).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        (index ^ self.xmask as usize, sign)
    }

    /// `I`/`X`/`Z` string, character `q` for qubit `q`.
    pub fn to_pauli_string(&self, qubits: usize) -> String {
        (0..qubits)
            .map(|q| {
                let bit = 1u64 << q;
                if self.xmask & bit != 0 {
                    'X'
                } else if self.zmask & bit != 0 {
                    'Z'
                } else {
                    'I'
                }
            })
            .collect()
    }

    pub fn from_pauli_string(s: &str) -> Result<Self> {
        if s.len() > MAX_TERM_QUBITS {
            return Err(Error::TooManyQubits { qubits: s.len(), cap: MAX_TERM_QUBITS });
        }
        let mut term = XZTerm::IDENTITY;
        for (q, c) in s.chars().enumerate() {
            match c {
                'I' => {}
                'X' => term.xmask |= 1 << q,
                'Z' => term.zmask |= 1 << q,
                other => {
                    return Err(Error::InvalidArgument(format!("unexpected Pauli {other:?}")));
                }
            }
        }
        Ok(term)
    }
}

/// `sum_i alpha_i H_i` in canonical form: terms sorted by `(zmask, xmask)`,
/// duplicates merged, zero coefficients dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedHamiltonian {
    qubits: usize,
    terms: Vec<(f64, XZTerm)>,
    alpha_l1: f64,
}

/// Accumulates terms before canonicalization.
#[derive(Clone, Debug)]
pub struct HamiltonianBuilder {
    qubits: usize,
    acc: BTreeMap<(u64, u64), f64>,
}

impl HamiltonianBuilder {
    pub fn new(qubits: usize) -> Result<Self> {
        if qubits > MAX_TERM_QUBITS {
            return Err(Error::TooManyQubits { qubits, cap: MAX_TERM_QUBITS });
        }
        Ok(HamiltonianBuilder { qubits, acc: BTreeMap::new() })
    }

    pub fn add(&mut self, alpha: f64, term: XZTerm) -> Result<&mut Self> {
        if self.qubits < 64 && term.support() >> self.qubits != 0 {
            return Err(Error::WireOutOfRange {
                wire: 63 - term.support().leading_zeros() as usize,
                qubits: self.qubits,
            });
        }
        *self.acc.entry((term.zmask, term.xmask)).or_default() += alpha;
        Ok(self)
    }

    /// Adds every term of `sum` scaled by `scale`.
    pub fn add_all<I>(&mut self, scale: f64, sum: I) -> Result<&mut Self>
    where
        I: IntoIterator<Item = (f64, XZTerm)>,
    {
        for (a, t) in sum {
            self.add(scale * a, t)?;
        }
        Ok(self)
    }

    pub fn build(self) -> WeightedHamiltonian {
        let terms: Vec<(f64, XZTerm)> = self
            .acc
            .into_iter()
            .filter(|&(_, a)| a != 0.0)
            .map(|((zmask, xmask), a)| (a, XZTerm { xmask, zmask }))
            .collect();
        let alpha_l1 = terms.iter().map(|(a, _)| a.abs()).sum();
        WeightedHamiltonian { qubits: self.qubits, terms, alpha_l1 }
    }
}

/// Expands a product of sums of terms, e.g. `(I - Z_a)(I + Z_b)`.
pub fn expand_product(factors: &[Vec<(f64, XZTerm)>]) -> Result<Vec<(f64, XZTerm)>> {
    let mut out = vec![(1.0, XZTerm::IDENTITY)];
    for factor in factors {
        let mut next = Vec::with_capacity(out.len() * factor.len());
        for &(a, t) in &out {
            for &(b, u) in factor {
                next.push((a * b, t.mul(&u)?));
            }
        }
        out = next;
    }
    Ok(out)
}

impl WeightedHamiltonian {
    pub fn zero(qubits: usize) -> Result<Self> {
        Ok(HamiltonianBuilder::new(qubits)?.build())
    }

    pub fn from_terms<I>(qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, XZTerm)>,
    {
        let mut b = HamiltonianBuilder::new(qubits)?;
        b.add_all(1.0, terms)?;
        Ok(b.build())
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn terms(&self) -> &[(f64, XZTerm)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `sum_i |alpha_i|`.
    pub fn alpha_l1(&self) -> f64 {
        self.alpha_l1
    }

    pub fn max_locality(&self) -> usize {
        self.terms.iter().map(|(_, t)| t.locality()).max().unwrap_or(0)
    }

    pub fn max_abs_alpha(&self) -> f64 {
        self.terms.iter().map(|(a, _)| a.abs()).fold(0.0, f64::max)
    }

    /// Coefficient of the identity term.
    pub fn identity_coefficient(&self) -> f64 {
        self.terms.iter().find(|(_, t)| t.is_identity()).map_or(0.0, |(a, _)| *a)
    }

    /// `sum_k scale_k * H_k` over hamiltonians on the same register.
    pub fn linear_combination(parts: &[(f64, &WeightedHamiltonian)]) -> Result<Self> {
        let qubits = parts.first().map_or(0, |(_, h)| h.qubits);
        let mut b = HamiltonianBuilder::new(qubits)?;
        for (scale, h) in parts {
            if h.qubits != qubits {
                return Err(Error::LengthMismatch { expected: qubits, actual: h.qubits });
            }
            b.add_all(*scale, h.terms.iter().copied())?;
        }
        Ok(b.build())
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.qubits > 26 || dim != 1usize << self.qubits {
            return Err(Error::LengthMismatch {
                expected: 1usize.checked_shl(self.qubits as u32).unwrap_or(0),
                actual: dim,
            });
        }
        Ok(())
    }

    /// Matrix-free `H|v>`.
    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        self.check_dim(v.dim())?;
        let amps = v.amplitudes();
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        out.par_chunks_mut(1 << 10).enumerate().for_each(|(chunk, slice)| {
            let base = chunk << 10;
            for (off, o) in slice.iter_mut().enumerate() {
                let j = base + off;
                let mut acc = Complex64::new(0.0, 0.0);
                for &(alpha, term) in &self.terms {
                    // P|i> = sign(i)|j> exactly when i = j ^ x.
                    let (i, _) = term.act(j);
                    let (_, sign) = term.act(i);
                    acc += amps[i] * (alpha * sign);
                }
                *o = acc;
            }
        });
        StateVector::from_amplitudes_unnormalized(out)
    }

    /// `H v` for a real vector.
    pub fn apply_real(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_dim(v.len())?;
        out.par_chunks_mut(1 << 10).enumerate().for_each(|(chunk, slice)| {
            let base = chunk << 10;
            for (off, o) in slice.iter_mut().enumerate() {
                let j = base + off;
                let mut acc = 0.0;
                for &(alpha, term) in &self.terms {
                    let (i, _) = term.act(j);
                    let (_, sign) = term.act(i);
                    acc += alpha * sign * v[i];
                }
                *o = acc;
            }
        });
        Ok(())
    }

    /// `<v|H|v>`; errors if the imaginary residue exceeds `1e-10`.
    pub fn expectation(&self, v: &StateVector) -> Result<f64> {
        let hv = self.apply(v)?;
        let e = v.inner(&hv)?;
        if e.im.abs() > 1e-10 * (1.0 + e.re.abs()) {
            return Err(Error::InvalidArgument(format!("non-real expectation {e}")));
        }
        Ok(e.re)
    }

    /// Dense real matrix (all X-Z terms are real).
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        if self.qubits > DENSE_MAX_QUBITS {
            return Err(Error::TooManyQubits { qubits: self.qubits, cap: DENSE_MAX_QUBITS });
        }
        let dim = 1usize << self.qubits;
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        for &(alpha, term) in &self.terms {
            for i in 0..dim {
                let (j, sign) = term.act(i);
                m[(j, i)] += alpha * sign;
            }
        }
        Ok(m)
    }

    /// One `alpha TAB pauli-string` line per term.
    pub fn to_text(&self) -> String {
        self.terms
            .iter()
            .map(|(a, t)| format!("{a:?}\t{}\n", t.to_pauli_string(self.qubits)))
            .collect()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut qubits = None;
        let mut terms = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { line: line_no + 1, msg };
            let (alpha, pauli) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("expected `alpha<TAB>pauli`".into()))?;
            let alpha: f64 = alpha.trim().parse().map_err(|e| parse_err(format!("{e}")))?;
            let pauli = pauli.trim();
            match qubits {
                None => qubits = Some(pauli.len()),
                Some(q) if q != pauli.len() => {
                    return Err(parse_err(format!("term width {} != {q}", pauli.len())));
                }
                _ => {}
            }
            let term = XZTerm::from_pauli_string(pauli).map_err(|e| parse_err(e.to_string()))?;
            terms.push((alpha, term));
        }
        Self::from_terms(qubits.unwrap_or(0), terms)
    }
}

impl fmt::Display for WeightedHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
