//! The single-shot energy test: sample one term with probability
//! `|alpha_i| / sum |alpha|`, measure its support in the term's X/Z bases,
//! and accept iff `sgn(alpha_i) * r = -1` where `r` is the product of the
//! `+-1` outcomes. The acceptance probability is
//! `1/2 - <H> / (2 sum |alpha|)`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::hamiltonian::{WeightedHamiltonian, XZTerm};
use crate::outcome::Verdict;
use crate::qsim::{sample_index, BasisChoice, StateVector};
use crate::rng;
use crate::stats::binomial_sigma;

/// Largest register for exact enumeration of acceptance probabilities.
pub const EXACT_MAX_QUBITS: usize = 12;

/// How far outside `[0, 1]` the closed form may drift before it is
/// treated as a construction error.
const PROB_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VgsRound {
    pub term_index: usize,
    /// `(qubit, basis)` for every qubit in the term's support.
    pub basis_schedule: Vec<(usize, Basis)>,
    /// `+1` or `-1` per scheduled qubit.
    pub outcomes: Vec<i8>,
    pub r: i8,
    pub verdict: Verdict,
}

fn check(h: &WeightedHamiltonian, state: &StateVector) -> Result<()> {
    if h.is_empty() || h.alpha_l1() == 0.0 {
        return Err(Error::EmptyHamiltonian);
    }
    if h.qubits() != state.qubits() {
        return Err(Error::LengthMismatch { expected: h.qubits(), actual: state.qubits() });
    }
    Ok(())
}

/// The basis choice measuring `term`'s X factors in X and everything else in Z.
pub fn term_basis(term: &XZTerm, qubits: usize) -> BasisChoice {
    BasisChoice((0..qubits).map(|q| term.xmask() >> q & 1 == 0).collect())
}

pub fn support_wires(term: &XZTerm) -> Vec<usize> {
    (0..64).filter(|q| term.support() >> q & 1 == 1).collect()
}

/// `i*` with probability `|alpha_i| / sum |alpha|`.
pub fn sample_term<R: Rng + ?Sized>(h: &WeightedHamiltonian, rng: &mut R) -> Result<usize> {
    if h.is_empty() || h.alpha_l1() == 0.0 {
        return Err(Error::EmptyHamiltonian);
    }
    let weights: Vec<f64> = h.terms().iter().map(|(a, _)| a.abs()).collect();
    Ok(sample_index(&weights, rng))
}

/// Accept iff `sgn(alpha) * r = -1`.
pub fn verdict_for(alpha: f64, r: i8) -> Verdict {
    Verdict::from_bool(alpha.signum() as i8 * r == -1)
}

/// Product of the `(-1)^b` outcomes on `term`'s support, read from a full
/// register of measured bits. Identity terms give the empty product `+1`.
pub fn parity_sign(term: &XZTerm, bits: &Bits) -> i8 {
    let odd = support_wires(term).into_iter().filter(|&q| bits.get(q)).count() % 2 == 1;
    if odd {
        -1
    } else {
        1
    }
}

/// One round on a fresh copy of `state`.
pub fn vgs_round<R: Rng + ?Sized>(h: &WeightedHamiltonian, state: &StateVector, rng: &mut R) -> Result<VgsRound> {
    check(h, state)?;
    let term_index = sample_term(h, rng)?;
    let (alpha, term) = h.terms()[term_index];
    let wires = support_wires(&term);
    let basis_schedule: Vec<(usize, Basis)> = wires
        .iter()
        .map(|&q| (q, if term.xmask() >> q & 1 == 1 { Basis::X } else { Basis::Z }))
        .collect();
    let outcomes: Vec<i8> = if wires.is_empty() {
        Vec::new()
    } else {
        let rotated = state.rotated_to(&term_basis(&term, state.qubits()))?;
        let bits = rotated.marginal(&wires)?.sample(rng);
        bits.iter().map(|b| if b { -1 } else { 1 }).collect()
    };
    let r = outcomes.iter().product::<i8>();
    Ok(VgsRound { term_index, basis_schedule, outcomes, r, verdict: verdict_for(alpha, r) })
}

/// `Pr[r = -1]` when measuring `term` on `state`, by Born-rule enumeration.
pub fn term_odd_probability(term: &XZTerm, state: &StateVector) -> Result<f64> {
    if term.is_identity() {
        return Ok(0.0);
    }
    let rotated = state.rotated_to(&term_basis(term, state.qubits()))?;
    let support = term.support() as usize;
    Ok(rotated
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| (i & support).count_ones() % 2 == 1)
        .map(|(_, a)| a.norm_sqr())
        .sum())
}

/// Acceptance probability of each term when it is the one sampled.
pub fn term_accept_probabilities(h: &WeightedHamiltonian, state: &StateVector) -> Result<Vec<f64>> {
    check(h, state)?;
    h.terms()
        .par_iter()
        .map(|(alpha, term)| {
            let odd = term_odd_probability(term, state)?;
            Ok(if *alpha > 0.0 { odd } else { 1.0 - odd })
        })
        .collect()
}

fn clamp_probability(p: f64) -> Result<f64> {
    if !(-PROB_SLACK..=1.0 + PROB_SLACK).contains(&p) {
        return Err(Error::InvalidArgument(format!("acceptance probability {p} outside [0, 1]")));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// `1/2 - <H> / (2 sum |alpha|)`.
pub fn vgs_accept_prob_analytic(h: &WeightedHamiltonian, state: &StateVector) -> Result<f64> {
    check(h, state)?;
    clamp_probability(0.5 - h.expectation(state)? / (2.0 * h.alpha_l1()))
}

/// The closed form for the maximally mixed state: only the identity term
/// has nonzero trace.
pub fn vgs_accept_prob_mixed(h: &WeightedHamiltonian) -> Result<f64> {
    if h.is_empty() || h.alpha_l1() == 0.0 {
        return Err(Error::EmptyHamiltonian);
    }
    clamp_probability(0.5 - h.identity_coefficient() / (2.0 * h.alpha_l1()))
}

/// `sum_i p_i Pr[sgn(alpha_i) r = -1]` by exact enumeration.
pub fn vgs_accept_prob_exact(h: &WeightedHamiltonian, state: &StateVector) -> Result<f64> {
    check(h, state)?;
    if state.qubits() > EXACT_MAX_QUBITS {
        return Err(Error::TooManyQubits { qubits: state.qubits(), cap: EXACT_MAX_QUBITS });
    }
    let per_term = term_accept_probabilities(h, state)?;
    Ok(h.terms().iter().zip(per_term).map(|((a, _), p)| a.abs() / h.alpha_l1() * p).sum())
}

/// `(2/sqrt 3) sqrt(E)`: a bound on the trace distance between a state of
/// energy `E` and the ground state, given a spectral gap of at least 3/4.
pub fn closeness_bound(energy: f64) -> Result<f64> {
    if energy.is_nan() || energy < 0.0 {
        return Err(Error::InvalidArgument(format!("energy {energy} is negative")));
    }
    Ok(2.0 / 3f64.sqrt() * energy.sqrt())
}

/// Trace distance between two pure states, `sqrt(1 - |<a|b>|^2)`.
pub fn trace_distance_pure(a: &StateVector, b: &StateVector) -> Result<f64> {
    let overlap = a.inner(b)?.norm_sqr();
    Ok((1.0 - overlap).max(0.0).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VgsStats {
    pub trials: usize,
    pub accepts: usize,
    pub accept_rate: f64,
    pub sigma: f64,
    pub analytic: f64,
    pub seed: u64,
}

/// `trials` independent rounds, one fresh copy each, in parallel with a
/// per-trial stream.
pub fn vgs_monte_carlo(h: &WeightedHamiltonian, state: &StateVector, trials: usize, seed: u64) -> Result<VgsStats> {
    check(h, state)?;
    let analytic = vgs_accept_prob_analytic(h, state)?;
    let accepts = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::trial(seed, i);
            vgs_round(h, state, &mut r).map(|round| round.verdict.is_acc() as usize)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<usize>();
    let accept_rate = accepts as f64 / trials as f64;
    Ok(VgsStats { trials, accepts, accept_rate, sigma: binomial_sigma(analytic, trials), analytic, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{new_basis_state, Gate};
    use crate::rng::seeded;

    fn single(alpha: f64, term: XZTerm, qubits: usize) -> WeightedHamiltonian {
        WeightedHamiltonian::from_terms(qubits, [(alpha, term)]).unwrap()
    }

    fn ket(bits: &str) -> StateVector {
        let b: Bits = bits.parse().unwrap();
        new_basis_state(b.len(), &b).unwrap()
    }

    fn plus() -> StateVector {
        let mut s = ket("0");
        s.apply_gate(&Gate::Hadamard(0)).unwrap();
        s
    }

    #[test]
    fn eigenstate_rounds() {
        let mut rng = seeded(1);
        let h = single(1.0, XZTerm::z(0), 1);
        for _ in 0..50 {
            let round = vgs_round(&h, &ket("1"), &mut rng).unwrap();
            assert_eq!((round.r, round.verdict), (-1, Verdict::Acc));
        }
        let id = single(1.0, XZTerm::IDENTITY, 1);
        for _ in 0..50 {
            let round = vgs_round(&id, &ket("0"), &mut rng).unwrap();
            assert_eq!((round.r, round.verdict), (1, Verdict::Rej));
            assert!(round.outcomes.is_empty());
        }
    }

    #[test]
    fn closed_forms() {
        let h = single(1.0, XZTerm::z(0), 1);
        assert_eq!(vgs_accept_prob_analytic(&h, &ket("1")).unwrap(), 1.0);
        assert!(vgs_accept_prob_exact(&single(1.0, XZTerm::x(0), 1), &plus()).unwrap().abs() < 1e-15);
        assert!((vgs_accept_prob_exact(&single(-1.0, XZTerm::x(0), 1), &plus()).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            vgs_accept_prob_analytic(&WeightedHamiltonian::zero(1).unwrap(), &ket("0")),
            Err(Error::EmptyHamiltonian)
        ));
    }

    #[test]
    fn mixed_state_average() {
        let t = XZTerm::z(0).mul(&XZTerm::x(1)).unwrap();
        let h = WeightedHamiltonian::from_terms(2, [(0.7, XZTerm::IDENTITY), (-0.4, t), (0.2, XZTerm::z(1))]).unwrap();
        let avg: f64 = (0..4)
            .map(|i| vgs_accept_prob_exact(&h, &StateVector::basis(2, i).unwrap()).unwrap())
            .sum::<f64>()
            / 4.0;
        assert!((avg - vgs_accept_prob_mixed(&h).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn closeness_values() {
        assert_eq!(closeness_bound(0.0).unwrap(), 0.0);
        assert!((closeness_bound(0.75).unwrap() - 1.0).abs() < 1e-15);
        assert!((closeness_bound(0.03).unwrap() - 0.2).abs() < 1e-15);
        assert!(closeness_bound(-1e-3).is_err());
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let h = WeightedHamiltonian::from_terms(1, [(1.0, XZTerm::x(0)), (0.5, XZTerm::z(0))]).unwrap();
        let a = vgs_monte_carlo(&h, &ket("0"), 2000, 9).unwrap();
        let b = vgs_monte_carlo(&h, &ket("0"), 2000, 9).unwrap();
        assert_eq!(a, b);
        assert!((a.accept_rate - a.analytic).abs() < 4.0 * a.sigma);
    }
}
