mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use xzdelegate::qsim::{
    output_distribution, random_state, run_circuit, tv_distance, BasisChoice, Circuit, Distribution, Gate,
    StateVector,
};
use xzdelegate::Bits;

fn bits(s: &str) -> Bits {
    s.parse().unwrap()
}

fn histogram(samples: &[Bits]) -> BTreeMap<Bits, usize> {
    let mut h = BTreeMap::new();
    samples.iter().for_each(|b| *h.entry(b.clone()).or_default() += 1);
    h
}

/// Largest per-cell deviation, in binomial sigmas, of `samples` from `p`.
fn max_sigma(samples: &[Bits], p: &Distribution) -> f64 {
    let h = histogram(samples);
    let mut worst: f64 = 0.0;
    for (k, q) in p.iter() {
        worst = worst.max(z_score(h.get(k).copied().unwrap_or(0), samples.len(), *q));
    }
    for k in h.keys() {
        if p.prob(k) == 0.0 {
            return f64::INFINITY;
        }
    }
    worst
}

#[test]
fn worked_examples() {
    let c = Circuit::new(2, 1, vec![Gate::Hadamard(0), Gate::Toffoli(0, 1, 2)], vec![0, 1, 2]).unwrap();
    let psi = run_circuit(&c, &bits("01")).unwrap();
    let expect = |i: usize| if i == 0b010 || i == 0b111 { std::f64::consts::FRAC_1_SQRT_2 } else { 0.0 };
    for (i, a) in psi.amplitudes().iter().enumerate() {
        assert!((a.re - expect(i)).abs() < 1e-12 && a.im.abs() < 1e-12, "amplitude {i}");
    }
    let wire2 = Circuit::new(2, 1, c.gates().to_vec(), vec![2]).unwrap();
    let d = output_distribution(&wire2, &bits("01")).unwrap();
    assert!((d.prob(&bits("0")) - 0.5).abs() < 1e-12 && (d.prob(&bits("1")) - 0.5).abs() < 1e-12);

    let empty = Circuit::new(1, 0, vec![], vec![0]).unwrap();
    assert_eq!(output_distribution(&empty, &bits("0")).unwrap(), Distribution::point(bits("0")));
    assert!(run_circuit(&empty, &bits("01")).is_err());
}

#[test]
fn tv_examples() {
    let p = Distribution([(bits("0"), 0.75), (bits("1"), 0.25)].into_iter().collect());
    let u = Distribution::uniform(1);
    assert!((tv_distance(&p, &u) - 0.25).abs() < 1e-15);
    assert_eq!(tv_distance(&p, &p), 0.0);
    assert_eq!(tv_distance(&Distribution::point(bits("0")), &Distribution::point(bits("1"))), 1.0);
}

#[test]
fn measurement_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let zero = StateVector::zero(1).unwrap();
    let mut plus = zero.clone();
    plus.apply_gate(&Gate::Hadamard(0)).unwrap();
    for _ in 0..100 {
        assert_eq!(zero.measure_xz(&BasisChoice(bits("1")), &mut rng).unwrap(), bits("0"));
        assert_eq!(plus.measure_xz(&BasisChoice(bits("0")), &mut rng).unwrap(), bits("0"));
    }
    let n = 100_000;
    let ones = (0..n).filter(|_| zero.measure_xz(&BasisChoice(bits("0")), &mut rng).unwrap().get(0)).count();
    assert!(z_score(ones, n, 0.5) <= 3.0);
    assert!(zero.measure_xz(&BasisChoice(bits("01")), &mut rng).is_err());
}

#[test]
fn unitarity_over_many_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10_000 {
        let s = rng.random_range(3..=6);
        let mut psi = random_state(s, &mut rng).unwrap();
        psi.apply_gate(&random_gate(s, &mut rng)).unwrap();
        assert!((psi.norm_sqr() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn z_sampling_matches_output_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let c = random_circuit(2, 1, 6, &mut rng);
    let x = bits("10");
    let psi = run_circuit(&c, &x).unwrap();
    let samples: Vec<Bits> = (0..100_000).map(|_| psi.measure_xz(&BasisChoice::all_z(3), &mut rng).unwrap()).collect();
    let exact = output_distribution(&c, &x).unwrap();
    assert!(max_sigma(&samples, &exact) <= 3.5);
}

#[test]
fn x_measurement_is_rotated_z_measurement() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let psi = random_state(3, &mut rng).unwrap();
    let mut rotated = psi.clone();
    for q in 0..3 {
        rotated.apply_gate(&Gate::Hadamard(q)).unwrap();
    }
    let expected = rotated.marginal(&[0, 1, 2]).unwrap();
    let samples: Vec<Bits> = (0..100_000).map(|_| psi.measure_xz(&BasisChoice::all_x(3), &mut rng).unwrap()).collect();
    assert!(max_sigma(&samples, &expected) <= 3.5);
}

#[test]
fn dense_gate_action_matches_kronecker_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let s = rng.random_range(3..=5);
        let gate = random_gate(s, &mut rng);
        let psi = random_state(s, &mut rng).unwrap();
        let mut out = psi.clone();
        out.apply_gate(&gate).unwrap();
        let u = gate_matrix(s, &gate);
        for (i, a) in out.amplitudes().iter().enumerate() {
            let want: num_complex::Complex64 = (0..1 << s).map(|j| psi.amplitudes()[j] * u[(i, j)]).sum();
            assert!((a - want).norm() < 1e-12);
        }
    }
}

#[test]
fn register_cap_is_enforced() {
    assert!(StateVector::zero(27).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gates_preserve_norm(seed in any::<u64>(), s in 3usize..=7, depth in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut psi = random_state(s, &mut rng).unwrap();
        for _ in 0..depth {
            psi.apply_gate(&random_gate(s, &mut rng)).unwrap();
        }
        prop_assert!((psi.norm_sqr() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn gates_are_involutions(seed in any::<u64>(), s in 3usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_state(s, &mut rng).unwrap();
        let gate = random_gate(s, &mut rng);
        let mut twice = psi.clone();
        twice.apply_gate(&gate).unwrap();
        twice.apply_gate(&gate).unwrap();
        prop_assert!((psi.inner(&twice).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tv_is_a_bounded_metric(a in prop::collection::vec(0.0f64..1.0, 4), b in prop::collection::vec(0.0f64..1.0, 4)) {
        let norm = |v: &[f64]| {
            let t: f64 = v.iter().sum::<f64>().max(1e-12);
            Distribution((0..4).map(|i| (Bits::from_index(i, 2), v[i as usize] / t)).collect())
        };
        let (p, q) = (norm(&a), norm(&b));
        let d = tv_distance(&p, &q);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
        prop_assert!((d - tv_distance(&q, &p)).abs() < 1e-15);
    }

    #[test]
    fn bits_round_trip(v in prop::collection::vec(any::<bool>(), 0..40)) {
        let b = Bits::new(v);
        prop_assert_eq!(Bits::from_bytes(&b.to_bytes()), b.clone());
        prop_assert_eq!(b.to_string().parse::<Bits>().unwrap(), b);
    }
}
