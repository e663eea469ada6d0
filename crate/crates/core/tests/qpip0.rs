mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use xzdelegate::energy::{term_basis, vgs_accept_prob_exact, vgs_accept_prob_mixed};
use xzdelegate::hamiltonian::CompileOptions;
use xzdelegate::outcome::{SampleOutcome, Verdict};
use xzdelegate::qpip0::{
    qpip0_monte_carlo, BitSource, Challenge, CopyStrategy, Functionality, Opening, Qpip0Choice, Qpip0Instance,
};
use xzdelegate::qsim::{BasisChoice, Circuit, Gate, StateVector};
use xzdelegate::Bits;

fn hadamard(padding: usize) -> Qpip0Instance {
    let c = Circuit::new(1, 0, vec![Gate::Hadamard(0)], vec![0]).unwrap();
    Qpip0Instance::new(&c, &"0".parse().unwrap(), 0.5, Some(padding), CompileOptions::default()).unwrap()
}

fn toffoli() -> Qpip0Instance {
    let c = Circuit::new(2, 1, vec![Gate::Hadamard(0), Gate::Toffoli(0, 1, 2)], vec![2]).unwrap();
    Qpip0Instance::new(&c, &"01".parse().unwrap(), 0.5, Some(0), CompileOptions::default()).unwrap()
}

#[test]
fn committed_views_do_not_depend_on_the_bases() {
    let inst = toffoli();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let strategies = vec![inst.honest(), CopyStrategy::broken(0.3, BitSource::Uniform), inst.honest()];
    let mut views = Vec::new();
    for _ in 0..20 {
        let choice = inst.choose(3, &mut rng).unwrap();
        let mut f = Functionality::new();
        for (h, s) in choice.h.iter().zip(&strategies) {
            let id = f.open_session(h.clone());
            f.commit(id, s).unwrap();
        }
        views.push(f.views());
    }
    assert!(views.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn choice_measures_the_hadamard_copy_in_z() {
    let inst = toffoli();
    let h = &inst.report.hamiltonian;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut seen = vec![0usize; 5];
    for _ in 0..2000 {
        let choice = inst.choose(5, &mut rng).unwrap();
        seen[choice.r] += 1;
        for (i, (t, basis)) in choice.terms.iter().zip(&choice.h).enumerate() {
            match t {
                None => {
                    assert_eq!(i, choice.r);
                    assert_eq!(*basis, BasisChoice::all_z(inst.qubits()));
                }
                Some(t) => assert_eq!(*basis, term_basis(&h.terms()[*t].1, inst.qubits())),
            }
        }
    }
    for count in seen {
        assert!(z_score(count, 2000, 0.2) <= 4.0);
    }
    assert!(inst.choose(1, &mut rng).is_err());
}

#[test]
fn output_rule() {
    let inst = toffoli();
    let q = inst.qubits();
    let choice = Qpip0Choice {
        r: 1,
        terms: vec![Some(0), None, Some(0)],
        h: vec![BasisChoice::all_z(q); 3],
    };
    let mut bits = Bits::zeros(q);
    bits.set(2, true);
    let acc = Opening::Verdict(Verdict::Acc);
    let rej = Opening::Verdict(Verdict::Rej);
    let open = Opening::Bits(bits);
    assert_eq!(inst.decide(&choice, &[acc.clone(), open.clone(), acc.clone()]), SampleOutcome::Acc("1".parse().unwrap()));
    assert_eq!(inst.decide(&choice, &[acc.clone(), open.clone(), rej]), SampleOutcome::Rej);
    assert_eq!(inst.decide(&choice, &[acc.clone(), Opening::Aborted, acc.clone()]), SampleOutcome::Rej);
    assert_eq!(inst.decide(&choice, &[open.clone(), open.clone(), acc.clone()]), SampleOutcome::Rej);
    assert_eq!(inst.decide(&choice, &[acc.clone(), Opening::Bits(Bits::zeros(q - 1)), acc]), SampleOutcome::Rej);
}

#[test]
fn traced_runs_agree_with_the_output_rule() {
    let inst = toffoli();
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..500 {
        let strategies: Vec<CopyStrategy> = (0..4)
            .map(|_| match rng.random_range(0..4) {
                0 => CopyStrategy::Abort,
                1 => CopyStrategy::broken(rng.random(), BitSource::Uniform),
                _ => inst.honest(),
            })
            .collect();
        let run = inst.run_traced(&strategies, &mut rng).unwrap();
        let tests_pass = run
            .openings
            .iter()
            .enumerate()
            .all(|(i, o)| i == run.r || *o == Opening::Verdict(Verdict::Acc));
        match (&run.openings[run.r], &run.outcome) {
            (Opening::Bits(b), SampleOutcome::Acc(z)) => {
                assert!(tests_pass);
                assert_eq!(*z, b.select(inst.circuit.outputs()));
            }
            (_, SampleOutcome::Rej) => assert!(!tests_pass || run.openings[run.r] == Opening::Aborted),
            (o, outcome) => panic!("{o:?} led to {outcome:?}"),
        }
    }
}

#[test]
fn cheating_on_one_copy_is_caught_unless_it_is_the_hadamard_copy() {
    let inst = hadamard(1);
    for copies in [3usize, 5, 8] {
        for position in 0..copies {
            let mut s = vec![inst.honest(); copies];
            s[position] = CopyStrategy::broken(0.0, BitSource::Uniform);
            let exact = Qpip0Instance::exact_accept_probability(&s);
            assert_eq!(exact, 1.0 / copies as f64);
            let (stats, _) = qpip0_monte_carlo(&inst, &s, 4000, position as u64).unwrap();
            assert!(z_score(stats.accepted, 4000, exact) <= 4.0, "M'={copies} at {position}");
        }
    }
}

#[test]
fn partial_cheating_has_a_product_rate() {
    let inst = hadamard(1);
    let s = vec![
        CopyStrategy::broken(0.5, BitSource::Uniform),
        CopyStrategy::broken(0.25, BitSource::Uniform),
        inst.honest(),
        inst.honest(),
    ];
    let exact = Qpip0Instance::exact_accept_probability(&s);
    let want = (0.25 + 0.5 + 0.125 + 0.125) / 4.0;
    assert!((exact - want).abs() < 1e-15);
    let (stats, _) = qpip0_monte_carlo(&inst, &s, 20_000, 44).unwrap();
    assert!(z_score(stats.accepted, 20_000, exact) <= 4.0);
    let mut aborting = s.clone();
    aborting[3] = CopyStrategy::Abort;
    assert_eq!(Qpip0Instance::exact_accept_probability(&aborting), 0.0);
}

#[test]
fn a_fixed_cheat_fades_as_copies_grow() {
    let inst = hadamard(2);
    let wrong = inst.embed_outputs(&"0".parse().unwrap()).unwrap();
    let mut tvs = Vec::new();
    for copies in [4usize, 8, 16] {
        let mut s = vec![inst.honest(); copies];
        s[0] = CopyStrategy::broken(1.0, BitSource::Fixed(wrong.clone()));
        let (stats, _) = qpip0_monte_carlo(&inst, &s, 20_000, copies as u64).unwrap();
        assert_eq!(stats.accepted, 20_000);
        tvs.push(stats.tv_acc_conditional);
    }
    assert!(tvs.windows(2).all(|w| w[0] > w[1]), "{tvs:?}");
}

#[test]
fn single_copy_protocol() {
    let inst = toffoli();
    let hist = StateVector::clone(&inst.history);
    let honest_h = vgs_accept_prob_exact(&inst.report.hamiltonian, &hist).unwrap();
    let mixed = vgs_accept_prob_mixed(&inst.report.hamiltonian).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    for (strategy, hadamard_rate) in
        [(inst.honest(), honest_h), (CopyStrategy::broken(1.0, BitSource::Uniform), mixed)]
    {
        let (mut tests, mut had, mut had_acc) = (0, 0, 0);
        for _ in 0..20_000 {
            let o = inst.run_naive(&strategy, &mut rng).unwrap();
            match o.c {
                Challenge::Test => {
                    assert_eq!(o.d, Verdict::Acc);
                    tests += 1;
                }
                Challenge::Hadamard => {
                    had += 1;
                    had_acc += o.d.is_acc() as usize;
                    assert_eq!(o.z.is_some(), o.d.is_acc());
                }
            }
        }
        assert!(z_score(tests, 20_000, 0.5) <= 4.0);
        assert!(z_score(had_acc, had, hadamard_rate) <= 4.0, "{had_acc}/{had} vs {hadamard_rate}");
    }
}

#[test]
fn invalid_strategies_are_rejected() {
    let inst = hadamard(1);
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    let short = CopyStrategy::bind(StateVector::zero(inst.qubits() - 1).unwrap());
    assert!(inst.run(&[inst.honest(), short], &mut rng).is_err());
    assert!(inst.run(&[inst.honest(), CopyStrategy::broken(1.5, BitSource::Uniform)], &mut rng).is_err());
    let fixed = CopyStrategy::broken(1.0, BitSource::Fixed(Bits::zeros(1)));
    assert!(inst.run(&[inst.honest(), fixed], &mut rng).is_err());
    assert!(inst.embed_outputs(&Bits::zeros(2)).is_err());
}

#[test]
fn monte_carlo_is_seeded() {
    let inst = hadamard(1);
    let s = vec![inst.honest(), CopyStrategy::broken(0.5, BitSource::Uniform), inst.honest()];
    let (a, ra) = qpip0_monte_carlo(&inst, &s, 1000, 47).unwrap();
    let (b, rb) = qpip0_monte_carlo(&inst, &s, 1000, 47).unwrap();
    assert_eq!(a, b);
    assert_eq!(ra, rb);
    assert_eq!(a.hadamard_counts.values().sum::<usize>(), 1000);
}
