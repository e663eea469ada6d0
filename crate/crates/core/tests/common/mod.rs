//! Independent dense oracles built from Kronecker products of 2x2 matrices.
#![allow(dead_code)]

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use rand::Rng;

use xzdelegate::hamiltonian::{Layout, WeightedHamiltonian, XZTerm};
use xzdelegate::qsim::{Circuit, Gate, StateVector};
use xzdelegate::Bits;

pub type Mat = DMatrix<f64>;

pub fn i2() -> Mat {
    Mat::identity(2, 2)
}

pub fn x2() -> Mat {
    Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn z2() -> Mat {
    Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

pub fn h2() -> Mat {
    Mat::from_row_slice(2, 2, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2])
}

/// `|b><b|`.
pub fn proj(b: bool) -> Mat {
    let mut m = Mat::zeros(2, 2);
    m[(b as usize, b as usize)] = 1.0;
    m
}

/// Full-register operator with `ops[q]` on wire `q`. Wire `q` is bit `q` of
/// the basis index, so the highest wire is the leftmost Kronecker factor.
pub fn tensor(ops: &[Mat]) -> Mat {
    ops.iter().rev().fold(Mat::identity(1, 1), |acc, m| acc.kronecker(m))
}

/// `ops` placed on the listed wires, identity elsewhere.
pub fn local(qubits: usize, placed: &[(usize, Mat)]) -> Mat {
    let mut ops = vec![i2(); qubits];
    for (q, m) in placed {
        ops[*q] = m.clone();
    }
    tensor(&ops)
}

pub fn term_matrix(qubits: usize, term: &XZTerm) -> Mat {
    let ops: Vec<Mat> = (0..qubits)
        .map(|q| {
            if term.xmask() >> q & 1 == 1 {
                x2()
            } else if term.zmask() >> q & 1 == 1 {
                z2()
            } else {
                i2()
            }
        })
        .collect();
    tensor(&ops)
}

pub fn sum_matrix(qubits: usize, sum: &[(f64, XZTerm)]) -> Mat {
    sum.iter().fold(Mat::zeros(1 << qubits, 1 << qubits), |acc, (a, t)| acc + term_matrix(qubits, t) * *a)
}

pub fn hamiltonian_matrix(h: &WeightedHamiltonian) -> Mat {
    sum_matrix(h.qubits(), h.terms())
}

pub fn gate_matrix(qubits: usize, gate: &Gate) -> Mat {
    match *gate {
        Gate::Identity(_) => Mat::identity(1 << qubits, 1 << qubits),
        Gate::Hadamard(q) => local(qubits, &[(q, h2())]),
        Gate::Toffoli(a, b, c) => {
            let p11 = local(qubits, &[(a, proj(true)), (b, proj(true))]);
            let id = Mat::identity(1 << qubits, 1 << qubits);
            &p11 * local(qubits, &[(c, x2())]) + (id - &p11)
        }
    }
}

/// `sum_i |not x_i><not x_i|_i (x) |0><0|_{c_1}` over data wires, with
/// ancillas expected in `0`.
pub fn h_in_oracle(x: &Bits, layout: &Layout) -> Mat {
    let q = layout.qubits();
    let c1 = layout.data_wires();
    (0..layout.data_wires()).fold(Mat::zeros(1 << q, 1 << q), |acc, i| {
        let want = i < layout.n && x.get(i);
        acc + local(q, &[(i, proj(!want)), (c1, proj(false))])
    })
}

/// `sum_j |0><0|_{c_j} (x) |1><1|_{c_{j+1}}`.
pub fn h_clock_oracle(layout: &Layout) -> Mat {
    let q = layout.qubits();
    let d = layout.data_wires();
    (1..layout.t_padded).fold(Mat::zeros(1 << q, 1 << q), |acc, j| {
        acc + local(q, &[(d + j - 1, proj(false)), (d + j, proj(true))])
    })
}

/// Basis indices of data (x) legal clock states, ordered by time then data.
pub fn legal_indices(layout: &Layout) -> Vec<usize> {
    let d = layout.data_wires();
    (0..=layout.t_padded)
        .flat_map(|t| {
            let clock = ((1usize << t) - 1) << d;
            (0..1usize << d).map(move |i| clock | i)
        })
        .collect()
}

pub fn restrict(m: &Mat, indices: &[usize]) -> Mat {
    Mat::from_fn(indices.len(), indices.len(), |r, c| m[(indices[r], indices[c])])
}

/// The propagation Hamiltonian on the legal clock space, in the
/// [`legal_indices`] ordering:
/// `sum_t 1/2 (|t><t| + |t-1><t-1| - U_t |t><t-1| - U_t^dag |t-1><t|)`.
pub fn h_prop_legal_oracle(circuit_padded: &Circuit) -> Mat {
    let layout = Layout::of(circuit_padded);
    let d = layout.data_wires();
    let block = 1usize << d;
    let dim = block * (layout.t_padded + 1);
    let mut m = Mat::zeros(dim, dim);
    for (idx, gate) in circuit_padded.gates().iter().enumerate() {
        let t = idx + 1;
        let u = gate_matrix(d, gate);
        let (now, prev) = (t * block, (t - 1) * block);
        for i in 0..block {
            m[(now + i, now + i)] += 0.5;
            m[(prev + i, prev + i)] += 0.5;
            for j in 0..block {
                m[(now + i, prev + j)] -= 0.5 * u[(i, j)];
                m[(prev + j, now + i)] -= 0.5 * u[(i, j)];
            }
        }
    }
    m
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn random_gate<R: Rng + ?Sized>(wires: usize, rng: &mut R) -> Gate {
    loop {
        match rng.random_range(0..3) {
            0 => return Gate::Hadamard(rng.random_range(0..wires)),
            1 => return Gate::Identity(rng.random_range(0..wires)),
            _ if wires >= 3 => {
                let a = rng.random_range(0..wires);
                let b = rng.random_range(0..wires);
                let c = rng.random_range(0..wires);
                if a != b && b != c && a != c {
                    return Gate::Toffoli(a, b, c);
                }
            }
            _ => {}
        }
    }
}

pub fn random_circuit<R: Rng + ?Sized>(n: usize, m: usize, gates: usize, rng: &mut R) -> Circuit {
    let w = n + m;
    let gates = (0..gates).map(|_| random_gate(w, rng)).collect();
    Circuit::new(n, m, gates, (0..w).collect()).unwrap()
}

pub fn random_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Bits {
    Bits::new((0..len).map(|_| rng.random()).collect())
}

/// A random X-Z Hamiltonian with between 1 and `max_terms` terms.
pub fn random_hamiltonian<R: Rng + ?Sized>(qubits: usize, max_terms: usize, rng: &mut R) -> WeightedHamiltonian {
    let count = rng.random_range(1..=max_terms);
    let terms: Vec<(f64, XZTerm)> = (0..count)
        .map(|_| {
            let (mut xm, mut zm) = (0u64, 0u64);
            for q in 0..qubits {
                match rng.random_range(0..3) {
                    0 => xm |= 1 << q,
                    1 => zm |= 1 << q,
                    _ => {}
                }
            }
            (rng.random_range(-1.0..1.0), XZTerm::new(xm, zm).unwrap())
        })
        .collect();
    WeightedHamiltonian::from_terms(qubits, terms).unwrap()
}

pub fn real_expectation(m: &Mat, psi: &StateVector) -> f64 {
    let a = psi.amplitudes();
    let mut e = 0.0;
    for i in 0..a.len() {
        for j in 0..a.len() {
            if m[(i, j)] != 0.0 {
                e += (a[i].conj() * a[j]).re * m[(i, j)];
            }
        }
    }
    e
}

/// `1/2 - <H>/(2 sum |alpha|)` from a dense matrix.
pub fn vgs_accept_oracle(h: &WeightedHamiltonian, psi: &StateVector) -> f64 {
    let l1: f64 = h.terms().iter().map(|(a, _)| a.abs()).sum();
    0.5 - real_expectation(&hamiltonian_matrix(h), psi) / (2.0 * l1)
}

/// Number of `sigma`s separating an empirical rate from `p`.
pub fn z_score(hits: usize, trials: usize, p: f64) -> f64 {
    let rate = hits as f64 / trials as f64;
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    if sigma == 0.0 {
        if rate == p {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (rate - p).abs() / sigma
    }
}
