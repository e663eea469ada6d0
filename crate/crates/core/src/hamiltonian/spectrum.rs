//! Low-lying spectrum: dense diagonalization for small registers and a
//! matrix-free Lanczos iteration for larger ones.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::term::{WeightedHamiltonian, DENSE_MAX_QUBITS};
use crate::error::{Error, Result};
use crate::qsim::StateVector;
use crate::rng::seeded;

/// Convergence floor for the iterative solver.
pub const ITERATIVE_TOL: f64 = 1e-8;

/// Largest register the iterative solver accepts.
pub const ITERATIVE_MAX_QUBITS: usize = 22;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenMethod {
    Dense,
    Iterative,
    /// Dense up to the dense cap, iterative beyond.
    #[default]
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub lambda0: f64,
    /// Second smallest minus smallest eigenvalue (with multiplicity).
    pub gap: f64,
    pub eigenvalues: Vec<f64>,
    /// `||H |psi_hist>||` when a history state was supplied.
    pub hist_residual: Option<f64>,
    pub method: EigenMethod,
    /// Absolute accuracy attached to every reported eigenvalue.
    pub tolerance: f64,
    /// Matrix-vector products (iterative) or 0 (dense).
    pub iterations: usize,
}

/// All eigenvalues in ascending order.
pub fn dense_eigenvalues(h: &WeightedHamiltonian) -> Result<Vec<f64>> {
    let m = h.to_dense()?;
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Smallest eigenvalue above `threshold`, or `None` if `H` has none.
pub fn smallest_nonzero_eigenvalue(h: &WeightedHamiltonian, threshold: f64) -> Result<Option<f64>> {
    Ok(dense_eigenvalues(h)?.into_iter().find(|&e| e > threshold))
}

/// Roundoff scale of eigenvalues computed from `H`: `64 eps ||H||`, with
/// `sum |alpha|` standing in for the norm.
pub fn roundoff_tolerance(h: &WeightedHamiltonian) -> f64 {
    64.0 * f64::EPSILON * h.alpha_l1()
}

/// The `k` smallest eigenvalues, the gap, and the history-state residual.
pub fn ground_spectrum(
    h: &WeightedHamiltonian,
    k: usize,
    method: EigenMethod,
    history: Option<&StateVector>,
) -> Result<SpectrumReport> {
    if h.is_empty() {
        return Err(Error::EmptyHamiltonian);
    }
    let k = k.max(2).min(1usize << h.qubits().min(62));
    let method = match method {
        EigenMethod::Auto if h.qubits() <= DENSE_MAX_QUBITS => EigenMethod::Dense,
        EigenMethod::Auto => EigenMethod::Iterative,
        m => m,
    };
    let (eigenvalues, tolerance, iterations) = match method {
        EigenMethod::Dense => {
            let mut ev = dense_eigenvalues(h)?;
            ev.truncate(k);
            (ev, roundoff_tolerance(h), 0)
        }
        _ => {
            let tol = ITERATIVE_TOL.max(roundoff_tolerance(h));
            let r = lanczos_smallest(h, k, tol, &LanczosOptions::default())?;
            (r.eigenvalues, tol, r.matvecs)
        }
    };
    let hist_residual = match history {
        Some(psi) => Some(h.apply(psi)?.norm_sqr().sqrt()),
        None => None,
    };
    Ok(SpectrumReport {
        lambda0: eigenvalues[0],
        gap: (eigenvalues[1] - eigenvalues[0]).max(0.0),
        eigenvalues,
        hist_residual,
        method,
        tolerance,
        iterations,
    })
}

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Krylov basis size per restart (clamped by dimension and memory).
    pub krylov: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { krylov: 160, max_restarts: 200, seed: 0x5eed }
    }
}

#[derive(Clone, Debug)]
pub struct LanczosResult {
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub matvecs: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Twice-iterated Gram-Schmidt against every vector in `bases`.
fn orthogonalize(v: &mut [f64], bases: &[&[Vec<f64>]]) {
    for _ in 0..2 {
        for set in bases {
            for q in set.iter() {
                let c = dot(q, v);
                axpy(-c, q, v);
            }
        }
    }
}

/// Restarted Lanczos with full reorthogonalization and locking of
/// converged Ritz pairs. A Ritz pair is converged when its residual norm
/// `|beta_m y_m|` is at most `tol`.
pub fn lanczos_smallest(
    h: &WeightedHamiltonian,
    k: usize,
    tol: f64,
    opts: &LanczosOptions,
) -> Result<LanczosResult> {
    if h.qubits() > ITERATIVE_MAX_QUBITS {
        return Err(Error::TooManyQubits { qubits: h.qubits(), cap: ITERATIVE_MAX_QUBITS });
    }
    let dim = 1usize << h.qubits();
    let k = k.min(dim);
    // Keep the basis under ~256 MiB.
    let mem_cap = ((1usize << 25) / dim).max(k + 8);
    let krylov = opts.krylov.max(k + 8).min(mem_cap).min(dim);

    let mut rng = seeded(opts.seed);
    let mut start: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut locked: Vec<Vec<f64>> = Vec::new();
    let mut locked_vals: Vec<f64> = Vec::new();
    let mut locked_res: Vec<f64> = Vec::new();
    let mut matvecs = 0;
    let mut w = vec![0.0; dim];
    let breakdown = 1e-14 * h.alpha_l1().max(1.0);

    for _ in 0..opts.max_restarts {
        let room = dim - locked.len();
        let steps = krylov.min(room);
        orthogonalize(&mut start, &[locked.as_slice()]);
        let mut nrm = norm(&start);
        if nrm < 1e-300 {
            start = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
            orthogonalize(&mut start, &[locked.as_slice()]);
            nrm = norm(&start);
        }
        start.iter_mut().for_each(|v| *v /= nrm);

        let mut q: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let exhausted;
        loop {
            let j = q.len() - 1;
            h.apply_real(&q[j], &mut w)?;
            matvecs += 1;
            let a = dot(&q[j], &w);
            alpha.push(a);
            axpy(-a, &q[j], &mut w);
            if j > 0 {
                axpy(-beta[j - 1], &q[j - 1], &mut w);
            }
            orthogonalize(&mut w, &[locked.as_slice(), q.as_slice()]);
            let b = norm(&w);
            if q.len() == steps || b <= breakdown {
                beta.push(b);
                exhausted = b <= breakdown || q.len() == room;
                break;
            }
            beta.push(b);
            q.push(w.iter().map(|v| v / b).collect());
        }

        let m = alpha.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let b_last = if exhausted { 0.0 } else { beta[m - 1] };

        let wanted = k - locked.len();
        let ritz_vector = |col: usize| -> Vec<f64> {
            let y: DVector<f64> = eig.eigenvectors.column(col).into_owned();
            let mut v = vec![0.0; dim];
            for (i, qi) in q.iter().enumerate() {
                axpy(y[i], qi, &mut v);
            }
            v
        };
        let mut next_start = vec![0.0; dim];
        let mut newly_locked = 0;
        let mut prefix = true;
        for &col in order.iter().take(wanted) {
            let res = (b_last * eig.eigenvectors[(m - 1, col)]).abs();
            let v = ritz_vector(col);
            if prefix && res <= tol {
                locked_vals.push(eig.eigenvalues[col]);
                locked_res.push(res);
                locked.push(v);
                newly_locked += 1;
            } else {
                prefix = false;
                axpy(1.0, &v, &mut next_start);
            }
        }
        if locked.len() >= k {
            let mut pairs: Vec<(f64, f64)> = locked_vals.into_iter().zip(locked_res).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            return Ok(LanczosResult {
                eigenvalues: pairs.iter().map(|p| p.0).collect(),
                residuals: pairs.iter().map(|p| p.1).collect(),
                matvecs,
            });
        }
        if newly_locked == 0 && norm(&next_start) == 0.0 {
            next_start = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
        }
        start = next_start;
    }
    Err(Error::NonConvergence(format!(
        "{} of {k} eigenpairs within {tol:e} after {} restarts ({matvecs} products)",
        locked.len(),
        opts.max_restarts
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::construct::{build_h_clock, Layout};
    use crate::hamiltonian::term::XZTerm;

    #[test]
    fn clock_spectrum() {
        let h = build_h_clock(&Layout { n: 0, m: 0, t_padded: 2 }).unwrap();
        assert_eq!(dense_eigenvalues(&h).unwrap(), vec![0.0, 0.0, 0.0, 1.0]);
        let r = ground_spectrum(&h, 4, EigenMethod::Iterative, None).unwrap();
        for (a, b) in r.eigenvalues.iter().zip([0.0, 0.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn lanczos_matches_dense_on_random_hamiltonian() {
        let mut rng = seeded(3);
        let qubits = 7;
        let mut terms = Vec::new();
        for _ in 0..40 {
            let x: u64 = rng.random_range(0..1u64 << qubits);
            let z: u64 = rng.random_range(0..1u64 << qubits) & !x;
            terms.push((rng.random::<f64>() - 0.5, XZTerm::new(x, z).unwrap()));
        }
        let h = WeightedHamiltonian::from_terms(qubits, terms).unwrap();
        let dense = dense_eigenvalues(&h).unwrap();
        let opts = LanczosOptions { krylov: 40, ..Default::default() };
        let it = lanczos_smallest(&h, 4, 1e-10, &opts).unwrap();
        for (d, l) in dense.iter().zip(&it.eigenvalues).take(4) {
            assert!((d - l).abs() < 1e-8, "{d} {l}");
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let h = WeightedHamiltonian::from_terms(
            8,
            (0..8).map(|q| (1.0 + q as f64 * 1e-3, XZTerm::x(q))).collect::<Vec<_>>(),
        )
        .unwrap();
        let opts = LanczosOptions { krylov: 10, max_restarts: 1, seed: 1 };
        assert!(matches!(lanczos_smallest(&h, 6, 1e-14, &opts), Err(Error::NonConvergence(_))));
    }
}
