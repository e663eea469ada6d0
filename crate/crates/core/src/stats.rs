//! Small statistics helpers shared by the Monte Carlo harnesses.

/// Failure probability used for every reported confidence radius.
pub const CI_DELTA: f64 = 0.01;

/// Standard error of an empirical frequency with true rate `p` over `n` trials.
pub fn binomial_sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Radius `r` such that the TV distance between an empirical distribution of
/// `samples` draws over `categories` cells and its source exceeds `r` with
/// probability at most `delta` (the L1 deviation inequality of Weissman et
/// al., halved to TV).
pub fn tv_confidence_radius(categories: usize, samples: usize, delta: f64) -> f64 {
    if samples == 0 {
        return 1.0;
    }
    let k = categories.max(2) as f64;
    let l1 = (2.0 * (k * std::f64::consts::LN_2 + (1.0 / delta).ln()) / samples as f64).sqrt();
    (0.5 * l1).min(1.0)
}

/// `ln C(n, k)`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

pub fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    (ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
}

/// `Pr[Bin(n, p) > threshold]` for a real threshold.
pub fn binomial_tail_above(n: u64, p: f64, threshold: f64) -> f64 {
    (0..=n).filter(|&k| k as f64 > threshold).map(|k| binomial_pmf(n, k, p)).sum()
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_sums_to_one() {
        let total: f64 = (0..=16).map(|k| binomial_pmf(16, k, 0.3)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((binomial_pmf(4, 2, 0.5) - 6.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn tail_matches_enumeration() {
        // Pr[Bin(16, 1/2) >= 8] = (2^16 + C(16,8)) / 2^17
        let expected = (65536.0 + 12870.0) / 131072.0;
        assert!((binomial_tail_above(16, 0.5, 7.2) - expected).abs() < 1e-12);
    }

    #[test]
    fn radius_shrinks_with_samples() {
        let a = tv_confidence_radius(4, 1_000, CI_DELTA);
        let b = tv_confidence_radius(4, 100_000, CI_DELTA);
        assert!(b < a && a < 1.0);
        assert!((a / b - 10.0).abs() < 1e-9);
    }
}
