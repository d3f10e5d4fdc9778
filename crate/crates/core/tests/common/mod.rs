#![allow(dead_code)]

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, n), || rng.random_range(-1.0..1.0))
}

/// Determinant by cofactor expansion along the first row.
pub fn cofactor_det(a: &Array2<f64>) -> f64 {
    let n = a.nrows();
    if n == 1 {
        return a[[0, 0]];
    }
    (0..n)
        .map(|j| {
            let minor = Array2::from_shape_fn((n - 1, n - 1), |(r, c)| a[[r + 1, if c < j { c } else { c + 1 }]]);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * a[[0, j]] * cofactor_det(&minor)
        })
        .sum()
}

/// Companion matrix whose characteristic polynomial has the given roots.
pub fn companion_from_roots(roots: &[Complex64]) -> Array2<f64> {
    // Monic coefficients, highest degree first.
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        coeffs = next;
    }
    let n = roots.len();
    let mut m = Array2::zeros((n, n));
    for j in 0..n {
        m[[0, j]] = -coeffs[j + 1].re;
    }
    for i in 1..n {
        m[[i, i - 1]] = 1.0;
    }
    m
}

/// Largest distance in an optimal-by-greedy pairing of two multisets of equal size.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("unused element");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Draws `n` moduli from the finite-size radial density by inverting a tabulated CDF.
pub fn sample_effective(p: &asymspec_core::DensityParams, n: usize, seed: u64) -> Vec<f64> {
    use asymspec_core::rmt::density_effective;
    let upper = p.radius() + 8.0 / p.h;
    let grid = 20_000;
    let dx = upper / grid as f64;
    let mut cdf = vec![0.0; grid + 1];
    for k in 1..=grid {
        let (a, b) = ((k - 1) as f64 * dx, k as f64 * dx);
        let f = |x| density_effective(x, p);
        cdf[k] = cdf[k - 1] + dx / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
    }
    let total = cdf[grid];
    let mut r = rng(seed);
    (0..n)
        .map(|_| {
            let u = r.random::<f64>() * total;
            let k = cdf.partition_point(|&c| c < u).clamp(1, grid);
            let frac = (u - cdf[k - 1]) / (cdf[k] - cdf[k - 1]).max(f64::MIN_POSITIVE);
            ((k - 1) as f64 + frac) * dx
        })
        .collect()
}
