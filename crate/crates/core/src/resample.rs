//! Bootstrap pooling of spectra, reshuffling, sliding windows and synthetic panels.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64(seed)`; work item
//! `i` (bootstrap iteration, ensemble repetition) draws from stream `i` of that
//! generator, so results do not depend on scheduling.

use ndarray::Array2;
use num_complex::Complex64;
use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corrmat::{lagged_cross, lagged_products};
use crate::eig::{eig_general, ComplexSpectrum, SourceDims};
use crate::error::{Error, Result};
use crate::ingest::{standardize, ReturnPanel};
use crate::pca::{decompose, pc_lagged_cross};

/// Generator for work item `stream` under `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapSpec {
    pub iterations: usize,
    pub subset_size: usize,
    pub rng_seed: u64,
}

impl BootstrapSpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.iterations < 1 {
            return Err(Error::InvalidArgument("bootstrap needs at least one iteration".into()));
        }
        if self.subset_size < 2 || self.subset_size > n {
            return Err(Error::InvalidArgument(format!(
                "subset size {} must lie in [2, {n}]",
                self.subset_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Returns,
    PrincipalComponents,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub pooled: ComplexSpectrum,
    pub per_iteration_maxeig: Vec<Complex64>,
    pub spec: BootstrapSpec,
}

/// JSON summary of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub iterations: usize,
    pub subset_size: usize,
    pub seed: u64,
    pub pooled_count: usize,
    pub maxeig_mean_modulus: f64,
    pub maxeig_sd_modulus: f64,
    pub maxeig_min_modulus: f64,
    pub maxeig_max_modulus: f64,
}

impl EnsembleResult {
    pub fn summary(&self) -> EnsembleSummary {
        let moduli: Vec<f64> = self.per_iteration_maxeig.iter().map(|z| z.norm()).collect();
        let (mean, sd) = mean_sd(&moduli);
        EnsembleSummary {
            iterations: self.spec.iterations,
            subset_size: self.spec.subset_size,
            seed: self.spec.rng_seed,
            pooled_count: self.pooled.len(),
            maxeig_mean_modulus: mean,
            maxeig_sd_modulus: sd,
            maxeig_min_modulus: moduli.iter().copied().fold(f64::INFINITY, f64::min),
            maxeig_max_modulus: moduli.iter().copied().fold(0.0, f64::max),
        }
    }
}

/// Mean and sample standard deviation (0 for a single value).
fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn sorted_subset(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut v = index::sample(rng, n, k).into_vec();
    v.sort_unstable();
    v
}

fn pool(parts: Vec<ComplexSpectrum>, spec: BootstrapSpec, dims: SourceDims) -> EnsembleResult {
    let per_iteration_maxeig = parts
        .iter()
        .map(|s| s.max_modulus().expect("non-empty spectrum"))
        .collect();
    let pooled = parts.into_iter().flat_map(|s| s.eigenvalues).collect();
    EnsembleResult {
        pooled: ComplexSpectrum::new(pooled).with_source(dims),
        per_iteration_maxeig,
        spec,
    }
}

/// Pools the spectra of `k(τ)` (or of `k^e(τ)`) over random asset subsets.
///
/// Each iteration draws the two subsets independently and without replacement;
/// selected assets keep their input order. In returns space the subset
/// matrix is read off the full `k(τ)`, which is exact because every asset is
/// standardized on its own. In component space each subset panel is
/// decomposed afresh.
pub fn bootstrap_spectra(
    r1: &ReturnPanel,
    r2: &ReturnPanel,
    tau: i64,
    spec: BootstrapSpec,
    space: Space,
) -> Result<EnsembleResult> {
    spec.validate(r1.n().min(r2.n()))?;
    r1.check_standardized()?;
    r2.check_standardized()?;
    let full = match space {
        Space::Returns => Some(lagged_products(r1.values.view(), r2.values.view(), tau)?),
        Space::PrincipalComponents => {
            if r1.t() != r2.t() {
                return Err(Error::DimensionMismatch(format!("T differs: {} vs {}", r1.t(), r2.t())));
            }
            None
        }
    };
    let m = spec.subset_size;
    let parts = (0..spec.iterations)
        .into_par_iter()
        .map(|it| {
            let mut rng = rng_for(spec.rng_seed, it as u64);
            let rows1 = sorted_subset(&mut rng, r1.n(), m);
            let rows2 = sorted_subset(&mut rng, r2.n(), m);
            let k = match &full {
                Some(k) => k.select(ndarray::Axis(0), &rows1).select(ndarray::Axis(1), &rows2),
                None => {
                    let d1 = decompose(&r1.select_rows(&rows1))?;
                    let d2 = decompose(&r2.select_rows(&rows2))?;
                    let kept = d1.kept.min(d2.kept);
                    pc_lagged_cross(&d1.truncate(kept)?, &d2.truncate(kept)?, tau)?.entries
                }
            };
            eig_general(k.view())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pool(parts, spec, SourceDims { n: m, t: r1.t(), tau }))
}

/// `|λ_max|` of one window and lag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowPoint {
    pub start: usize,
    pub tau: i64,
    pub lambda_max: Complex64,
}

/// Mean and sample standard deviation of `|λ_max|` across windows, per lag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub tau: i64,
    pub mean_modulus: f64,
    pub sd_modulus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlidingScan {
    pub points: Vec<WindowPoint>,
    pub summary: Vec<WindowSummary>,
}

/// `λ_max` of `k(τ)` over windows `start..start + window_t`; each window is re-standardized.
pub fn sliding_windows(
    r1: &ReturnPanel,
    r2: &ReturnPanel,
    taus: &[i64],
    window_t: usize,
    starts: &[usize],
) -> Result<SlidingScan> {
    for &s in starts {
        if s + window_t > r1.t().min(r2.t()) {
            return Err(Error::InvalidArgument(format!(
                "window [{s}, {}) exceeds T = {}",
                s + window_t,
                r1.t().min(r2.t())
            )));
        }
    }
    let jobs: Vec<(usize, i64)> = starts
        .iter()
        .flat_map(|&s| taus.iter().map(move |&tau| (s, tau)))
        .collect();
    let points = jobs
        .into_par_iter()
        .map(|(start, tau)| {
            let w1 = standardize(&r1.window(start, window_t)?)?;
            let w2 = standardize(&r2.window(start, window_t)?)?;
            let s = lagged_cross(&w1, &w2, tau)?.spectrum()?;
            Ok(WindowPoint {
                start,
                tau,
                lambda_max: s.max_modulus().expect("non-empty spectrum"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = taus
        .iter()
        .map(|&tau| {
            let m: Vec<f64> = points.iter().filter(|p| p.tau == tau).map(|p| p.lambda_max.norm()).collect();
            let (mean_modulus, sd_modulus) = mean_sd(&m);
            WindowSummary { tau, mean_modulus, sd_modulus }
        })
        .collect();
    Ok(SlidingScan { points, summary })
}

/// Permutes the time axis of each panel, using one permutation for all rows
/// of `r1` and an independent one for all rows of `r2`.
pub fn reshuffle_panels(r1: &ReturnPanel, r2: &ReturnPanel, seed: u64) -> Result<(ReturnPanel, ReturnPanel)> {
    if r1.t() != r2.t() {
        return Err(Error::DimensionMismatch(format!("T differs: {} vs {}", r1.t(), r2.t())));
    }
    let mut rng = rng_for(seed, 0);
    let permute = |r: &ReturnPanel, rng: &mut ChaCha8Rng| {
        let mut perm: Vec<usize> = (0..r.t()).collect();
        perm.shuffle(rng);
        let mut out = r.clone();
        out.values = r.values.select(ndarray::Axis(1), &perm);
        out
    };
    let a = permute(r1, &mut rng);
    let b = permute(r2, &mut rng);
    Ok((a, b))
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, t: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, t), || StandardNormal.sample(rng))
}

fn null_pair(rng: &mut ChaCha8Rng, n: usize, t: usize) -> Result<(ReturnPanel, ReturnPanel)> {
    let a = standardize(&ReturnPanel::from_matrix("A", gaussian_matrix(rng, n, t))?)?;
    let b = standardize(&ReturnPanel::from_matrix("B", gaussian_matrix(rng, n, t))?)?;
    Ok((a, b))
}

/// Two independent standardized Gaussian `n × t` panels.
pub fn generate_null(n: usize, t: usize, seed: u64) -> Result<(ReturnPanel, ReturnPanel)> {
    if n < 2 || t < 2 {
        return Err(Error::InvalidArgument(format!("need n, t >= 2, got n = {n}, t = {t}")));
    }
    null_pair(&mut rng_for(seed, 0), n, t)
}

/// Pooled spectra of `k(τ)` over `reps` independent null pairs.
///
/// Repetition `i` uses stream `i`, so repetition 0 equals `generate_null(n, t, seed)`.
pub fn null_ensemble(n: usize, t: usize, reps: usize, tau: i64, seed: u64) -> Result<EnsembleResult> {
    if n < 2 || t < 2 || reps < 1 {
        return Err(Error::InvalidArgument(format!(
            "need n, t >= 2 and reps >= 1, got n = {n}, t = {t}, reps = {reps}"
        )));
    }
    let parts = (0..reps)
        .into_par_iter()
        .map(|i| {
            let (a, b) = null_pair(&mut rng_for(seed, i as u64), n, t)?;
            lagged_cross(&a, &b, tau)?.spectrum()
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = BootstrapSpec {
        iterations: reps,
        subset_size: n,
        rng_seed: seed,
    };
    Ok(pool(parts, spec, SourceDims { n, t, tau }))
}

/// Linear factor model for two systems of `n` assets.
///
/// With iid (or AR(1)) unit-variance factors `F`, `G`, `A`:
///
/// ```text
/// system 1: g_within F_t + anti_phase A_t + σ₁ ε
/// system 2: g_within G_t + g_cross F_{t-lag} + contemporaneous F_t - anti_phase A_t + σ₂ ε
/// ```
///
/// with `σ` chosen so every asset has unit variance. Factors and idiosyncratic
/// terms follow an AR(1) with coefficient `ar` (0 gives white noise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorModel {
    pub n: usize,
    pub t: usize,
    pub g_within: f64,
    pub g_cross: f64,
    pub lag: i64,
    #[serde(default)]
    pub contemporaneous: f64,
    #[serde(default)]
    pub anti_phase: f64,
    #[serde(default)]
    pub ar: f64,
}

impl FactorModel {
    pub fn new(n: usize, t: usize, g_within: f64, g_cross: f64, lag: i64) -> Self {
        Self {
            n,
            t,
            g_within,
            g_cross,
            lag,
            contemporaneous: 0.0,
            anti_phase: 0.0,
            ar: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let in_unit = |x: f64| (0.0..1.0).contains(&x);
        if self.n < 2 || self.t < 2 {
            return Err(Error::InvalidArgument(format!("need n, t >= 2, got {}x{}", self.n, self.t)));
        }
        if ![self.g_within, self.g_cross, self.contemporaneous, self.anti_phase].into_iter().all(in_unit) {
            return Err(Error::InvalidArgument("loadings must lie in [0, 1)".into()));
        }
        if !(self.ar.abs() < 1.0) {
            return Err(Error::InvalidArgument(format!("AR coefficient {} must satisfy |φ| < 1", self.ar)));
        }
        let s2 = self.g_within.powi(2) + self.g_cross.powi(2) + self.contemporaneous.powi(2) + self.anti_phase.powi(2);
        if s2 >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "squared loadings of system 2 sum to {s2}, must be below 1"
            )));
        }
        Ok(())
    }

    fn ar_series(&self, rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
        let phi = self.ar;
        let innov = (1.0 - phi * phi).sqrt();
        let mut x: f64 = StandardNormal.sample(rng);
        (0..len)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                x = phi * x + innov * z;
                x
            })
            .collect()
    }

    /// Standardized panels `(system 1, system 2)`.
    pub fn generate(&self, seed: u64) -> Result<(ReturnPanel, ReturnPanel)> {
        self.validate()?;
        let (n, t) = (self.n, self.t);
        let pad = self.lag.unsigned_abs() as usize;
        let mut rng = rng_for(seed, 0);
        // f[pad + t] is F_t.
        let f = self.ar_series(&mut rng, t + 2 * pad);
        let g = self.ar_series(&mut rng, t);
        let a = self.ar_series(&mut rng, t);
        let s1 = (1.0 - self.g_within.powi(2) - self.anti_phase.powi(2)).sqrt();
        let s2 = (1.0 - self.g_within.powi(2) - self.g_cross.powi(2) - self.contemporaneous.powi(2) - self.anti_phase.powi(2)).sqrt();
        let mut v1 = Array2::zeros((n, t));
        for i in 0..n {
            let e = self.ar_series(&mut rng, t);
            for k in 0..t {
                v1[[i, k]] = self.g_within * f[pad + k] + self.anti_phase * a[k] + s1 * e[k];
            }
        }
        let mut v2 = Array2::zeros((n, t));
        for i in 0..n {
            let e = self.ar_series(&mut rng, t);
            for k in 0..t {
                let lagged = f[((pad + k) as i64 - self.lag) as usize];
                v2[[i, k]] = self.g_within * g[k]
                    + self.g_cross * lagged
                    + self.contemporaneous * f[pad + k]
                    - self.anti_phase * a[k]
                    + s2 * e[k];
            }
        }
        let p1 = standardize(&ReturnPanel::from_matrix("A", v1)?)?;
        let p2 = standardize(&ReturnPanel::from_matrix("B", v2)?)?;
        Ok((p1, p2))
    }
}

/// Single global factor loaded by system 1 and fed to system 2 with a lag.
pub fn generate_factor_model(
    n: usize,
    t: usize,
    g_within: f64,
    g_cross: f64,
    lag: i64,
    seed: u64,
) -> Result<(ReturnPanel, ReturnPanel)> {
    FactorModel::new(n, t, g_within, g_cross, lag).generate(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrmat::pearson;

    #[test]
    fn spec_validation() {
        let ok = BootstrapSpec { iterations: 1, subset_size: 2, rng_seed: 0 };
        assert!(ok.validate(2).is_ok());
        assert!(BootstrapSpec { subset_size: 3, ..ok }.validate(2).is_err());
        assert!(BootstrapSpec { subset_size: 1, ..ok }.validate(2).is_err());
        assert!(BootstrapSpec { iterations: 0, ..ok }.validate(2).is_err());
    }

    #[test]
    fn full_subset_matches_full_matrix() {
        let (a, b) = generate_null(8, 60, 1).unwrap();
        let spec = BootstrapSpec { iterations: 3, subset_size: 8, rng_seed: 9 };
        let full = lagged_cross(&a, &b, 1).unwrap().spectrum().unwrap();
        let e = bootstrap_spectra(&a, &b, 1, spec, Space::Returns).unwrap();
        assert_eq!(e.pooled.len(), 24);
        for chunk in e.pooled.eigenvalues.chunks(8) {
            assert_eq!(chunk, &full.eigenvalues[..]);
        }
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let (a, b) = generate_null(10, 80, 2).unwrap();
        let spec = BootstrapSpec { iterations: 4, subset_size: 7, rng_seed: 5 };
        for space in [Space::Returns, Space::PrincipalComponents] {
            let x = bootstrap_spectra(&a, &b, 0, spec, space).unwrap();
            let y = bootstrap_spectra(&a, &b, 0, spec, space).unwrap();
            assert_eq!(x, y);
            assert_eq!(x.pooled.len(), 28);
        }
    }

    #[test]
    fn reshuffle_preserves_pearson() {
        let (a, b) = FactorModel::new(6, 50, 0.6, 0.3, 1).generate(3).unwrap();
        let (a2, b2) = reshuffle_panels(&a, &b, 4).unwrap();
        let (c, c2) = (pearson(&a).unwrap().entries, pearson(&a2).unwrap().entries);
        for (x, y) in c.iter().zip(c2.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(a2.check_standardized().is_ok() && b2.check_standardized().is_ok());
        assert_ne!(a2.values, a.values);
    }

    #[test]
    fn generators_are_reproducible() {
        assert_eq!(generate_null(4, 30, 8).unwrap(), generate_null(4, 30, 8).unwrap());
        assert_ne!(generate_null(4, 30, 8).unwrap().0, generate_null(4, 30, 9).unwrap().0);
        let m = FactorModel { ar: 0.5, anti_phase: 0.2, ..FactorModel::new(4, 30, 0.5, 0.3, -2) };
        assert_eq!(m.generate(1).unwrap(), m.generate(1).unwrap());
        let first = null_ensemble(4, 30, 2, 0, 8).unwrap();
        let (a, b) = generate_null(4, 30, 8).unwrap();
        assert_eq!(first.pooled.eigenvalues[..4], lagged_cross(&a, &b, 0).unwrap().spectrum().unwrap().eigenvalues[..]);
    }

    #[test]
    fn factor_model_rejects_bad_loadings() {
        assert!(generate_factor_model(4, 30, 1.0, 0.0, 0, 1).is_err());
        assert!(FactorModel { contemporaneous: 0.8, ..FactorModel::new(4, 30, 0.5, 0.5, 0) }.generate(1).is_err());
    }

    #[test]
    fn single_window_matches_full_scan() {
        let (a, b) = generate_factor_model(5, 40, 0.5, 0.3, 1, 2).unwrap();
        let scan = sliding_windows(&a, &b, &[0, 1], 40, &[0]).unwrap();
        for p in &scan.points {
            let full = lagged_cross(&a, &b, p.tau).unwrap().spectrum().unwrap();
            let want = full.max_modulus().unwrap();
            assert!((p.lambda_max - want).norm() < 1e-12);
        }
        assert_eq!(scan.summary[0].sd_modulus, 0.0);
        assert!(sliding_windows(&a, &b, &[0], 30, &[11]).is_err());
    }
}
