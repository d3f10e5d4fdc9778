//! Null eigenvalue densities for lagged correlation matrices of independent
//! Gaussian data, radial histograms of empirical spectra, and least-squares
//! fitting of the finite-size density.
//!
//! With `q = T/N`, the limiting density in the complex plane is
//!
//! ```text
//! ρ(λ) = q² / (π √((1-q)² + 4q²|λ|²))   for |λ| <= q^{-1/2}, else 0
//! ```
//!
//! Its radial form is `2πx ρ` and the finite-size version smooths the edge
//! with `½ erfc(h (x - q^{-1/2}))`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::integrate;
use crate::optimize::{golden_section, nelder_mead_2d};

pub const H_BOUNDS: (f64, f64) = (1.0, 1e4);
pub const Q_BOUNDS: (f64, f64) = (0.1, 1e3);
pub const MIN_BINS: usize = 5;
pub const MAX_DEFAULT_BINS: usize = 100;
pub const MIN_EIGENVALUES: usize = 10;
/// Outliers beyond this multiple of the nominal support radius are dropped by default.
pub const DEFAULT_EXCLUSION_FACTOR: f64 = 3.0;
/// A fit is flagged when its RMS residual exceeds this fraction of the peak
/// model density and its reduced chi-square exceeds `POOR_FIT_CHI2`.
pub const POOR_FIT_RELATIVE_RMS: f64 = 0.1;
pub const POOR_FIT_CHI2: f64 = 4.0;

/// Parameters of the finite-size radial density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityParams {
    pub q: f64,
    pub h: f64,
    pub fit_residual: Option<f64>,
    pub q_fixed: bool,
}

impl DensityParams {
    pub fn new(q: f64, h: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) || !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "q and h must be positive and finite, got q = {q}, h = {h}"
            )));
        }
        Ok(Self {
            q,
            h,
            fit_residual: None,
            q_fixed: false,
        })
    }

    pub fn radius(&self) -> f64 {
        support_radius(self.q)
    }
}

pub fn support_radius(q: f64) -> f64 {
    q.powf(-0.5)
}

#[inline]
fn planar_formula(r: f64, q: f64) -> f64 {
    q * q / (PI * ((1.0 - q).powi(2) + 4.0 * q * q * r * r).sqrt())
}

/// Limiting density in the complex plane.
pub fn density_complex(lam: Complex64, q: f64) -> f64 {
    let r = lam.norm();
    if r > support_radius(q) {
        0.0
    } else {
        planar_formula(r, q)
    }
}

/// Limiting density of eigenvalue moduli, `2πx ρ(x)`.
pub fn density_radial(x: f64, q: f64) -> f64 {
    2.0 * PI * x * density_complex(Complex64::new(x, 0.0), q)
}

/// Radial factor evaluated from its formula for all `x >= 0` (no cutoff).
fn radial_unclipped(x: f64, q: f64) -> f64 {
    2.0 * PI * x * planar_formula(x, q)
}

/// Finite-size radial density `½ ρ_rad(x) erfc(h (x - q^{-1/2}))`.
pub fn density_effective(x: f64, p: &DensityParams) -> f64 {
    effective(x, p.q, p.h)
}

#[inline]
fn effective(x: f64, q: f64, h: f64) -> f64 {
    0.5 * radial_unclipped(x, q) * libm::erfc(h * (x - support_radius(q)))
}

/// `∫₀^∞ ρ_eff dx`; the erfc damping does not preserve unit mass exactly.
pub fn effective_integral(p: &DensityParams) -> f64 {
    let edge = p.radius();
    let upper = edge + 40.0 / p.h;
    integrate(|x| density_effective(x, p), 0.0, edge, 1e-12)
        + integrate(|x| density_effective(x, p), edge, upper, 1e-12)
}

/// Normalised histogram of eigenvalue moduli.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialHistogram {
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    /// Moduli counted in the histogram.
    pub total_count: usize,
    /// Moduli removed by the exclusion threshold.
    pub n_excluded: usize,
}

impl RadialHistogram {
    pub fn n_bins(&self) -> usize {
        self.densities.len()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn mass(&self) -> f64 {
        self.densities.iter().zip(self.widths()).map(|(d, w)| d * w).sum()
    }

    /// CSV columns `bin_center,density,model_density`.
    pub fn write_csv<W: Write>(&self, w: W, model: Option<&DensityParams>) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["bin_center", "density", "model_density"])?;
        for (c, d) in self.centers().into_iter().zip(&self.densities) {
            let m = model.map(|p| density_effective(c, p).to_string()).unwrap_or_default();
            out.write_record([c.to_string(), d.to_string(), m])?;
        }
        out.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

/// Histogram construction options.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HistogramOptions {
    /// Bin count; defaults to `⌈√count⌉` capped at 100.
    pub bins: Option<usize>,
    /// Moduli strictly above this are excluded.
    pub exclude_above: Option<f64>,
    /// Upper edge of the last bin; defaults to the largest retained modulus.
    pub upper: Option<f64>,
}

impl HistogramOptions {
    /// Default exclusion at three times the nominal support radius.
    pub fn for_nominal_q(q: f64) -> Self {
        Self {
            exclude_above: Some(DEFAULT_EXCLUSION_FACTOR * support_radius(q)),
            ..Self::default()
        }
    }
}

pub fn default_bins(count: usize) -> usize {
    ((count as f64).sqrt().ceil() as usize).clamp(MIN_BINS, MAX_DEFAULT_BINS)
}

/// Histogram of the moduli of a (pooled) list of eigenvalues.
pub fn radial_histogram(eigs: &[Complex64], opts: HistogramOptions) -> Result<RadialHistogram> {
    histogram_of_moduli(eigs.iter().map(|z| z.norm()), opts)
}

pub fn histogram_of_moduli<I: IntoIterator<Item = f64>>(
    moduli: I,
    opts: HistogramOptions,
) -> Result<RadialHistogram> {
    let mut kept = Vec::new();
    let mut n_excluded = 0;
    for m in moduli {
        match opts.exclude_above {
            Some(limit) if m > limit => n_excluded += 1,
            _ => kept.push(m),
        }
    }
    if kept.len() < MIN_EIGENVALUES {
        return Err(Error::TooFewEigenvalues {
            count: kept.len(),
            required: MIN_EIGENVALUES,
        });
    }
    let bins = opts.bins.unwrap_or_else(|| default_bins(kept.len()));
    if bins < MIN_BINS {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_BINS} bins are required, got {bins}"
        )));
    }
    let max = kept.iter().copied().fold(0.0, f64::max);
    let upper = opts.upper.unwrap_or(max);
    if !(upper > 0.0) || max > upper {
        return Err(Error::InvalidArgument(format!(
            "histogram upper edge {upper} does not cover the largest modulus {max}"
        )));
    }
    let width = upper / bins as f64;
    let bin_edges: Vec<f64> = (0..=bins).map(|k| k as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    for m in &kept {
        let k = ((m / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let total = kept.len() as f64;
    Ok(RadialHistogram {
        densities: counts.iter().map(|&c| c as f64 / (total * width)).collect(),
        bin_edges,
        total_count: kept.len(),
        n_excluded,
    })
}

/// How `q` is treated when fitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QMode {
    Fixed(f64),
    Free,
}

fn sse(hist: &RadialHistogram, centers: &[f64], q: f64, h: f64) -> f64 {
    centers
        .iter()
        .zip(&hist.densities)
        .map(|(&c, &d)| (effective(c, q, h) - d).powi(2))
        .sum()
}

fn near_bound(v: f64, (lo, hi): (f64, f64)) -> bool {
    (v / lo).ln().abs() < 1e-6 || (v / hi).ln().abs() < 1e-6
}

fn fit_h(hist: &RadialHistogram, centers: &[f64], q: f64) -> (f64, f64) {
    let m = golden_section(
        |lh| sse(hist, centers, q, lh.exp()),
        H_BOUNDS.0.ln(),
        H_BOUNDS.1.ln(),
        1e-9,
        500,
    );
    (m.x.exp(), m.value)
}

/// Unweighted least-squares fit of the finite-size density to bin heights at bin centres.
///
/// With `QMode::Fixed` only `h` is fitted (golden section on `ln h`); with
/// `QMode::Free` `(h, q)` are fitted jointly by a simplex search in
/// `(ln h, ln q)` started from the best point of a `q` grid.
pub fn fit_density(hist: &RadialHistogram, q_mode: QMode) -> Result<DensityParams> {
    let centers = hist.centers();
    let nb = centers.len() as f64;
    let (q, h, value) = match q_mode {
        QMode::Fixed(q) => {
            if !(q > 0.0) {
                return Err(Error::InvalidArgument(format!("q must be positive, got {q}")));
            }
            let (h, v) = fit_h(hist, &centers, q);
            (q, h, v)
        }
        QMode::Free => {
            let (lq0, lq1) = (Q_BOUNDS.0.ln(), Q_BOUNDS.1.ln());
            let grid = 80;
            let (mut q0, mut h0, mut best) = (1.0, 10.0, f64::INFINITY);
            for k in 0..=grid {
                let q = (lq0 + (lq1 - lq0) * k as f64 / grid as f64).exp();
                let (h, v) = fit_h(hist, &centers, q);
                if v < best {
                    (q0, h0, best) = (q, h, v);
                }
            }
            let in_bounds = |lh: f64, lq: f64| {
                lh >= H_BOUNDS.0.ln() && lh <= H_BOUNDS.1.ln() && lq >= lq0 && lq <= lq1
            };
            let m = nelder_mead_2d(
                |[lh, lq]| {
                    if in_bounds(lh, lq) {
                        sse(hist, &centers, lq.exp(), lh.exp())
                    } else {
                        f64::INFINITY
                    }
                },
                [h0.ln(), q0.ln()],
                [0.1, 0.05],
                1e-12,
                1e-9,
                4000,
            );
            if !m.converged {
                return Err(Error::FitNoConvergence(format!(
                    "simplex search stopped after {} iterations",
                    m.iterations
                )));
            }
            (m.x[1].exp(), m.x[0].exp(), m.value)
        }
    };

    if near_bound(h, H_BOUNDS) {
        return Err(Error::FitAtBound {
            param: "h",
            value: h,
            lower: H_BOUNDS.0,
            upper: H_BOUNDS.1,
        });
    }
    if matches!(q_mode, QMode::Free) && near_bound(q, Q_BOUNDS) {
        return Err(Error::FitAtBound {
            param: "q",
            value: q,
            lower: Q_BOUNDS.0,
            upper: Q_BOUNDS.1,
        });
    }
    Ok(DensityParams {
        q,
        h,
        fit_residual: Some((value / nb).sqrt()),
        q_fixed: matches!(q_mode, QMode::Fixed(_)),
    })
}

/// Summary of a fit, as written to `fit_report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub q_nominal: f64,
    pub q_fitted: f64,
    pub h_fitted: f64,
    /// RMS difference between bin heights and the model at bin centres.
    pub residual: f64,
    pub n_bins: usize,
    pub n_excluded: usize,
    pub q_fixed: bool,
    /// Largest absolute difference between bin heights and the model.
    pub sup_gap: f64,
    /// `residual` divided by the largest model value on the bin centres.
    pub relative_residual: f64,
    /// Mean squared residual in units of the Poisson variance of each bin
    /// under the model (at least one count per bin).
    pub reduced_chi2: f64,
    pub poor_fit: bool,
    /// `∫ ρ_eff dx - 1` for the fitted parameters.
    pub integral_deviation: f64,
}

impl FitReport {
    pub fn new(hist: &RadialHistogram, params: &DensityParams, q_nominal: f64) -> Self {
        let centers = hist.centers();
        let model: Vec<f64> = centers.iter().map(|&c| density_effective(c, params)).collect();
        let sup_gap = model
            .iter()
            .zip(&hist.densities)
            .map(|(m, d)| (m - d).abs())
            .fold(0.0, f64::max);
        let rms = (model
            .iter()
            .zip(&hist.densities)
            .map(|(m, d)| (m - d).powi(2))
            .sum::<f64>()
            / model.len() as f64)
            .sqrt();
        let peak = model.iter().copied().fold(0.0, f64::max);
        let relative_residual = if peak > 0.0 { rms / peak } else { f64::INFINITY };
        let scale = hist.total_count as f64;
        let reduced_chi2 = model
            .iter()
            .zip(&hist.densities)
            .zip(hist.widths())
            .map(|((m, d), w)| {
                let var = (m / (scale * w)).max(1.0 / (scale * w).powi(2));
                (m - d).powi(2) / var
            })
            .sum::<f64>()
            / model.len() as f64;
        Self {
            q_nominal,
            q_fitted: params.q,
            h_fitted: params.h,
            residual: params.fit_residual.unwrap_or(rms),
            n_bins: hist.n_bins(),
            n_excluded: hist.n_excluded,
            q_fixed: params.q_fixed,
            sup_gap,
            relative_residual,
            reduced_chi2,
            poor_fit: relative_residual > POOR_FIT_RELATIVE_RMS && reduced_chi2 > POOR_FIT_CHI2,
            integral_deviation: effective_integral(params) - 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn complex_density_values() {
        let q = 5.0;
        let r = support_radius(q);
        assert_eq!(density_complex(Complex64::new(0.0, 2.0 * r), q), 0.0);
        assert_eq!(density_complex(Complex64::new(2.0 * support_radius(0.7), 0.0), 0.7), 0.0);
        assert!((density_complex(Complex64::new(0.0, 0.0), q) - 25.0 / (4.0 * PI)).abs() < 1e-14);
        let inside = Complex64::from_polar(r * (1.0 - 1e-15), 0.3);
        assert!((density_complex(inside, q) - 25.0 / (6.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn radial_density_values() {
        assert_eq!(density_radial(0.0, 5.0), 0.0);
        let q = 8.4;
        let edge = support_radius(q) * (1.0 - 1e-15);
        let want = 2.0 * q.powf(1.5) / (1.0 + q);
        assert!((density_radial(edge, q) - want).abs() < 1e-10);
        assert!((want - 5.179).abs() < 1e-3);
        // Composition, exactly as defined.
        for k in 0..20 {
            let x = k as f64 * 0.02;
            assert_eq!(
                density_radial(x, 5.0),
                2.0 * PI * x * density_complex(Complex64::new(x, 0.0), 5.0)
            );
        }
    }

    #[test]
    fn radial_density_is_normalised() {
        for q in [1.5, 5.0, 8.4] {
            let v = integrate(|x| density_radial(x, q), 0.0, support_radius(q), 1e-13);
            assert!((v - 1.0).abs() < 1e-9, "q = {q}: {v}");
            // Closed-form antiderivative ½(√((1-q)² + 4q²x²) - |1-q|) at the edge.
            let closed = 0.5 * (((1.0 - q) * (1.0 - q) + 4.0 * q).sqrt() - (1.0 - q).abs());
            assert!((closed - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn effective_density_limits() {
        let p = DensityParams::new(5.0, 27.9).unwrap();
        let edge = p.radius();
        assert!((density_effective(edge, &p) - 0.5 * radial_unclipped(edge, 5.0)).abs() < 1e-15);
        let steep = DensityParams::new(5.0, 1e6).unwrap();
        let x = edge - 0.1;
        assert!((density_effective(x, &steep) - density_radial(x, 5.0)).abs() < 1e-12);
        assert!(density_effective(2.0 * edge, &p) >= 0.0);
    }

    /// Maclaurin series for erf, independent of the library erfc.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            term *= -x * x / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        2.0 / PI.sqrt() * sum
    }

    #[test]
    fn effective_density_matches_series_oracle() {
        let (q, h, x) = (5.0f64, 27.9f64, 0.4f64);
        let rad = 2.0 * PI * x * q * q / (PI * ((1.0 - q).powi(2) + 4.0 * q * q * x * x).sqrt());
        let oracle = 0.5 * rad * (1.0 - erf_series(h * (x - q.powf(-0.5))));
        let got = density_effective(x, &DensityParams::new(q, h).unwrap());
        assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
    }

    #[test]
    fn effective_edge_is_decreasing() {
        for (q, h) in [(5.0, 27.9), (8.4, 50.0), (1.5, 3.0)] {
            let p = DensityParams::new(q, h).unwrap();
            let edge = p.radius();
            let mut prev = density_effective(edge, &p);
            for k in 1..=300 {
                let x = edge + 3.0 / h * k as f64 / 300.0;
                let v = density_effective(x, &p);
                assert!(v < prev, "q={q} h={h} x={x}");
                prev = v;
            }
        }
    }

    #[test]
    fn integral_deviation_is_small_but_nonzero() {
        let p = DensityParams::new(5.0, 27.9).unwrap();
        let dev = effective_integral(&p) - 1.0;
        assert!(dev.abs() > 1e-6 && dev.abs() < 0.05, "{dev}");
    }

    #[test]
    fn uniform_moduli_histogram() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let moduli: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        let h = histogram_of_moduli(
            moduli,
            HistogramOptions {
                bins: Some(10),
                upper: Some(1.0),
                ..Default::default()
            },
        )
        .unwrap();
        // Each bin count is Binomial(1000, 0.1): sd 9.49, so density sd 0.0949.
        for d in &h.densities {
            assert!((d - 1.0).abs() < 3.0 * 0.0949, "{d}");
        }
        assert!((h.mass() - 1.0).abs() < 1e-9);
        assert_eq!(h.bin_edges[0], 0.0);
    }

    #[test]
    fn unit_circle_mass_lands_in_top_bin() {
        let base = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(-1.0, 0.0),
        ];
        let opts = HistogramOptions {
            bins: Some(2),
            upper: Some(1.0),
            ..Default::default()
        };
        assert!(radial_histogram(&base, opts).is_err());
        let pooled: Vec<Complex64> = base.iter().cycle().take(12).copied().collect();
        let h = radial_histogram(&pooled, HistogramOptions { bins: Some(5), ..opts }).unwrap();
        assert_eq!(h.densities[..4], [0.0; 4]);
        assert!((h.densities[4] * 0.2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exclusion_is_counted() {
        let mut eigs = vec![Complex64::new(0.1, 0.1); 20];
        eigs.push(Complex64::new(36.4, 0.0));
        let h = radial_histogram(&eigs, HistogramOptions::for_nominal_q(5.0)).unwrap();
        assert_eq!(h.n_excluded, 1);
        assert_eq!(h.total_count, 20);
        assert!(matches!(
            radial_histogram(&eigs[..9], HistogramOptions::default()),
            Err(Error::TooFewEigenvalues { .. })
        ));
        assert!(radial_histogram(
            &eigs,
            HistogramOptions {
                bins: Some(4),
                ..Default::default()
            }
        )
        .is_err());
    }

    #[test]
    fn default_bin_rule() {
        assert_eq!(default_bins(5000), 71);
        assert_eq!(default_bins(20_000), 100);
        assert_eq!(default_bins(12), 5);
    }

    /// Draws moduli from the effective density by inverting a tabulated CDF.
    fn sample_effective(p: &DensityParams, n: usize, seed: u64) -> Vec<f64> {
        let upper = p.radius() + 8.0 / p.h;
        let grid = 20_000;
        let dx = upper / grid as f64;
        let mut cdf = vec![0.0; grid + 1];
        for k in 1..=grid {
            let (a, b) = ((k - 1) as f64 * dx, k as f64 * dx);
            let mid = 0.5 * (a + b);
            cdf[k] = cdf[k - 1]
                + dx / 6.0 * (density_effective(a, p) + 4.0 * density_effective(mid, p) + density_effective(b, p));
        }
        let total = cdf[grid];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let u = rng.random::<f64>() * total;
                let k = cdf.partition_point(|&c| c < u).clamp(1, grid);
                let frac = (u - cdf[k - 1]) / (cdf[k] - cdf[k - 1]).max(f64::MIN_POSITIVE);
                ((k - 1) as f64 + frac) * dx
            })
            .collect()
    }

    #[test]
    fn fit_recovers_synthetic_parameters() {
        let truth = DensityParams::new(8.4, 50.0).unwrap();
        let moduli = sample_effective(&truth, 100_000, 11);
        let hist = histogram_of_moduli(moduli, HistogramOptions::default()).unwrap();
        let free = fit_density(&hist, QMode::Free).unwrap();
        assert!((free.q / 8.4 - 1.0).abs() < 0.05, "q = {}", free.q);
        assert!((free.h / 50.0 - 1.0).abs() < 0.2, "h = {}", free.h);
        assert!(!free.q_fixed);
        let fixed = fit_density(&hist, QMode::Fixed(8.4)).unwrap();
        assert!((fixed.h / 50.0 - 1.0).abs() < 0.2, "h = {}", fixed.h);
        assert!(fixed.q_fixed && fixed.q == 8.4);
        let report = FitReport::new(&hist, &fixed, 8.4);
        assert!(!report.poor_fit, "{report:?}");
    }

    #[test]
    fn flat_histogram_is_a_poor_fit() {
        let moduli: Vec<f64> = (0..2000).map(|k| (k as f64 + 0.5) / 2000.0).collect();
        let hist = histogram_of_moduli(
            moduli,
            HistogramOptions {
                bins: Some(20),
                upper: Some(1.0),
                ..Default::default()
            },
        )
        .unwrap();
        match fit_density(&hist, QMode::Fixed(5.0)) {
            Ok(p) => assert!(FitReport::new(&hist, &p, 5.0).poor_fit),
            Err(e) => assert!(matches!(e, Error::FitAtBound { .. }), "{e}"),
        }
    }
}
