use std::path::PathBuf;

use asymspec_core::corrmat::{joint_modes, maxeig_scan, HalfSummary};
use asymspec_core::export::{
    write_autocorr_csv, write_mode_csv, write_real_spectrum_csv, write_scan_csv, write_spectrum_csv,
    write_windows_csv,
};
use asymspec_core::pca::{
    component_autocorr, confidence_band, effective_t, pc_diagnostics, write_pc_diagnostics,
};
use asymspec_core::resample::{null_ensemble, Space};
use asymspec_core::rmt::{support_radius, DEFAULT_EXCLUSION_FACTOR};
use asymspec_core::{
    bootstrap_spectra, decompose, fit_density, joint_matrix, lagged_cross, load_pair, loading_matrix,
    pc_lagged_cross, radial_histogram, reconstruct, reshuffle_panels, sliding_windows, BootstrapSpec,
    ComplexSpectrum, Error, FactorModel, FitReport, HistogramOptions, QMode, ReturnPanel,
};
use ndarray::Array1;
use serde::Serialize;

use crate::config::{
    required, FitMode, GenerateOpts, JointOpts, MaxEigOpts, McOpts, ModelKind, PcaOpts, SpaceArg,
    SpectrumOpts,
};
use crate::error::CliError;
use crate::output::OutDir;

const DEFAULT_SEED: u64 = 42;

fn load(a: Option<PathBuf>, b: Option<PathBuf>) -> Result<(ReturnPanel, ReturnPanel), CliError> {
    let (a, b) = (required(a, "a")?, required(b, "b")?);
    Ok(load_pair(&a, &b)?)
}

fn histogram_options(q_nominal: f64, bins: Option<usize>, exclude: Option<f64>) -> HistogramOptions {
    HistogramOptions {
        bins,
        exclude_above: Some(exclude.unwrap_or(DEFAULT_EXCLUSION_FACTOR * support_radius(q_nominal))),
        upper: None,
    }
}

/// Histogram, fit and report for a pooled spectrum, written as `<prefix>histogram.csv`
/// and `<prefix>fit_report.json`.
fn fit_and_write(
    out: &OutDir,
    prefix: &str,
    spectrum: &ComplexSpectrum,
    q_nominal: f64,
    mode: QMode,
    opts: HistogramOptions,
) -> Result<FitReport, CliError> {
    let hist = radial_histogram(&spectrum.eigenvalues, opts)?;
    let params = fit_density(&hist, mode)?;
    out.write(&format!("{prefix}histogram.csv"), |w| hist.write_csv(w, Some(&params)))?;
    let report = FitReport::new(&hist, &params, q_nominal);
    out.json(&format!("{prefix}fit_report.json"), &report)?;
    Ok(report)
}

pub fn spectrum(o: SpectrumOpts) -> Result<(), CliError> {
    let (a, b) = load(o.a, o.b)?;
    let out = OutDir::create(&required(o.out, "out")?)?;
    let tau = o.tau.unwrap_or(0);
    let subset = o.subset.unwrap_or(a.n().min(b.n()));
    let spec = BootstrapSpec {
        iterations: o.boot.unwrap_or(1),
        subset_size: subset,
        rng_seed: o.seed.unwrap_or(DEFAULT_SEED),
    };
    let space = match o.space.unwrap_or(SpaceArg::Returns) {
        SpaceArg::Returns => Space::Returns,
        SpaceArg::Pc => Space::PrincipalComponents,
    };
    let ens = bootstrap_spectra(&a, &b, tau, spec, space)?;
    out.write("eigenvalues.csv", |w| write_spectrum_csv(&ens.pooled, w))?;
    out.json("ensemble.json", &ens.summary())?;
    let q_nominal = a.t() as f64 / subset as f64;
    let mode = match o.fit.unwrap_or(FitMode::Fixed) {
        FitMode::Fixed => QMode::Fixed(o.q.unwrap_or(q_nominal)),
        FitMode::Free => QMode::Free,
    };
    let report = fit_and_write(&out, "", &ens.pooled, q_nominal, mode, histogram_options(q_nominal, o.bins, o.exclude))?;
    if report.poor_fit {
        eprintln!(
            "warning: bulk does not match the null density (relative RMS {:.3}, reduced chi-square {:.2})",
            report.relative_residual, report.reduced_chi2
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct WindowReport<'a> {
    window: usize,
    starts: &'a [usize],
    summary: &'a [asymspec_core::resample::WindowSummary],
}

pub fn maxeig(o: MaxEigOpts) -> Result<(), CliError> {
    let (a, b) = load(o.a, o.b)?;
    let out = OutDir::create(&required(o.out, "out")?)?;
    let (lo, hi) = (o.tau_min.unwrap_or(-10), o.tau_max.unwrap_or(10));
    if lo > hi {
        return Err(CliError::Usage(format!("tau-min {lo} exceeds tau-max {hi}")));
    }
    let points = maxeig_scan(&a, &b, lo..=hi)?;
    out.write("maxeig.csv", |w| write_scan_csv(&points, w))?;
    if let Some(window) = o.window {
        let starts = o.starts.unwrap_or_else(|| vec![0]);
        let taus: Vec<i64> = (lo..=hi).collect();
        let scan = sliding_windows(&a, &b, &taus, window, &starts)?;
        out.write("windows.csv", |w| write_windows_csv(&scan, w))?;
        out.json(
            "windows_summary.json",
            &WindowReport {
                window,
                starts: &starts,
                summary: &scan.summary,
            },
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct PcaReport {
    reshuffled: bool,
    #[serde(rename = "T")]
    t: usize,
    kept_a: usize,
    kept_b: usize,
    variance_shares_a: Vec<f64>,
    variance_shares_b: Vec<f64>,
    /// Largest `|k - W¹ k^e W²ᵀ|` over τ ∈ {0, 1, 5}; absent for truncated decompositions.
    factorization_residual: Option<f64>,
    /// Largest `|R - W e|` over both systems; absent for truncated decompositions.
    reconstruction_residual: Option<f64>,
    effective_t_leading: f64,
    effective_t_all: f64,
    q_nominal: f64,
    q_fitted: f64,
    h_fitted: f64,
    q_below_nominal: bool,
}

fn max_abs_diff(x: &ndarray::Array2<f64>, y: &ndarray::Array2<f64>) -> f64 {
    x.iter().zip(y.iter()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

pub fn pca(o: PcaOpts) -> Result<(), CliError> {
    let (mut a, mut b) = load(o.a, o.b)?;
    let out = OutDir::create(&required(o.out, "out")?)?;
    let seed = o.seed.unwrap_or(DEFAULT_SEED);
    let reshuffled = o.reshuffle.unwrap_or(false);
    if reshuffled {
        (a, b) = reshuffle_panels(&a, &b, seed)?;
    }
    let t = a.t();
    let (d1, d2) = (decompose(&a)?, decompose(&b)?);
    out.write("pcs_a.csv", |w| d1.to_panel().write_csv(w))?;
    out.write("pcs_b.csv", |w| d2.to_panel().write_csv(w))?;

    let tau_max = o.tau_max.unwrap_or(20);
    if tau_max < 0 {
        return Err(CliError::Usage(format!("tau-max must be non-negative, got {tau_max}")));
    }
    let taus: Vec<i64> = (0..=tau_max).collect();
    let rows = pc_diagnostics(&d1, &d2, &taus)?;
    out.write("ke_diagnostics.csv", |w| write_pc_diagnostics(&rows, w))?;

    let max_lag = o.max_lag.unwrap_or(tau_max as usize).clamp(1, (t / 2).saturating_sub(1).max(1));
    let mut series = component_autocorr(&d1, 2, max_lag)?;
    series.extend(component_autocorr(&d2, 2, max_lag)?);
    let names: Vec<String> = ["a_pc1", "a_pc2", "b_pc1", "b_pc2"].iter().take(series.len()).map(|s| s.to_string()).collect();
    out.write("autocorr.csv", |w| write_autocorr_csv(&names, &series, confidence_band(t), w))?;

    let rows_of = |d: &asymspec_core::PcaDecomposition, k: usize| -> Vec<Array1<f64>> {
        d.components.rows().into_iter().take(k).map(|r| r.to_owned()).collect()
    };
    let mut leading = rows_of(&d1, 2);
    leading.extend(rows_of(&d2, 2));
    let mut all = rows_of(&d1, d1.kept);
    all.extend(rows_of(&d2, d2.kept));

    let (factorization_residual, reconstruction_residual) = match (loading_matrix(&d1), loading_matrix(&d2)) {
        (Ok(w1), Ok(w2)) => {
            let mut worst: f64 = 0.0;
            for tau in [0i64, 1, 5].into_iter().filter(|&tau| (tau as usize) + 1 < t) {
                let k = lagged_cross(&a, &b, tau)?.entries;
                let ke = pc_lagged_cross(&d1, &d2, tau)?.entries;
                worst = worst.max(max_abs_diff(&k, &w1.entries.dot(&ke).dot(&w2.entries.t())));
            }
            let rec = max_abs_diff(&reconstruct(&d1)?.values, &a.values)
                .max(max_abs_diff(&reconstruct(&d2)?.values, &b.values));
            (Some(worst), Some(rec))
        }
        _ => (None, None),
    };

    let subset = o.subset.unwrap_or(a.n().min(b.n()));
    let spec = BootstrapSpec {
        iterations: o.boot.unwrap_or(1),
        subset_size: subset,
        rng_seed: seed,
    };
    let ens = bootstrap_spectra(&a, &b, 0, spec, Space::PrincipalComponents)?;
    out.write("pc_eigenvalues.csv", |w| write_spectrum_csv(&ens.pooled, w))?;
    let q_nominal = t as f64 / subset as f64;
    let fit = fit_and_write(&out, "pc_", &ens.pooled, q_nominal, QMode::Free, histogram_options(q_nominal, o.bins, None))?;

    let shares = |d: &asymspec_core::PcaDecomposition| d.variance_shares().into_iter().take(5).collect();
    let report = PcaReport {
        reshuffled,
        t,
        kept_a: d1.kept,
        kept_b: d2.kept,
        variance_shares_a: shares(&d1),
        variance_shares_b: shares(&d2),
        factorization_residual,
        reconstruction_residual,
        effective_t_leading: effective_t(&leading)?,
        effective_t_all: effective_t(&all)?,
        q_nominal,
        q_fitted: fit.q_fitted,
        h_fitted: fit.h_fitted,
        q_below_nominal: fit.q_fitted < 0.9 * q_nominal,
    };
    out.json("pca_report.json", &report)?;
    Ok(())
}

#[derive(Serialize)]
struct ModeSummary {
    rank: usize,
    eigenvalue: f64,
    system1: HalfSummary,
    system2: HalfSummary,
    /// `global` (both halves positive mean), `split` (opposite signs) or `mixed`.
    pattern: &'static str,
}

pub fn joint(o: JointOpts) -> Result<(), CliError> {
    let (a, b) = load(o.a, o.b)?;
    let out = OutDir::create(&required(o.out, "out")?)?;
    let j = joint_matrix(&a, &b)?;
    let (values, modes) = joint_modes(&j, o.top.unwrap_or(3))?;
    out.write("joint_spectrum.csv", |w| write_real_spectrum_csv(&values, w))?;
    for m in &modes {
        out.write(&format!("mode_{}.csv", m.rank), |w| write_mode_csv(m, w))?;
    }
    let summary: Vec<ModeSummary> = modes
        .iter()
        .map(|m| ModeSummary {
            rank: m.rank,
            eigenvalue: m.eigenvalue,
            system1: m.summary1,
            system2: m.summary2,
            pattern: if m.is_global() {
                "global"
            } else if m.is_split() {
                "split"
            } else {
                "mixed"
            },
        })
        .collect();
    out.json("joint_modes.json", &summary)?;
    Ok(())
}

pub fn mc_validate(o: McOpts) -> Result<(), CliError> {
    let (n, t, reps) = (o.n.unwrap_or(100), o.t.unwrap_or(500), o.reps.unwrap_or(50));
    let out = OutDir::create(&required(o.out, "out")?)?;
    let ens = null_ensemble(n, t, reps, o.tau.unwrap_or(0), o.seed.unwrap_or(7))?;
    out.write("eigenvalues.csv", |w| write_spectrum_csv(&ens.pooled, w))?;
    let q_nominal = t as f64 / n as f64;
    let q_model = o.q_overlay.unwrap_or(q_nominal);
    let opts = histogram_options(q_nominal, o.bins, None);
    match fit_and_write(&out, "", &ens.pooled, q_nominal, QMode::Fixed(q_model), opts) {
        Ok(report) if report.poor_fit => Err(CliError::Validation(format!(
            "null spectrum does not match the model at q = {q_model} (relative RMS {:.3}, reduced chi-square {:.2})",
            report.relative_residual, report.reduced_chi2
        ))),
        Ok(report) => {
            eprintln!(
                "ok: h = {:.2}, relative RMS {:.3}, {} bins",
                report.h_fitted,
                report.relative_residual,
                report.n_bins
            );
            Ok(())
        }
        Err(CliError::Data(e @ (Error::FitAtBound { .. } | Error::FitNoConvergence(_)))) => {
            Err(CliError::Validation(e.to_string()))
        }
        Err(e) => Err(e),
    }
}

#[derive(Serialize)]
struct GeneratedModel {
    kind: ModelKind,
    seed: u64,
    model: FactorModel,
}

pub fn generate(o: GenerateOpts) -> Result<(), CliError> {
    let out = OutDir::create(&required(o.out, "out")?)?;
    let (n, t, seed) = (o.n.unwrap_or(50), o.t.unwrap_or(500), o.seed.unwrap_or(1));
    let model = FactorModel {
        contemporaneous: o.contemporaneous.unwrap_or(0.0),
        anti_phase: o.anti_phase.unwrap_or(0.0),
        ar: o.ar.unwrap_or(0.0),
        ..FactorModel::new(n, t, o.g_within.unwrap_or(0.0), o.g_cross.unwrap_or(0.0), o.lag.unwrap_or(0))
    };
    let (a, b) = match o.model.unwrap_or(ModelKind::Null) {
        ModelKind::Null => asymspec_core::generate_null(n, t, seed)?,
        ModelKind::Factor => model.generate(seed)?,
    };
    out.write("a.csv", |w| a.to_prices(100.0)?.write_wide_csv(w))?;
    out.write("b.csv", |w| b.to_prices(100.0)?.write_wide_csv(w))?;
    out.json("model.json", &GeneratedModel { kind: o.model.unwrap_or(ModelKind::Null), seed, model })?;
    Ok(())
}
