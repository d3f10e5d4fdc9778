//! Principal components of a standardized panel, lagged correlations between
//! the components of two systems, and autocorrelation diagnostics.
//!
//! With `C = V Λ Vᵀ` the Pearson matrix of a panel `R`, the components are
//! `e = Λ^{-1/2} Vᵀ R` and `R = W e` with `W_ij = √λ_j V_ij`. Hence
//! `k(τ) = W¹ k^e(τ) W²ᵀ` for the lagged matrices of two systems.

use std::io::Write;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::corrmat::{lagged_products, pearson, AsymCorrMatrix};
use crate::eig::{eig_symmetric, SymEigen};
use crate::error::{Error, Result};
use crate::ingest::ReturnPanel;
use crate::numeric::{compensated_dot, compensated_sum};

/// Components with `λ < DEGENERACY_RATIO · λ_max` are dropped.
pub const DEGENERACY_RATIO: f64 = 1e-10;
/// Discarded eigenvalue mass below this (per asset) counts as a full decomposition.
const NEGLIGIBLE_MASS: f64 = 1e-10;
/// A series counts as centred when `|mean| <= CENTERING_TOL · rms`.
const CENTERING_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaDecomposition {
    pub eigen: SymEigen,
    /// `kept × T` component series.
    pub components: Array2<f64>,
    pub kept: usize,
    pub label: String,
    pub dates: Vec<chrono::NaiveDate>,
}

impl PcaDecomposition {
    pub fn n(&self) -> usize {
        self.eigen.eigenvalues.len()
    }

    pub fn t(&self) -> usize {
        self.components.ncols()
    }

    /// `λ_i / N` for the retained components.
    pub fn variance_shares(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.eigen.eigenvalues[..self.kept].iter().map(|l| l / n).collect()
    }

    /// Eigenvalue mass of the dropped components, as a fraction of `N`.
    pub fn discarded_fraction(&self) -> f64 {
        self.eigen.eigenvalues[self.kept..].iter().map(|l| l.max(0.0)).sum::<f64>() / self.n() as f64
    }

    /// Keeps only the leading `k` components.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.kept {
            return Err(Error::InvalidArgument(format!(
                "cannot keep {k} of {} retained components",
                self.kept
            )));
        }
        Ok(Self {
            components: self.components.slice(ndarray::s![..k, ..]).to_owned(),
            kept: k,
            ..self.clone()
        })
    }

    fn require_full(&self) -> Result<()> {
        let discarded = self.discarded_fraction();
        if discarded > NEGLIGIBLE_MASS {
            return Err(Error::Truncated {
                kept: self.kept,
                n: self.n(),
                discarded,
            });
        }
        Ok(())
    }

    /// Component series as a standardized panel with tickers `PC001`, `PC002`, ...
    pub fn to_panel(&self) -> ReturnPanel {
        ReturnPanel {
            values: self.components.clone(),
            tickers: (1..=self.kept).map(|i| format!("PC{i:03}")).collect(),
            dates: self.dates.clone(),
            standardized: true,
            label: self.label.clone(),
        }
    }
}

/// `N × N` loading matrix with `W Wᵀ = C`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadingMatrix {
    pub entries: Array2<f64>,
}

pub fn decompose(r: &ReturnPanel) -> Result<PcaDecomposition> {
    let c = pearson(r)?;
    let eigen = eig_symmetric(c.entries.view())?;
    let lmax = eigen.eigenvalues[0];
    let kept = eigen
        .eigenvalues
        .iter()
        .take_while(|&&l| l > DEGENERACY_RATIO * lmax)
        .count();
    let t = r.t();
    let columns = r.values.t().as_standard_layout().to_owned();
    let mut components = Array2::zeros((kept, t));
    for i in 0..kept {
        let scale = 1.0 / eigen.eigenvalues[i].sqrt();
        let v: Vec<f64> = eigen.eigenvectors.column(i).to_vec();
        for (tt, out) in components.row_mut(i).iter_mut().enumerate() {
            *out = scale * compensated_dot(&v, columns.row(tt).as_slice().expect("standard layout"));
        }
    }
    Ok(PcaDecomposition {
        eigen,
        components,
        kept,
        label: r.label.clone(),
        dates: r.dates.clone(),
    })
}

/// `Σ_j √λ_j V_ij e_jt` over retained components.
fn expand(d: &PcaDecomposition) -> Array2<f64> {
    let w = loadings(d);
    let n = d.n();
    let t = d.t();
    let e = d.components.t().as_standard_layout().to_owned();
    let mut out = Array2::zeros((n, t));
    for i in 0..n {
        let wi = w.row(i).to_vec();
        for tt in 0..t {
            out[[i, tt]] = compensated_dot(&wi, e.row(tt).as_slice().expect("standard layout"));
        }
    }
    out
}

fn loadings(d: &PcaDecomposition) -> Array2<f64> {
    let n = d.n();
    let mut w = Array2::zeros((n, d.kept));
    for j in 0..d.kept {
        let s = d.eigen.eigenvalues[j].sqrt();
        for i in 0..n {
            w[[i, j]] = s * d.eigen.eigenvectors[[i, j]];
        }
    }
    w
}

/// Rebuilds the original panel from a full decomposition.
pub fn reconstruct(d: &PcaDecomposition) -> Result<ReturnPanel> {
    d.require_full()?;
    Ok(reconstruct_truncated(d).0)
}

/// Reconstruction from the retained components only, with the relative
/// squared error `||R - R̂||² / ||R||²`, which equals the discarded eigenvalue mass over `N`.
pub fn reconstruct_truncated(d: &PcaDecomposition) -> (ReturnPanel, f64) {
    let values = expand(d);
    let n = d.n();
    let panel = ReturnPanel {
        values,
        tickers: (0..n).map(|i| format!("{}{i:03}", d.label)).collect(),
        dates: d.dates.clone(),
        standardized: false,
        label: d.label.clone(),
    };
    (panel, d.discarded_fraction())
}

pub fn loading_matrix(d: &PcaDecomposition) -> Result<LoadingMatrix> {
    d.require_full()?;
    Ok(LoadingMatrix { entries: loadings(d) })
}

/// `k^e(τ)` between the components of two systems.
pub fn pc_lagged_cross(d1: &PcaDecomposition, d2: &PcaDecomposition, tau: i64) -> Result<AsymCorrMatrix> {
    if d1.kept != d2.kept {
        return Err(Error::DimensionMismatch(format!(
            "retained components differ: {} vs {}",
            d1.kept, d2.kept
        )));
    }
    let entries = lagged_products(d1.components.view(), d2.components.view(), tau)?;
    Ok(AsymCorrMatrix {
        entries,
        lag: tau,
        effective_t: d1.t() - tau.unsigned_abs() as usize,
        source_labels: (d1.label.clone(), d2.label.clone()),
    })
}

/// One row of the component-correlation diagnostics table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcDiagnosticRow {
    pub tau: i64,
    pub k11: f64,
    pub k22: f64,
    pub k12: f64,
    pub k21: f64,
}

/// Leading 2×2 block of `k^e(τ)` for each lag in `taus`.
pub fn pc_diagnostics(d1: &PcaDecomposition, d2: &PcaDecomposition, taus: &[i64]) -> Result<Vec<PcDiagnosticRow>> {
    if d1.kept < 2 || d2.kept < 2 {
        return Err(Error::InvalidArgument("need at least two components per system".into()));
    }
    let head1 = d1.truncate(2)?;
    let head2 = d2.truncate(2)?;
    taus.iter()
        .map(|&tau| {
            let k = pc_lagged_cross(&head1, &head2, tau)?.entries;
            Ok(PcDiagnosticRow {
                tau,
                k11: k[[0, 0]],
                k22: k[[1, 1]],
                k12: k[[0, 1]],
                k21: k[[1, 0]],
            })
        })
        .collect()
}

pub fn write_pc_diagnostics<W: Write>(rows: &[PcDiagnosticRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// `a(τ) = (1/(T-τ)) Σ_t x_t x_{t+τ} / var` for `τ = 1..=max_lag`.
pub fn autocorr(series: ArrayView1<f64>, max_lag: usize) -> Result<Vec<f64>> {
    let x = series.to_vec();
    let t = x.len();
    if max_lag == 0 || 2 * max_lag >= t {
        return Err(Error::InvalidArgument(format!(
            "max_lag must satisfy 1 <= max_lag < T/2, got {max_lag} for T = {t}"
        )));
    }
    let var = compensated_dot(&x, &x) / t as f64;
    if !(var > 0.0) {
        return Err(Error::ZeroVariance { ticker: String::new() });
    }
    let mean = compensated_sum(x.iter().copied()) / t as f64;
    if mean.abs() > CENTERING_TOL * var.sqrt() {
        return Err(Error::NotCentered { mean });
    }
    Ok((1..=max_lag)
        .map(|tau| compensated_dot(&x[..t - tau], &x[tau..]) / ((t - tau) as f64 * var))
        .collect())
}

/// Half-width of the 99.7% band for the autocorrelation of white noise.
pub fn confidence_band(t: usize) -> f64 {
    3.0 / (t as f64).sqrt()
}

/// Effective sample size `T / (1 + 2 Σ_{τ=1}^{L} a(τ))` averaged over the series.
///
/// `L` is the first lag whose autocorrelation lies inside the confidence band
/// (or `T/2 - 1` if none does). Each estimate is clamped to `[1, T]`, so
/// negatively correlated series report `T`.
pub fn effective_t(series: &[Array1<f64>]) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::InvalidArgument("no series supplied".into()));
    }
    let mut total = 0.0;
    for s in series {
        let t = s.len();
        let band = confidence_band(t);
        let max_lag = (t / 2).saturating_sub(1).max(1);
        // Validates the series and gives a(1); later lags are computed only until one enters the band.
        let first = autocorr(s.view(), 1)?[0];
        let x = s.to_vec();
        let var = compensated_dot(&x, &x) / t as f64;
        let mut sum = 0.0;
        for tau in 1..=max_lag {
            let v = if tau == 1 {
                first
            } else {
                compensated_dot(&x[..t - tau], &x[tau..]) / ((t - tau) as f64 * var)
            };
            sum += v;
            if v.abs() < band {
                break;
            }
        }
        let denom = 1.0 + 2.0 * sum;
        let tf = t as f64;
        total += if denom <= 0.0 { tf } else { (tf / denom).clamp(1.0, tf) };
    }
    Ok(total / series.len() as f64)
}

/// Autocorrelations of the leading `count` components.
pub fn component_autocorr(d: &PcaDecomposition, count: usize, max_lag: usize) -> Result<Vec<Vec<f64>>> {
    d.components
        .axis_iter(Axis(0))
        .take(count)
        .map(|row| autocorr(row, max_lag))
        .collect()
}
