//! Pearson, lagged asymmetric, mean-field and joint correlation matrices.
//!
//! All estimators take standardized panels and use the `1/T` (or `1/(T-|τ|)`)
//! normalisation. Inner products are accumulated with compensated summation.

use std::ops::RangeInclusive;

use ndarray::{s, Array2, ArrayView2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eig::{eig_general, eig_symmetric, ComplexSpectrum, SourceDims};
use crate::error::{Error, Result};
use crate::ingest::ReturnPanel;
use crate::numeric::{compensated_dot, compensated_sum};

/// Lagged correlation matrix between two systems.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymCorrMatrix {
    pub entries: Array2<f64>,
    pub lag: i64,
    pub effective_t: usize,
    pub source_labels: (String, String),
}

/// Equal-time correlation matrix of a single system.
#[derive(Debug, Clone, PartialEq)]
pub struct SymCorrMatrix {
    pub entries: Array2<f64>,
    pub source_label: String,
}

/// `2N x 2N` correlation matrix of two stacked systems.
#[derive(Debug, Clone, PartialEq)]
pub struct JointCorrMatrix {
    pub entries: Array2<f64>,
    pub block_size: usize,
}

impl AsymCorrMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn spectrum(&self) -> Result<ComplexSpectrum> {
        Ok(eig_general(self.entries.view())?.with_source(SourceDims {
            n: self.n(),
            t: self.effective_t + self.lag.unsigned_abs() as usize,
            tau: self.lag,
        }))
    }
}

impl JointCorrMatrix {
    pub fn block(&self, row: usize, col: usize) -> ArrayView2<'_, f64> {
        let n = self.block_size;
        self.entries
            .slice(s![row * n..(row + 1) * n, col * n..(col + 1) * n])
    }
}

/// `(1/len) Σ_t x[i, a0 + t] · y[j, b0 + t]` for all row pairs.
fn windowed_products(
    x: ArrayView2<f64>,
    y: ArrayView2<f64>,
    x_start: usize,
    y_start: usize,
    len: usize,
) -> Array2<f64> {
    let x = x.as_standard_layout();
    let y = y.as_standard_layout();
    let (nx, ny) = (x.nrows(), y.nrows());
    let norm = 1.0 / len as f64;
    let rows: Vec<Vec<f64>> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let xi = &x.row(i).to_slice().expect("standard layout")[x_start..x_start + len];
            (0..ny)
                .map(|j| {
                    let yj = &y.row(j).to_slice().expect("standard layout")[y_start..y_start + len];
                    compensated_dot(xi, yj) * norm
                })
                .collect()
        })
        .collect();
    Array2::from_shape_vec((nx, ny), rows.concat()).expect("shape")
}

/// Lagged cross products of two raw series matrices with equal T.
///
/// For `tau >= 0` the second matrix is read `tau` steps ahead; for `tau < 0`
/// the first one is.
pub(crate) fn lagged_products(
    x: ArrayView2<f64>,
    y: ArrayView2<f64>,
    tau: i64,
) -> Result<Array2<f64>> {
    let t = x.ncols();
    if y.ncols() != t {
        return Err(Error::DimensionMismatch(format!(
            "T differs: {} vs {}",
            t,
            y.ncols()
        )));
    }
    let shift = tau.unsigned_abs() as usize;
    if shift + 1 >= t {
        return Err(Error::LagOutOfRange { tau, t });
    }
    let len = t - shift;
    Ok(if tau >= 0 {
        windowed_products(x, y, 0, shift, len)
    } else {
        windowed_products(x, y, shift, 0, len)
    })
}

/// Pearson matrix `(1/T) R Rᵀ` of a standardized panel.
pub fn pearson(r: &ReturnPanel) -> Result<SymCorrMatrix> {
    r.check_standardized()?;
    Ok(SymCorrMatrix {
        entries: symmetric_products(r.values.view()),
        source_label: r.label.clone(),
    })
}

/// `(1/T) X Xᵀ`, computed on the upper triangle and mirrored.
pub(crate) fn symmetric_products(x: ArrayView2<f64>) -> Array2<f64> {
    let x = x.as_standard_layout();
    let (n, t) = x.dim();
    let norm = 1.0 / t as f64;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = x.row(i).to_slice().expect("standard layout");
            (i..n)
                .map(|j| compensated_dot(xi, x.row(j).to_slice().expect("standard layout")) * norm)
                .collect()
        })
        .collect();
    let mut c = Array2::zeros((n, n));
    for (i, row) in rows.into_iter().enumerate() {
        for (k, v) in row.into_iter().enumerate() {
            c[[i, i + k]] = v;
            c[[i + k, i]] = v;
        }
    }
    c
}

fn check_pair(r1: &ReturnPanel, r2: &ReturnPanel) -> Result<()> {
    r1.check_standardized()?;
    r2.check_standardized()?;
    if r1.values.dim() != r2.values.dim() {
        return Err(Error::DimensionMismatch(format!(
            "panels are {:?} and {:?}",
            r1.values.dim(),
            r2.values.dim()
        )));
    }
    Ok(())
}

/// Lagged asymmetric correlation matrix `k(τ)` between two standardized panels.
///
/// `k_ij(τ) = 1/(T-τ) Σ_{t} R1[i,t] R2[j,t+τ]` for `τ >= 0`. Negative lags
/// shift system 1 instead, so `k(r1, r2, -τ) = k(r2, r1, τ)ᵀ`.
pub fn lagged_cross(r1: &ReturnPanel, r2: &ReturnPanel, tau: i64) -> Result<AsymCorrMatrix> {
    check_pair(r1, r2)?;
    let entries = lagged_products(r1.values.view(), r2.values.view(), tau)?;
    Ok(AsymCorrMatrix {
        entries,
        lag: tau,
        effective_t: r1.t() - tau.unsigned_abs() as usize,
        source_labels: (r1.label.clone(), r2.label.clone()),
    })
}

/// Average of all entries, `(1/N²) Σ k_ij`.
pub fn mean_corr(k: &AsymCorrMatrix) -> f64 {
    mean_entry(k.entries.view())
}

pub(crate) fn mean_entry(m: ArrayView2<f64>) -> f64 {
    compensated_sum(m.iter().copied()) / m.len() as f64
}

/// Spectrum of `k̄ E_N`: one eigenvalue `k̄ N` and `N - 1` zeros.
pub fn mean_field_spectrum(kbar: f64, n: usize) -> Result<ComplexSpectrum> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let mut ev = vec![Complex64::new(0.0, 0.0); n];
    ev[0] = Complex64::new(kbar * n as f64, 0.0);
    Ok(ComplexSpectrum::new(ev))
}

/// Pearson matrix of the stacked `2N x T` panel.
pub fn joint_matrix(r1: &ReturnPanel, r2: &ReturnPanel) -> Result<JointCorrMatrix> {
    check_pair(r1, r2)?;
    let n = r1.n();
    let cross = lagged_products(r1.values.view(), r2.values.view(), 0)?;
    let mut entries = Array2::zeros((2 * n, 2 * n));
    entries
        .slice_mut(s![..n, ..n])
        .assign(&symmetric_products(r1.values.view()));
    entries
        .slice_mut(s![n.., n..])
        .assign(&symmetric_products(r2.values.view()));
    entries.slice_mut(s![..n, n..]).assign(&cross);
    entries.slice_mut(s![n.., ..n]).assign(&cross.t());
    Ok(JointCorrMatrix {
        entries,
        block_size: n,
    })
}

/// Sign statistics of one half of a joint eigenvector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfSummary {
    pub positive: usize,
    pub negative: usize,
    pub mean: f64,
}

impl HalfSummary {
    fn of(v: &[f64]) -> Self {
        Self {
            positive: v.iter().filter(|&&x| x > 0.0).count(),
            negative: v.iter().filter(|&&x| x < 0.0).count(),
            mean: compensated_sum(v.iter().copied()) / v.len() as f64,
        }
    }
}

/// An eigenvector of the joint matrix split into its system-1 and system-2 halves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointMode {
    /// 1-based rank by eigenvalue.
    pub rank: usize,
    pub eigenvalue: f64,
    pub system1: Vec<f64>,
    pub system2: Vec<f64>,
    pub summary1: HalfSummary,
    pub summary2: HalfSummary,
}

impl JointMode {
    /// Both halves have positive mean.
    pub fn is_global(&self) -> bool {
        self.summary1.mean > 0.0 && self.summary2.mean > 0.0
    }

    /// The halves have means of opposite sign.
    pub fn is_split(&self) -> bool {
        self.summary1.mean * self.summary2.mean < 0.0
    }
}

/// Spectrum of the joint matrix (descending) and its leading `top` eigenvectors.
///
/// Eigenvectors are oriented so the half with the larger absolute mean has
/// positive mean.
pub fn joint_modes(j: &JointCorrMatrix, top: usize) -> Result<(Vec<f64>, Vec<JointMode>)> {
    let eig = eig_symmetric(j.entries.view())?;
    let n = j.block_size;
    if top > 2 * n {
        return Err(Error::InvalidArgument(format!("requested {top} of {} modes", 2 * n)));
    }
    let modes = (0..top)
        .map(|k| {
            let mut v = eig.eigenvectors.column(k).to_vec();
            let (m1, m2) = (mean_of(&v[..n]), mean_of(&v[n..]));
            let dominant = if m1.abs() >= m2.abs() { m1 } else { m2 };
            if dominant < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            JointMode {
                rank: k + 1,
                eigenvalue: eig.eigenvalues[k],
                summary1: HalfSummary::of(&v[..n]),
                summary2: HalfSummary::of(&v[n..]),
                system1: v[..n].to_vec(),
                system2: v[n..].to_vec(),
            }
        })
        .collect();
    Ok((eig.eigenvalues, modes))
}

fn mean_of(v: &[f64]) -> f64 {
    compensated_sum(v.iter().copied()) / v.len() as f64
}

/// One row of a largest-eigenvalue scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxEigPoint {
    pub tau: i64,
    pub lambda_max: Complex64,
    /// Mean-field predictor `k̄(τ) N`.
    pub kbar_n: f64,
}

/// Largest-modulus eigenvalue of `k(τ)` and the mean-field value `k̄(τ) N` for each lag.
pub fn maxeig_scan(
    r1: &ReturnPanel,
    r2: &ReturnPanel,
    taus: RangeInclusive<i64>,
) -> Result<Vec<MaxEigPoint>> {
    check_pair(r1, r2)?;
    let t = r1.t();
    for tau in [*taus.start(), *taus.end()] {
        if tau.unsigned_abs() as usize + 1 >= t {
            return Err(Error::LagOutOfRange { tau, t });
        }
    }
    let taus: Vec<i64> = taus.collect();
    taus.into_par_iter()
        .map(|tau| {
            let k = lagged_cross(r1, r2, tau)?;
            let lambda_max = k
                .spectrum()?
                .max_modulus()
                .expect("nonempty spectrum");
            Ok(MaxEigPoint {
                tau,
                lambda_max,
                kbar_n: mean_corr(&k) * k.n() as f64,
            })
        })
        .collect()
}

/// `k(r2, r1, -τ)` obtained from `k(r1, r2, τ)`.
pub fn transpose_dual(k: &AsymCorrMatrix) -> AsymCorrMatrix {
    AsymCorrMatrix {
        entries: k.entries.t().to_owned(),
        lag: -k.lag,
        effective_t: k.effective_t,
        source_labels: (k.source_labels.1.clone(), k.source_labels.0.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::standardize;
    use ndarray::array;

    fn panel(m: Array2<f64>) -> ReturnPanel {
        let mut p = ReturnPanel::from_matrix("p", m).unwrap();
        p.standardized = true;
        p
    }

    #[test]
    fn pearson_small_cases() {
        let c = pearson(&panel(array![[1.0, -1.0], [1.0, -1.0]])).unwrap();
        assert_eq!(c.entries, Array2::<f64>::ones((2, 2)));
        let c = pearson(&panel(array![[1.0, -1.0], [-1.0, 1.0]])).unwrap();
        assert_eq!(c.entries, array![[1.0, -1.0], [-1.0, 1.0]]);
        let c = pearson(&panel(array![[1.0, -1.0], [-1.0, 1.0], [1.0, -1.0]])).unwrap();
        assert_eq!(
            c.entries,
            array![[1.0, -1.0, 1.0], [-1.0, 1.0, -1.0], [1.0, -1.0, 1.0]]
        );
    }

    #[test]
    fn pearson_requires_standardized() {
        let p = ReturnPanel::from_matrix("p", array![[1.0, -1.0]]).unwrap();
        assert!(matches!(pearson(&p), Err(Error::NotStandardized)));
        let mut p = p;
        p.values[[0, 0]] = 3.0;
        p.standardized = true;
        assert!(matches!(pearson(&p), Err(Error::NotStandardized)));
    }

    #[test]
    fn lagged_alternating_rows() {
        let r1 = panel(array![[1.0, -1.0, 1.0, -1.0]]);
        let r2 = panel(array![[-1.0, 1.0, -1.0, 1.0]]);
        let k = lagged_cross(&r1, &r2, 1).unwrap();
        assert_eq!(k.entries[[0, 0]], 1.0);
        assert_eq!(k.effective_t, 3);
        let k0 = lagged_cross(&r1, &r1, 0).unwrap();
        assert_eq!(k0.entries[[0, 0]], 1.0);
    }

    #[test]
    fn lagged_orthogonal_rows() {
        // r2 read one step ahead is (√2, -√2, 0) against r1's (1, 1, -1).
        let r1 = panel(array![[1.0, 1.0, -1.0, -1.0]]);
        let h = 2f64.sqrt();
        let r2 = panel(array![[0.0, h, -h, 0.0]]);
        let k = lagged_cross(&r1, &r2, 1).unwrap();
        assert!(k.entries[[0, 0]].abs() < 1e-15);
        let k = lagged_cross(&r1, &r1, 1).unwrap();
        assert!((k.entries[[0, 0]] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn lag_validation() {
        let r = panel(array![[1.0, -1.0, 1.0, -1.0]]);
        assert!(matches!(lagged_cross(&r, &r, 3), Err(Error::LagOutOfRange { .. })));
        assert!(matches!(lagged_cross(&r, &r, -3), Err(Error::LagOutOfRange { .. })));
        assert!(lagged_cross(&r, &r, 2).is_ok());
        let r2 = panel(array![[1.0, -1.0, 1.0, -1.0], [1.0, -1.0, 1.0, -1.0]]);
        assert!(matches!(lagged_cross(&r, &r2, 0), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn mean_corr_examples() {
        let k = |m: Array2<f64>| AsymCorrMatrix {
            entries: m,
            lag: 0,
            effective_t: 10,
            source_labels: Default::default(),
        };
        assert_eq!(mean_corr(&k(Array2::from_elem((3, 3), 0.5))), 0.5);
        assert_eq!(mean_corr(&k(array![[1.0, -1.0], [-1.0, 1.0]])), 0.0);
        assert!((mean_corr(&k(array![[0.2, 0.4], [0.6, 0.8]])) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mean_field_examples() {
        let s = mean_field_spectrum(0.5, 4).unwrap();
        assert_eq!(s.eigenvalues[0], Complex64::new(2.0, 0.0));
        assert!(s.eigenvalues[1..].iter().all(|z| *z == Complex64::new(0.0, 0.0)));
        let s = mean_field_spectrum(0.0, 7).unwrap();
        assert!(s.eigenvalues.iter().all(|z| z.norm() == 0.0));
        let s = mean_field_spectrum(-0.01, 200).unwrap();
        assert!((s.eigenvalues[0].re + 2.0).abs() < 1e-14);
        assert_eq!(s.len(), 200);
        assert!(mean_field_spectrum(1.0, 0).is_err());
    }

    #[test]
    fn joint_of_duplicated_system() {
        let raw = array![[1.0, 2.0, -0.5, 0.3], [0.2, -1.0, 0.7, 1.1], [-0.4, 0.1, 0.9, -2.0]];
        let r = standardize(&ReturnPanel::from_matrix("p", raw).unwrap()).unwrap();
        let j = joint_matrix(&r, &r).unwrap();
        let c = pearson(&r).unwrap();
        for (bi, bj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            for (a, b) in j.block(bi, bj).iter().zip(c.entries.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn joint_with_permuted_rows() {
        let raw = array![[1.0, 2.0, -0.5, 0.3], [0.2, -1.0, 0.7, 1.1], [-0.4, 0.1, 0.9, -2.0]];
        let r = standardize(&ReturnPanel::from_matrix("p", raw).unwrap()).unwrap();
        let perm = [2, 0, 1];
        let rp = r.select_rows(&perm);
        let j = joint_matrix(&r, &rp).unwrap();
        let c = pearson(&r).unwrap();
        for i in 0..3 {
            for k in 0..3 {
                assert!((j.block(0, 1)[[i, k]] - c.entries[[i, perm[k]]]).abs() < 1e-12);
            }
        }
    }
}
