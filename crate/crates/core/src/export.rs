//! CSV and JSON writers for matrices, spectra and scans.
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! values always produce identical bytes.

use std::io::Write;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::corrmat::{AsymCorrMatrix, JointMode, MaxEigPoint};
use crate::eig::{ComplexSpectrum, SourceDims};
use crate::error::{Error, Result};
use crate::resample::SlidingScan;

fn finish<W: Write>(mut out: csv::Writer<W>) -> Result<()> {
    out.flush().map_err(|e| Error::Csv(e.into()))
}

/// Plain numeric CSV, one matrix row per line, no header.
pub fn write_matrix_csv<W: Write>(m: ArrayView2<f64>, w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for row in m.rows() {
        out.write_record(row.iter().map(|x| x.to_string()))?;
    }
    finish(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub tau: i64,
    pub entries: Vec<Vec<f64>>,
}

impl From<&AsymCorrMatrix> for MatrixJson {
    fn from(k: &AsymCorrMatrix) -> Self {
        Self {
            n: k.n(),
            tau: k.lag,
            entries: k.entries.rows().into_iter().map(|r| r.to_vec()).collect(),
        }
    }
}

/// `re,im` per eigenvalue, sorted by real then imaginary part.
pub fn write_spectrum_csv<W: Write>(s: &ComplexSpectrum, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["re", "im"])?;
    for z in s.sorted() {
        out.write_record([z.re.to_string(), z.im.to_string()])?;
    }
    finish(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumJson {
    pub eigenvalues: Vec<[f64; 2]>,
    pub source_dims: Option<SourceDims>,
}

impl From<&ComplexSpectrum> for SpectrumJson {
    fn from(s: &ComplexSpectrum) -> Self {
        Self {
            eigenvalues: s.sorted().into_iter().map(|z| [z.re, z.im]).collect(),
            source_dims: s.source_dims,
        }
    }
}

/// `tau,abs_lambda_max,re,im,kbar_N`.
pub fn write_scan_csv<W: Write>(points: &[MaxEigPoint], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["tau", "abs_lambda_max", "re", "im", "kbar_N"])?;
    for p in points {
        out.write_record([
            p.tau.to_string(),
            p.lambda_max.norm().to_string(),
            p.lambda_max.re.to_string(),
            p.lambda_max.im.to_string(),
            p.kbar_n.to_string(),
        ])?;
    }
    finish(out)
}

/// `start,tau,abs_lambda_max,re,im`.
pub fn write_windows_csv<W: Write>(scan: &SlidingScan, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["start", "tau", "abs_lambda_max", "re", "im"])?;
    for p in &scan.points {
        out.write_record([
            p.start.to_string(),
            p.tau.to_string(),
            p.lambda_max.norm().to_string(),
            p.lambda_max.re.to_string(),
            p.lambda_max.im.to_string(),
        ])?;
    }
    finish(out)
}

/// `tau,<name>...,band` with one column per series, lags starting at 1.
pub fn write_autocorr_csv<W: Write>(names: &[String], series: &[Vec<f64>], band: f64, w: W) -> Result<()> {
    if names.len() != series.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} names for {} series",
            names.len(),
            series.len()
        )));
    }
    let len = series.iter().map(Vec::len).min().unwrap_or(0);
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["tau".to_string()];
    header.extend(names.iter().cloned());
    header.push("band".into());
    out.write_record(&header)?;
    for k in 0..len {
        let mut rec = vec![(k + 1).to_string()];
        rec.extend(series.iter().map(|s| s[k].to_string()));
        rec.push(band.to_string());
        out.write_record(&rec)?;
    }
    finish(out)
}

/// `index,system1,system2` for one joint eigenvector.
pub fn write_mode_csv<W: Write>(mode: &JointMode, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "system1", "system2"])?;
    for (i, (a, b)) in mode.system1.iter().zip(&mode.system2).enumerate() {
        out.write_record([i.to_string(), a.to_string(), b.to_string()])?;
    }
    finish(out)
}

/// `rank,eigenvalue` for a descending real spectrum.
pub fn write_real_spectrum_csv<W: Write>(values: &[f64], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["rank", "eigenvalue"])?;
    for (i, v) in values.iter().enumerate() {
        out.write_record([(i + 1).to_string(), v.to_string()])?;
    }
    finish(out)
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<T: Serialize, W: Write>(value: &T, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}
