//! Lagged cross-correlation matrices between two multivariate time series,
//! their complex spectra, and random-matrix null models for them.

pub mod corrmat;
pub mod eig;
pub mod error;
pub mod export;
pub mod ingest;
pub mod numeric;
pub mod optimize;
pub mod pca;
pub mod resample;
pub mod rmt;

pub use corrmat::{
    joint_matrix, joint_modes, lagged_cross, maxeig_scan, mean_corr, mean_field_spectrum, pearson,
    AsymCorrMatrix, JointCorrMatrix, JointMode, MaxEigPoint, SymCorrMatrix,
};
pub use eig::{eig_general, eig_symmetric, ComplexSpectrum, SourceDims, SymEigen};
pub use error::{Error, Result};
pub use ingest::{load_pair, log_returns, standardize, PriceFormat, PriceTable, ReturnPanel};
pub use pca::{decompose, loading_matrix, pc_lagged_cross, reconstruct, LoadingMatrix, PcaDecomposition};
pub use resample::{
    bootstrap_spectra, generate_factor_model, generate_null, reshuffle_panels, sliding_windows,
    BootstrapSpec, EnsembleResult, FactorModel, Space,
};
pub use rmt::{fit_density, radial_histogram, DensityParams, FitReport, HistogramOptions, QMode, RadialHistogram};
