//! Subcommand options. Every option can come from a flag or from a JSON
//! config file (`--config`); flags win.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    Fixed,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SpaceArg {
    Returns,
    Pc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Null,
    Factor,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumOpts {
    /// Price file of system 1 (long or wide CSV)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<PathBuf>,
    /// Price file of system 2
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<i64>,
    /// Bootstrap iterations
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boot: Option<usize>,
    /// Assets drawn per system and iteration (default: all)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subset: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceArg>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitMode>,
    /// q used by a fixed fit (default: T / subset)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    /// Exclude moduli above this value (default: 3 q^{-1/2})
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exclude: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaxEigOpts {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_min: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_max: Option<i64>,
    /// Window length for the sliding-window scan (omit to skip it)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    /// Window starts, comma separated
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub starts: Option<Vec<usize>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PcaOpts {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<PathBuf>,
    /// Largest lag of the component correlation table
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_max: Option<i64>,
    /// Largest lag of the autocorrelation table (default: tau-max, capped below T/2)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_lag: Option<usize>,
    /// Permute time within each system before the analysis
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reshuffle: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boot: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subset: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JointOpts {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<PathBuf>,
    /// Number of leading eigenvectors to export
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McOpts {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<i64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// q of the overlaid model (default: T / N)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_overlay: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateOpts {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_within: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_cross: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lag: Option<i64>,
    /// Same-day loading of system 2 on the system-1 factor
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contemporaneous: Option<f64>,
    /// Loading on a factor entering the two systems with opposite signs
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anti_phase: Option<f64>,
    /// AR(1) coefficient of factors and idiosyncratic terms
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ar: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Overlays flag values on the config file contents.
pub fn resolve<T: Serialize + DeserializeOwned>(
    flags: &T,
    file: Option<&Path>,
    subcommand: &str,
) -> Result<T, CliError> {
    let Some(path) = file else {
        return serde_json::from_value(serde_json::to_value(flags).map_err(json_err)?).map_err(json_err);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|source| asymspec_core::Error::Io { path: path.to_path_buf(), source })?;
    let mut base: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let obj = base
        .as_object_mut()
        .ok_or_else(|| CliError::Usage(format!("{}: config must be a JSON object", path.display())))?;
    if let Some(sc) = obj.remove("subcommand") {
        if sc.as_str() != Some(subcommand) {
            return Err(CliError::Usage(format!(
                "{}: config is for subcommand {sc}, not {subcommand}",
                path.display()
            )));
        }
    }
    if let Value::Object(over) = serde_json::to_value(flags).map_err(json_err)? {
        obj.extend(over);
    }
    serde_json::from_value(base).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn json_err(e: serde_json::Error) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn required<T>(v: Option<T>, name: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing required option --{name}")))
}
