//! Experiment configuration files (TOML).
//!
//! Top-level keys set the master seed, output path and solver options; each
//! `[experiment]` table enables one sweep. Unknown keys are rejected.
//!
//! ```toml
//! seed = 7
//!
//! [solver]
//! kind = "ipm"
//!
//! [separation]
//! deltas = [0.02, 0.04, 0.06, 0.1, 0.2]
//! trials = 50
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default)]
    pub seed: u64,
    /// CSV destination (overridden by `--out`).
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub solver: SolverSection,
    pub runtime: Option<RuntimeConfig>,
    pub mse_snr: Option<MseSnrConfig>,
    pub separation: Option<SeparationConfig>,
    pub compression: Option<CompressionConfig>,
    #[serde(rename = "phase_L_N")]
    pub phase_l_n: Option<PhaseLnConfig>,
    #[serde(rename = "phase_L_rho")]
    pub phase_l_rho: Option<PhaseLRhoConfig>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    /// `ipm` or `admm`.
    pub kind: String,
    pub max_iter: usize,
    pub gap_tol: f64,
    pub admm_max_iter: usize,
    pub vanm_cap: usize,
    /// Multiplier of the default regularization weight.
    pub lambda_scale: f64,
    pub epsilon: f64,
    pub success_threshold: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let opts = danm::SolverOptions::default();
        Self {
            kind: "ipm".into(),
            max_iter: opts.max_iter,
            gap_tol: opts.gap_tol,
            admm_max_iter: opts.admm_max_iter,
            vanm_cap: danm::anm::DEFAULT_VANM_CAP,
            lambda_scale: 1.0,
            epsilon: danm::pairing::DEFAULT_EPSILON,
            success_threshold: danm::metrics::DEFAULT_SUCCESS_THRESHOLD,
        }
    }
}

fn methods(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// Wall time versus `N = M`, noise-free.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RuntimeConfig {
    pub sizes: Vec<usize>,
    pub l: usize,
    pub min_sep: f64,
    pub methods: Vec<String>,
    pub trials: usize,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        Self { sizes: vec![8, 10, 12, 14, 16], l: 4, min_sep: 0.1, methods: methods(&["danm", "vanm"]), trials: 5 }
    }
}

/// Frequency MSE versus SNR.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct MseSnrConfig {
    pub snr_db: Vec<f64>,
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub min_sep: f64,
    pub methods: Vec<String>,
    pub trials: usize,
}

impl Default for MseSnrConfig {
    fn default() -> Self {
        Self {
            snr_db: vec![0.0, 10.0, 20.0, 30.0],
            n: 16,
            m: 16,
            l: 4,
            min_sep: 0.1,
            methods: methods(&["danm", "vanm", "cs"]),
            trials: 50,
        }
    }
}

/// Success rate of two sources versus their separation, noise-free.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SeparationConfig {
    pub deltas: Vec<f64>,
    pub n: usize,
    pub m: usize,
    pub methods: Vec<String>,
    pub trials: usize,
}

impl Default for SeparationConfig {
    fn default() -> Self {
        Self { deltas: vec![0.02, 0.04, 0.06, 0.1, 0.2], n: 16, m: 16, methods: methods(&["danm"]), trials: 50 }
    }
}

/// Success rate versus compression ratio `ρ = K_x K_y / (N M)`, noise-free.
/// `K_x = K_y = round(N √ρ)` for square problems (`round(dim·√ρ)` per axis).
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CompressionConfig {
    pub rhos: Vec<f64>,
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub min_sep: f64,
    /// `bernoulli`, `gaussian` or `select`.
    pub kind: String,
    pub methods: Vec<String>,
    pub trials: usize,
}

impl Default for CompressionConfig {
    fn default() -> Self {
        Self {
            rhos: vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.35, 0.5],
            n: 16,
            m: 16,
            l: 4,
            min_sep: 0.1,
            kind: "bernoulli".into(),
            methods: methods(&["danm"]),
            trials: 50,
        }
    }
}

/// Success rate over number of sources and `N = M`, noise-free.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseLnConfig {
    pub ls: Vec<usize>,
    pub sizes: Vec<usize>,
    pub min_sep: f64,
    pub methods: Vec<String>,
    pub trials: usize,
}

impl Default for PhaseLnConfig {
    fn default() -> Self {
        Self { ls: (1..=8).collect(), sizes: vec![8, 12, 16], min_sep: 0.05, methods: methods(&["danm"]), trials: 50 }
    }
}

/// Success rate over number of sources and compression ratio, noise-free.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseLRhoConfig {
    pub ls: Vec<usize>,
    pub rhos: Vec<f64>,
    pub n: usize,
    pub m: usize,
    pub min_sep: f64,
    pub kind: String,
    pub methods: Vec<String>,
    pub trials: usize,
}

impl Default for PhaseLRhoConfig {
    fn default() -> Self {
        Self {
            ls: (1..=8).collect(),
            rhos: vec![0.1, 0.2, 0.3, 0.5, 0.7, 1.0],
            n: 16,
            m: 16,
            min_sep: 0.05,
            kind: "bernoulli".into(),
            methods: methods(&["danm"]),
            trials: 20,
        }
    }
}

impl BenchConfig {
    pub fn parse(text: &str, path: &Path) -> CliResult<Self> {
        let cfg: BenchConfig =
            toml::from_str(text).map_err(|e| CliError::Config { path: path.to_path_buf(), message: e.to_string() })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Names of the enabled experiments in run order.
    pub fn enabled(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.runtime.is_some() {
            out.push("runtime");
        }
        if self.mse_snr.is_some() {
            out.push("mse_snr");
        }
        if self.separation.is_some() {
            out.push("separation");
        }
        if self.compression.is_some() {
            out.push("compression");
        }
        if self.phase_l_n.is_some() {
            out.push("phase_L_N");
        }
        if self.phase_l_rho.is_some() {
            out.push("phase_L_rho");
        }
        out
    }
}
