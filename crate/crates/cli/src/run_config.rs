//! Run configuration documents, one per subcommand.

use std::path::Path;

use cknsym::variational::{DescentOptions, Grid, ProblemParams, SolveOptions};
use cknsym::{Regime, SymmetryConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Reads and parses a TOML document. A missing or unreadable file is an I/O
/// failure; anything the parser rejects is a validation failure.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnumerateConfig {
    pub n: usize,
    pub regime: Regime,
    #[serde(default)]
    pub alpha_max: u32,
    /// Also report a largest pairwise-distinct subfamily.
    #[serde(default)]
    pub max_distinct: bool,
}

fn default_trials() -> usize {
    1000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckGroupConfig {
    pub config: SymmetryConfig,
    /// Random pairs for the homomorphism check.
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistinguishConfig {
    pub a: SymmetryConfig,
    pub b: SymmetryConfig,
}

fn default_samples() -> usize {
    8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitConfig {
    pub config: SymmetryConfig,
    pub point: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_shift() -> f64 {
    0.5
}

/// `q = q_crit - q_shift`; a shift of zero is the exploratory critical run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub p: f64,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default = "default_shift")]
    pub q_shift: f64,
}

fn default_half_width() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub points: usize,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
}

fn default_checkpoint_every() -> usize {
    10
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub config: SymmetryConfig,
    pub problem: ProblemSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub descent: DescentOptions,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_checkpoint_every")]
    pub checkpoint_every: usize,
}

impl SolveConfig {
    /// Validates everything and builds the solver inputs.
    pub fn resolve(&self) -> Result<(ProblemParams, SolveOptions), CliError> {
        self.config.validate()?;
        let spec = self.problem;
        let base = ProblemParams::new(self.config.n, spec.p, spec.a, spec.b)?;
        let params = if spec.q_shift == 0.0 { base } else { base.subcritical(spec.q_shift)? };
        let grid = Grid::new(self.config.n, self.grid.points, self.grid.half_width)?;
        let options = SolveOptions { grid, descent: self.descent.clone(), seed: self.seed };
        Ok((params, options))
    }
}
