use std::path::PathBuf;

use clap::Args;
use loewner_core::chains::ChainOptions;
use loewner_core::normalize::NormalizeOptions;
use loewner_core::spectrum::TOL_RES;
use loewner_core::{Error, Result};

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Jet degree (truncates inputs; resonance enumeration depth).
    #[arg(long, global = true)]
    pub degree: Option<usize>,
    /// Real-defect tolerance for resonances.
    #[arg(long, global = true, default_value_t = TOL_RES)]
    pub tol_res: f64,
    /// Koenigs convergence tolerance.
    #[arg(long, global = true, default_value_t = 1e-11)]
    pub tol_conv: f64,
    /// Residual tolerance for `verify`.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_residual: f64,
    /// Number of steps observed (families and scenarios).
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    /// RK4 step for Herglotz inputs and scenarios that integrate.
    #[arg(long, global = true)]
    pub step: Option<f64>,
    /// Seed for the PDE sample points.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for CSV tables.
    #[arg(long, global = true)]
    pub plot_data: Option<PathBuf>,
    /// Output file (stdout if absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("tol-res", self.tol_res), ("tol-conv", self.tol_conv), ("tol-residual", self.tol_residual)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parse(format!("--{name} must be positive, got {v}")));
            }
        }
        if let Some(s) = self.step {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::Parse(format!("--step must be positive, got {s}")));
            }
        }
        if matches!(self.degree, Some(d) if d < 2) {
            return Err(Error::Parse("--degree must be at least 2".into()));
        }
        if self.horizon == Some(0) {
            return Err(Error::Parse("--horizon must be at least 1".into()));
        }
        Ok(())
    }

    pub fn normalize_options(&self) -> NormalizeOptions {
        NormalizeOptions {
            tol_res: self.tol_res,
            ..Default::default()
        }
    }

    pub fn chain_options(&self) -> ChainOptions {
        ChainOptions {
            tol_conv: self.tol_conv,
            normalize: self.normalize_options(),
            ..Default::default()
        }
    }
}
