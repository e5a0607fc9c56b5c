use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovariateFamily {
    Gaussian,
    Rademacher,
    Snp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmegaMode {
    /// Invert the generating covariance once and use the exact diagonal.
    Known,
    /// Re-estimate the precision diagonal from each replicated design.
    Estimated,
}

/// Full description of one Monte Carlo experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub p: usize,
    pub k: usize,
    #[serde(default = "default_q")]
    pub q: usize,
    /// AR(1) correlation parameter of the covariate covariance.
    pub rho: f64,
    #[serde(default = "default_family")]
    pub covariate_family: CovariateFamily,
    pub reps: usize,
    pub seed: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// One-based index of the coordinate tested in every repetition;
    /// defaults to p, which the coefficient generator forces to zero.
    #[serde(default)]
    pub null_index: Option<usize>,
    #[serde(default = "default_omega_mode")]
    pub omega_mode: OmegaMode,
}

fn default_q() -> usize {
    1
}
fn default_alpha() -> f64 {
    0.05
}
fn default_family() -> CovariateFamily {
    CovariateFamily::Gaussian
}
fn default_omega_mode() -> OmegaMode {
    OmegaMode::Estimated
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if self.p < 2 {
            return Err(Error::InvalidConfig("p must be at least 2".into()));
        }
        if self.n <= self.p {
            return Err(Error::InvalidConfig(format!(
                "need n > p (n = {}, p = {})",
                self.n, self.p
            )));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidConfig(format!(
                "rho must lie in [0, 1), got {}",
                self.rho
            )));
        }
        if self.reps < 1 {
            return Err(Error::InvalidConfig("reps must be at least 1".into()));
        }
        if self.q < 1 {
            return Err(Error::InvalidConfig("q must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig("alpha must lie in (0, 1)".into()));
        }
        let j = self.null_index.unwrap_or(self.p);
        if j < 1 || j > self.p {
            return Err(Error::InvalidConfig(format!(
                "null_index must lie in 1..={}, got {j}",
                self.p
            )));
        }
        if self.p.div_ceil(4) < self.k {
            return Err(Error::InvalidConfig(format!(
                "need ceil(p/4) >= k so the coefficient Gram is nonsingular \
                 (p = {}, k = {})",
                self.p, self.k
            )));
        }
        Ok(())
    }

    /// Zero-based index of the tested coordinate.
    pub fn null_index_zero_based(&self) -> usize {
        self.null_index.unwrap_or(self.p) - 1
    }
}
