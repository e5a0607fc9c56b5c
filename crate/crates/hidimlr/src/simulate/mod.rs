//! Synthetic data generation and the Monte Carlo harness producing
//! uniformity, coverage and Q-Q summaries.

mod config;
mod gen;
mod harness;
mod ks;

pub use config::{CovariateFamily, OmegaMode, SimConfig};
pub use gen::{gen_coefficients, gen_covariates, gen_labels, gen_sigma_ar1};
pub use harness::{
    run_monte_carlo, run_monte_carlo_with_threads, FailureCounts, RepRecord, RepStatus,
    SimSummary,
};
pub use ks::ks_distance;
