//! Multinomial logistic (cross-entropy) maximum-likelihood fitting with
//! feature significance tests that remain valid when the number of features
//! is a sizable fraction of the sample size.
//!
//! The classical Fisher-information chi-square test for a single feature
//! breaks down once p/n is not small: its p-values pile up near zero on
//! null coordinates. This crate fits the multinomial logistic MLE with a
//! Newton solver, then forms a corrected statistic whose null distribution
//! is chi-square with K degrees of freedom even in that regime. A
//! simulation harness replicates the supporting experiments at desk scale.
//!
//! ```
//! use hidimlr::{
//!     fit_mle, gen_coefficients, gen_covariates, gen_labels, gen_sigma_ar1,
//!     test_feature, CovariateFamily, Dataset, FitConfig, OmegaSpec,
//! };
//!
//! // three classes, six features; the generator forces the last feature null
//! let (n, p, k) = (80, 6, 2);
//! let sigma = gen_sigma_ar1(p, 0.3).unwrap();
//! let x = gen_covariates(n, p, CovariateFamily::Gaussian, &sigma, 11).unwrap();
//! let a_star = gen_coefficients(p, k, &sigma, 12).unwrap();
//! let y = gen_labels(&x, &a_star, 1, 13);
//! let data = Dataset::new(x, y, 1).unwrap();
//!
//! let fit = fit_mle(&data, &FitConfig::default()).unwrap();
//! let report = test_feature(&fit, data.x().view(), p - 1, &OmegaSpec::Estimate).unwrap();
//! assert_eq!(report.dof, 2);
//! assert!(report.p_value > 0.0 && report.p_value <= 1.0);
//! ```

mod error;
pub mod linalg;
pub mod mle;
pub mod inference;
pub mod simulate;

mod guide;

pub use error::{Error, Result};
pub use inference::{
    classical_test, compute_v_sum, estimate_omega_jj, omega_from_sigma, test_feature,
    test_feature_with_solver, Backend, KronSolver, OmegaSource, OmegaSpec, TestReport,
};
pub use mle::{
    build_q, check_balance, check_boundedness, cross_entropy, fit_mle, per_obs_grad_hess,
    softmax_probs, Dataset, FitConfig, FitResult, QBasis,
};
pub use simulate::{
    gen_coefficients, gen_covariates, gen_labels, gen_sigma_ar1, ks_distance,
    run_monte_carlo, run_monte_carlo_with_threads, CovariateFamily, FailureCounts,
    OmegaMode, RepRecord, RepStatus, SimConfig, SimSummary,
};
