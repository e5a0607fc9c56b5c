//! The V-matrix machinery, the pivotal chi-square statistic, p-values, the
//! classical Fisher-information baseline, and the precision-diagonal
//! estimator.
//!
//! Statistics are computed in the K-dimensional orthogonal parametrization,
//! where the curvature matrix is invertible, and mapped back to the
//! (K+1)-class space afterwards. The explicit pseudo-inverse formulation in
//! the (K+1)-space survives only as a cross-check in the test suites.

mod classical;
mod feature;
mod kron;
mod omega;

pub use classical::classical_test;
pub use feature::{
    test_feature, test_feature_with_solver, OmegaSource, OmegaSpec, TestReport,
};
pub use kron::{compute_v_sum, Backend, KronSolver};
pub use omega::{estimate_omega_jj, omega_from_sigma};

