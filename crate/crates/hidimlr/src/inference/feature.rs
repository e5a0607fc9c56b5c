use ndarray::{Array1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::classical::classical_test_with_omega;
use crate::inference::kron::{v_sum_k, Backend, KronSolver};
use crate::inference::omega::estimate_omega_jj;
use crate::linalg::{chi2_sf, default_rel_tol, psd_sqrt_pinv, SymMatrix};
use crate::mle::{build_q, FitResult};

/// How to obtain the precision diagonal `Ω_jj` entering the statistic.
#[derive(Debug, Clone, PartialEq)]
pub enum OmegaSpec {
    /// Caller supplies the exact value (for instance from a known Σ).
    Known(f64),
    /// Estimate it from the design by residual regression.
    Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmegaSource {
    Known,
    Estimated,
}

/// Outcome of testing one feature: the pivotal statistic with its
/// chi-square p-value, plus the Fisher-information baseline for comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestReport {
    /// Zero-based column index of the tested feature.
    pub feature_index: usize,
    /// Value of the pivotal statistic; asymptotically χ²_K under the null.
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub omega_jj: f64,
    pub omega_source: OmegaSource,
    pub classical_statistic: f64,
    pub classical_p_value: f64,
    /// The standardized K-vector whose squared norm equals `statistic`;
    /// asymptotically standard normal under the null.
    pub whitened_coordinate: Vec<f64>,
}

/// Test whether feature `j` carries signal, using the degrees-of-freedom
/// corrected statistic that stays chi-square distributed when p/n is not
/// small. The backend for the curvature solve is chosen from the problem
/// shape.
pub fn test_feature(
    fit: &FitResult,
    x: ArrayView2<'_, f64>,
    j: usize,
    omega: &OmegaSpec,
) -> Result<TestReport> {
    let backend = Backend::auto(fit.n_obs(), fit.n_features(), fit.k());
    let solver = KronSolver::new(fit, x, backend)?;
    test_feature_with_solver(fit, x, j, omega, &solver)
}

/// As [`test_feature`], reusing an existing solver (several features can
/// share one factorization).
pub fn test_feature_with_solver(
    fit: &FitResult,
    x: ArrayView2<'_, f64>,
    j: usize,
    omega: &OmegaSpec,
    solver: &KronSolver,
) -> Result<TestReport> {
    let p = fit.n_features();
    let n = fit.n_obs();
    let k = fit.k();
    if j >= p {
        return Err(Error::IndexOutOfRange { index: j, p });
    }
    let (omega_jj, omega_source) = match omega {
        OmegaSpec::Known(v) => {
            if !(*v > 0.0) {
                return Err(Error::Domain("omega_jj must be positive".into()));
            }
            (*v, OmegaSource::Known)
        }
        OmegaSpec::Estimate => (estimate_omega_jj(x, j)?, OmegaSource::Estimated),
    };

    let v_k = v_sum_k(fit, x, solver)?;
    let q = build_q(k);
    let g_k = fit.g.dot(q.matrix()); // n×K gradient rows in the orthogonal basis
    let gram = SymMatrix::symmetrized(&(g_k.t().dot(&g_k) / n as f64));
    let whitener = psd_sqrt_pinv(&gram, default_rel_tol(k))?;

    let b_j = fit.b_ortho.row(j).to_owned();
    let vb = v_k.as_array().dot(&b_j);
    let scale = (n as f64 / omega_jj).sqrt();
    let a: Array1<f64> = whitener.as_array().dot(&vb) * scale;
    let statistic: f64 = a.iter().map(|v| v * v).sum();
    let p_value = chi2_sf(statistic, k)?;

    // standardized coordinate: rotate back to the class space, keep the
    // first K entries, and undo the projection-induced shrinkage
    let z = q.matrix().dot(&a); // K+1
    let c = 1.0 / ((k as f64 + 1.0).sqrt() + 1.0);
    let head_sum: f64 = z.iter().take(k).sum();
    let whitened_coordinate: Vec<f64> =
        (0..k).map(|i| z[i] + c * head_sum).collect();

    let (classical_statistic, classical_p_value) =
        classical_test_with_omega(fit, j, omega_jj)?;

    Ok(TestReport {
        feature_index: j,
        statistic,
        dof: k,
        p_value,
        omega_jj,
        omega_source,
        classical_statistic,
        classical_p_value,
        whitened_coordinate,
    })
}
