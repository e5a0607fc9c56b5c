use ndarray::ArrayView2;

use crate::error::{Error, Result};
use crate::inference::omega::estimate_omega_jj;
use crate::inference::OmegaSpec;
use crate::linalg::{chi2_sf, Cholesky, SymMatrix};
use crate::mle::FitResult;

/// Fisher-information baseline: the statistic `n‖S_j^{-1/2} Âᵀe_j‖²` with
/// `S_j = Ω_jj · W^{-1}`, where `W` is the plug-in empirical mean of
/// `diag(π̂_i) − π̂_i π̂_iᵀ` over the first K fitted probabilities. Valid when
/// p is small relative to n; anti-conservative otherwise.
pub fn classical_test(
    fit: &FitResult,
    x: ArrayView2<'_, f64>,
    j: usize,
    omega: &OmegaSpec,
) -> Result<(f64, f64)> {
    let p = fit.n_features();
    if j >= p {
        return Err(Error::IndexOutOfRange { index: j, p });
    }
    let omega_jj = match omega {
        OmegaSpec::Known(v) => {
            if !(*v > 0.0) {
                return Err(Error::Domain("omega_jj must be positive".into()));
            }
            *v
        }
        OmegaSpec::Estimate => estimate_omega_jj(x, j)?,
    };
    classical_test_with_omega(fit, j, omega_jj)
}

pub(crate) fn classical_test_with_omega(
    fit: &FitResult,
    j: usize,
    omega_jj: f64,
) -> Result<(f64, f64)> {
    let n = fit.n_obs();
    let k = fit.k();

    // plug-in Fisher block over the log-odds probabilities π̂_i = p̂_i[..K]
    let w = SymMatrix::from_fn(k, |a, b| {
        let mut v = 0.0;
        for i in 0..n {
            let pa = fit.p_hat[(i, a)];
            let pb = fit.p_hat[(i, b)];
            v += if a == b { pa * (1.0 - pa) } else { -pa * pb };
        }
        v / n as f64
    });
    Cholesky::new(&w).map_err(|_| Error::SingularFisher)?;

    let a_j = fit.a_hat.row(j);
    let wa = w.as_array().dot(&a_j);
    let statistic = (n as f64 / omega_jj) * a_j.dot(&wa);
    let p_value = chi2_sf(statistic, k)?;
    Ok((statistic, p_value))
}
