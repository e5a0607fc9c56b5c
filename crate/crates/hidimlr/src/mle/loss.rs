use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

/// Softmax of a logit vector, computed with max subtraction so finite input
/// can never overflow. Invariant under adding a constant to every entry.
pub fn softmax_probs(u: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let m = u.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut out = Array1::from_iter(u.iter().map(|&v| (v - m).exp()));
    let sum = out.sum();
    out.mapv_inplace(|v| v / sum);
    Ok(out)
}

pub(crate) fn softmax_rows(u: &Array2<f64>) -> Array2<f64> {
    let mut p = u.clone();
    for mut row in p.rows_mut() {
        let m = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - m).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    p
}

fn log_sum_exp(u: ArrayView1<'_, f64>) -> f64 {
    let m = u.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    m + u.iter().map(|&v| (v - m).exp()).sum::<f64>().ln()
}

/// Total cross-entropy `Σ_i [−Σ_k y_ik u_ik + log Σ_k exp(u_ik)]` over all
/// observations. Invariant under per-row shifts of the logits.
pub fn cross_entropy(u: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> Result<f64> {
    if u.shape() != y.shape() {
        return Err(Error::InvalidData(format!(
            "logits are {:?} but responses are {:?}",
            u.shape(),
            y.shape()
        )));
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut total = 0.0;
    for (urow, yrow) in u.rows().into_iter().zip(y.rows()) {
        let dot: f64 = urow.iter().zip(yrow.iter()).map(|(a, b)| a * b).sum();
        total += log_sum_exp(urow) - dot;
    }
    if !total.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(total)
}

/// Per-observation gradient and Hessian of the cross-entropy at fitted
/// probabilities: `g = p̂ − y`, `H = diag(p̂) − p̂ p̂ᵀ`.
pub fn per_obs_grad_hess(
    p_hat: ArrayView1<'_, f64>,
    y: ArrayView1<'_, f64>,
) -> Result<(Array1<f64>, SymMatrix)> {
    let m = p_hat.len();
    if y.len() != m {
        return Err(Error::InvalidData("probability/response length mismatch".into()));
    }
    if p_hat.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::InvalidData("probabilities must lie in [0, 1]".into()));
    }
    if (p_hat.sum() - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidData("probabilities must sum to 1".into()));
    }
    let g = Array1::from_iter(p_hat.iter().zip(y.iter()).map(|(p, yv)| p - yv));
    let h = SymMatrix::from_fn(m, |i, j| {
        if i == j {
            p_hat[i] * (1.0 - p_hat[i])
        } else {
            -p_hat[i] * p_hat[j]
        }
    });
    Ok((g, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn softmax_uniform() {
        let p = softmax_probs(array![0.0, 0.0, 0.0].view()).unwrap();
        for &v in p.iter() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_shift_invariant() {
        let u = array![1.3, -0.2, 2.5];
        let shifted = &u + 7.0;
        let a = softmax_probs(u.view()).unwrap();
        let b = softmax_probs(shifted.view()).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_extreme_logit() {
        let p = softmax_probs(array![30.0, 0.0, 0.0].view()).unwrap();
        let expected = 1.0 / (1.0 + 2.0 * (-30.0f64).exp());
        assert!((p[0] - expected).abs() < 1e-12);
        assert!(p.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn softmax_rejects_nan() {
        assert_eq!(
            softmax_probs(array![f64::NAN, 0.0].view()).unwrap_err(),
            Error::NonFinite
        );
    }

    #[test]
    fn cross_entropy_zero_logits() {
        let u = Array2::zeros((4, 3));
        let y = array![
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0]
        ];
        let v = cross_entropy(u.view(), y.view()).unwrap();
        assert!((v - 4.0 * 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_decreases_to_zero_on_confident_fit() {
        let y = array![[1.0, 0.0, 0.0]];
        let mut prev = f64::INFINITY;
        for &t in &[1.0, 5.0, 20.0, 100.0] {
            let u = array![[t, 0.0, 0.0]];
            let v = cross_entropy(u.view(), y.view()).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-8);
    }

    #[test]
    fn cross_entropy_q2_hand_value() {
        let u = array![[1.0, 0.0, 0.0]];
        let y = array![[0.5, 0.5, 0.0]];
        let v = cross_entropy(u.view(), y.view()).unwrap();
        let expected = -0.5 + (std::f64::consts::E + 2.0).ln();
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_row_shift_invariant() {
        let u = array![[0.4, -1.0, 2.0], [1.0, 1.0, -3.0]];
        let y = array![[0.0, 1.0, 0.0], [0.5, 0.5, 0.0]];
        let base = cross_entropy(u.view(), y.view()).unwrap();
        for &c in &[-10.0, -1.0, 0.5, 10.0] {
            let shifted = &u + c;
            let v = cross_entropy(shifted.view(), y.view()).unwrap();
            assert!((v - base).abs() <= 1e-12 * (1.0 + base.abs()));
        }
    }

    #[test]
    fn grad_hess_at_fitted_point() {
        let p = array![0.2, 0.3, 0.5];
        let (g, h) = per_obs_grad_hess(p.view(), p.view()).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
        // rows of H sum to zero
        for r in h.row_sums() {
            assert!(r.abs() < 1e-15);
        }
    }

    #[test]
    fn hess_uniform_binary() {
        let p = array![0.5, 0.5];
        let y = array![1.0, 0.0];
        let (_, h) = per_obs_grad_hess(p.view(), y.view()).unwrap();
        assert!((h[(0, 0)] - 0.25).abs() < 1e-15);
        assert!((h[(0, 1)] + 0.25).abs() < 1e-15);
        assert!((h[(1, 1)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn hess_psd_and_bounded() {
        let p = array![0.1, 0.6, 0.3];
        let y = array![0.0, 0.0, 1.0];
        let (_, h) = per_obs_grad_hess(p.view(), y.view()).unwrap();
        let eig = crate::linalg::sym_eig(&h).unwrap();
        assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-14 && l <= 1.0 + 1e-14));
    }
}
