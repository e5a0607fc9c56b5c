use ndarray::Array2;

/// Orthonormal basis of the subspace of `R^{K+1}` orthogonal to the all-ones
/// vector: `QᵀQ = I_K` and `QQᵀ = I_{K+1} − 1·1ᵀ/(K+1)`.
///
/// The construction is deterministic: the first K columns of the Householder
/// reflection that maps `1/√(K+1)` to the last canonical basis vector.
#[derive(Debug, Clone)]
pub struct QBasis {
    k: usize,
    q: Array2<f64>,
}

impl QBasis {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn classes(&self) -> usize {
        self.k + 1
    }

    /// The (K+1)×K matrix itself.
    pub fn matrix(&self) -> &Array2<f64> {
        &self.q
    }
}

pub fn build_q(k: usize) -> QBasis {
    assert!(k >= 1, "K must be at least 1");
    let m = k + 1;
    let a = 1.0 / (m as f64).sqrt();
    // u = a·1 − e_m, reflector H = I − 2uuᵀ/‖u‖²
    let mut u = vec![a; m];
    u[m - 1] -= 1.0;
    let norm2: f64 = u.iter().map(|v| v * v).sum();
    let mut q = Array2::zeros((m, k));
    for col in 0..k {
        for row in 0..m {
            let e = if row == col { 1.0 } else { 0.0 };
            q[(row, col)] = e - 2.0 * u[row] * u[col] / norm2;
        }
    }
    QBasis { k, q }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn frob(a: &Array2<f64>) -> f64 {
        a.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn k1_column_is_forced_up_to_sign() {
        let q = build_q(1);
        let c = q.matrix().column(0);
        let target = 1.0 / 2f64.sqrt();
        assert!(
            (c[0] - target).abs() < 1e-14 && (c[1] + target).abs() < 1e-14
                || (c[0] + target).abs() < 1e-14 && (c[1] - target).abs() < 1e-14
        );
        let qqt = q.matrix().dot(&q.matrix().t());
        assert!((qqt[(0, 0)] - 0.5).abs() < 1e-14);
        assert!((qqt[(0, 1)] + 0.5).abs() < 1e-14);
    }

    #[test]
    fn orthonormal_columns() {
        for k in 1..=5 {
            let q = build_q(k);
            let qtq = q.matrix().t().dot(q.matrix());
            let err = frob(&(&qtq - &Array2::<f64>::eye(k)));
            assert!(err <= 1e-12, "K={k}: ‖QᵀQ−I‖={err:e}");

            let m = k + 1;
            let mut proj = Array2::from_elem((m, m), -1.0 / m as f64);
            for i in 0..m {
                proj[(i, i)] += 1.0;
            }
            let qqt = q.matrix().dot(&q.matrix().t());
            let err2 = frob(&(&qqt - &proj));
            assert!(err2 <= 1e-12, "K={k}: ‖QQᵀ−P‖={err2:e}");
        }
    }

    #[test]
    fn columns_orthogonal_to_ones() {
        let q = build_q(2);
        for col in q.matrix().columns() {
            assert!(col.sum().abs() < 1e-14);
        }
    }
}
