use ndarray::{s, Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg::sym::SymMatrix;

const BLOCK: usize = 64;

/// Lower Cholesky factor of a symmetric positive definite matrix.
///
/// The factorization is blocked so the trailing update runs through matrix
/// multiplication; panels are factored unblocked.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Array2<f64>,
}

impl Cholesky {
    pub fn new(m: &SymMatrix) -> Result<Cholesky> {
        let n = m.dim();
        let mut a = m.as_array().clone();

        let mut k = 0;
        while k < n {
            let kb = BLOCK.min(n - k);

            // factor the diagonal block in place
            for j in k..k + kb {
                let mut d = a[(j, j)];
                for t in k..j {
                    d -= a[(j, t)] * a[(j, t)];
                }
                if d <= 0.0 || !d.is_finite() {
                    return Err(Error::NotSpd { pivot: d, index: j });
                }
                let dj = d.sqrt();
                a[(j, j)] = dj;
                for i in (j + 1)..(k + kb) {
                    let mut v = a[(i, j)];
                    for t in k..j {
                        v -= a[(i, t)] * a[(j, t)];
                    }
                    a[(i, j)] = v / dj;
                }
            }

            if k + kb < n {
                // panel solve: rows below the diagonal block against L11ᵀ
                for i in (k + kb)..n {
                    for j in k..k + kb {
                        let mut v = a[(i, j)];
                        for t in k..j {
                            v -= a[(i, t)] * a[(j, t)];
                        }
                        a[(i, j)] = v / a[(j, j)];
                    }
                }

                // trailing update A22 -= L21 L21ᵀ, block-lower only
                let l21 = a.slice(s![k + kb.., k..k + kb]).to_owned();
                let m22 = n - (k + kb);
                let mut cb = 0;
                while cb < m22 {
                    let cw = BLOCK.min(m22 - cb);
                    let prod = l21
                        .slice(s![cb.., ..])
                        .dot(&l21.slice(s![cb..cb + cw, ..]).t());
                    let mut target =
                        a.slice_mut(s![k + kb + cb.., k + kb + cb..k + kb + cb + cw]);
                    target -= &prod;
                    cb += cw;
                }
            }
            k += kb;
        }

        // zero the strict upper triangle
        for i in 0..n {
            for j in (i + 1)..n {
                a[(i, j)] = 0.0;
            }
        }
        Ok(Cholesky { l: a })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn factor(&self) -> ArrayView2<'_, f64> {
        self.l.view()
    }

    /// Solve `A x = b`.
    pub fn solve_vec(&self, b: &Array1<f64>) -> Array1<f64> {
        let n = self.dim();
        let mut x = b.clone();
        for i in 0..n {
            let mut v = x[i];
            for j in 0..i {
                v -= self.l[(i, j)] * x[j];
            }
            x[i] = v / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            for j in (i + 1)..n {
                v -= self.l[(j, i)] * x[j];
            }
            x[i] = v / self.l[(i, i)];
        }
        x
    }

    /// Solve `A X = B` for a matrix of right-hand sides.
    pub fn solve_mat(&self, b: &Array2<f64>) -> Array2<f64> {
        let n = self.dim();
        assert_eq!(b.nrows(), n, "rhs row count mismatch");
        let mut x = b.clone();
        // forward: L y = b, row-oriented axpy over contiguous rhs rows
        for i in 0..n {
            let (above, mut row_i) = x.view_mut().split_at(ndarray::Axis(0), i);
            let mut acc = row_i.row_mut(0);
            for j in 0..i {
                let lij = self.l[(i, j)];
                if lij != 0.0 {
                    acc.scaled_add(-lij, &above.row(j));
                }
            }
            let d = self.l[(i, i)];
            acc.mapv_inplace(|v| v / d);
        }
        // backward: Lᵀ x = y
        for i in (0..n).rev() {
            let (mut head, below) = x.view_mut().split_at(ndarray::Axis(0), i + 1);
            let mut acc = head.row_mut(i);
            for j in (i + 1)..n {
                let lji = self.l[(j, i)];
                if lji != 0.0 {
                    acc.scaled_add(-lji, &below.row(j - i - 1));
                }
            }
            let d = self.l[(i, i)];
            acc.mapv_inplace(|v| v / d);
        }
        x
    }

    /// Explicit inverse, as a symmetric matrix.
    pub fn inverse(&self) -> SymMatrix {
        let n = self.dim();
        let inv = self.solve_mat(&Array2::eye(n));
        SymMatrix::symmetrized(&inv)
    }
}

/// Solve `A X = B` for symmetric positive definite `A`.
pub fn spd_solve(a: &SymMatrix, b: &Array2<f64>) -> Result<Array2<f64>> {
    Ok(Cholesky::new(a)?.solve_mat(b))
}
