use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// LU factorization with partial pivoting, for square indefinite systems
/// (the low-rank solver core is symmetric but not definite).
#[derive(Debug, Clone)]
pub struct PartialPivLu {
    lu: Array2<f64>,
    perm: Vec<usize>,
}

impl PartialPivLu {
    pub fn new(a: &Array2<f64>) -> Result<PartialPivLu> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "square matrix required");
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let mut piv = k;
            let mut max = lu[(k, k)].abs();
            for i in (k + 1)..n {
                let v = lu[(i, k)].abs();
                if v > max {
                    max = v;
                    piv = i;
                }
            }
            if max == 0.0 || !max.is_finite() {
                return Err(Error::RankDeficient(format!(
                    "zero pivot at column {k} during LU factorization"
                )));
            }
            if piv != k {
                perm.swap(k, piv);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            let (upper, mut lower) = lu.view_mut().split_at(ndarray::Axis(0), k + 1);
            let row_k = upper.row(k);
            for i in (k + 1)..n {
                let mut row_i = lower.row_mut(i - k - 1);
                let m = row_i[k] / pivot;
                row_i[k] = m;
                if m != 0.0 {
                    for j in (k + 1)..n {
                        row_i[j] -= m * row_k[j];
                    }
                }
            }
        }
        Ok(PartialPivLu { lu, perm })
    }

    pub fn solve_vec(&self, b: &Array1<f64>) -> Array1<f64> {
        let n = self.lu.nrows();
        let mut x = Array1::zeros(n);
        for i in 0..n {
            x[i] = b[self.perm[i]];
        }
        for i in 0..n {
            let mut v = x[i];
            for j in 0..i {
                v -= self.lu[(i, j)] * x[j];
            }
            x[i] = v;
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            for j in (i + 1)..n {
                v -= self.lu[(i, j)] * x[j];
            }
            x[i] = v / self.lu[(i, i)];
        }
        x
    }

    pub fn solve_mat(&self, b: &Array2<f64>) -> Array2<f64> {
        let n = self.lu.nrows();
        assert_eq!(b.nrows(), n, "rhs row count mismatch");
        let mut x = Array2::zeros(b.raw_dim());
        for i in 0..n {
            x.row_mut(i).assign(&b.row(self.perm[i]));
        }
        for i in 0..n {
            let (above, mut row_i) = x.view_mut().split_at(ndarray::Axis(0), i);
            let mut acc = row_i.row_mut(0);
            for j in 0..i {
                let m = self.lu[(i, j)];
                if m != 0.0 {
                    acc.scaled_add(-m, &above.row(j));
                }
            }
        }
        for i in (0..n).rev() {
            let (mut head, below) = x.view_mut().split_at(ndarray::Axis(0), i + 1);
            let mut acc = head.row_mut(i);
            for j in (i + 1)..n {
                let m = self.lu[(i, j)];
                if m != 0.0 {
                    acc.scaled_add(-m, &below.row(j - i - 1));
                }
            }
            let d = self.lu[(i, i)];
            acc.mapv_inplace(|v| v / d);
        }
        x
    }
}
