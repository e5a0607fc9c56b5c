use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Dense symmetric matrix with storage-enforced symmetry.
///
/// Every constructor mirrors the lower triangle (or averages the two
/// triangles), so `m[(i, j)] == m[(j, i)]` holds bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    data: Array2<f64>,
}

impl SymMatrix {
    /// Build from an arbitrary square array by averaging `a` and `aᵀ`.
    pub fn symmetrized(a: &Array2<f64>) -> SymMatrix {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "square matrix required");
        let mut data = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..=i {
                let v = 0.5 * (a[(i, j)] + a[(j, i)]);
                data[(i, j)] = v;
                data[(j, i)] = v;
            }
        }
        SymMatrix { data }
    }

    /// Build from a function of (row, col); only the lower triangle is evaluated.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> SymMatrix {
        let mut data = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                data[(i, j)] = v;
                data[(j, i)] = v;
            }
        }
        SymMatrix { data }
    }

    pub fn identity(n: usize) -> SymMatrix {
        SymMatrix { data: Array2::eye(n) }
    }

    pub fn zeros(n: usize) -> SymMatrix {
        SymMatrix { data: Array2::zeros((n, n)) }
    }

    pub fn from_diag(d: &[f64]) -> SymMatrix {
        let mut data = Array2::zeros((d.len(), d.len()));
        for (i, &v) in d.iter().enumerate() {
            data[(i, i)] = v;
        }
        SymMatrix { data }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn into_array(self) -> Array2<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn require_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn trace(&self) -> f64 {
        self.data.diag().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute row sum of `M·1` divided by the Frobenius scale;
    /// handy for kernel checks in tests.
    pub fn row_sums(&self) -> Vec<f64> {
        self.data.rows().into_iter().map(|r| r.sum()).collect()
    }
}

impl std::ops::Index<(usize, usize)> for SymMatrix {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.data[idx]
    }
}
