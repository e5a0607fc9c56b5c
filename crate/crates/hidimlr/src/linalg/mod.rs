//! Dense symmetric linear algebra and chi-square distribution functions.
//!
//! Everything here is pure: values are immutable after construction and
//! safely shareable across threads. Dimensions are small for the statistics
//! (K+1 or K) and moderate inside the structured solvers, so the
//! factorizations are hand-rolled rather than delegated to LAPACK.

mod chi2;
mod chol;
mod eig;
mod lu;
mod sym;

pub use chi2::{chi2_quantile, chi2_sf};
pub use chol::{spd_solve, Cholesky};
pub use eig::{default_rel_tol, psd_sqrt, psd_sqrt_pinv, sym_eig, EigDecomp};
pub use lu::PartialPivLu;
pub use sym::SymMatrix;

use ndarray::{Array2, ArrayView1, ArrayView2};

/// `Xᵀ diag(w) X` with only the block-lower triangle formed by GEMM and the
/// rest mirrored. This is the workhorse of the Newton assembly.
pub fn weighted_gram(x: ArrayView2<'_, f64>, w: ArrayView1<'_, f64>) -> SymMatrix {
    let (n, p) = (x.nrows(), x.ncols());
    assert_eq!(w.len(), n, "weight length mismatch");
    let mut xs = x.to_owned();
    for (mut row, &wi) in xs.rows_mut().into_iter().zip(w.iter()) {
        row.mapv_inplace(|v| v * wi);
    }
    let block = 128usize;
    let mut out = Array2::zeros((p, p));
    let mut j = 0;
    while j < p {
        let jw = block.min(p - j);
        let prod = x
            .slice(ndarray::s![.., j..])
            .t()
            .dot(&xs.slice(ndarray::s![.., j..j + jw]));
        out.slice_mut(ndarray::s![j.., j..j + jw]).assign(&prod);
        j += jw;
    }
    for i in 0..p {
        for j in (i + 1)..p {
            out[(i, j)] = out[(j, i)];
        }
    }
    SymMatrix::symmetrized(&out)
}

/// Diagonal of `X M Xᵀ`, i.e. the per-row quadratic forms `x_iᵀ M x_i`.
pub fn rowwise_quadform(x: ArrayView2<'_, f64>, m: ArrayView2<'_, f64>) -> Vec<f64> {
    let xm = x.dot(&m);
    xm.rows()
        .into_iter()
        .zip(x.rows())
        .map(|(a, b)| a.iter().zip(b.iter()).map(|(u, v)| u * v).sum())
        .collect()
}
