use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg::{weighted_gram, Cholesky, SymMatrix};

/// Estimate the j-th diagonal entry of the precision matrix `Σ^{-1}` from
/// the design alone: the reciprocal residual variance of regressing column
/// j on the remaining columns, scaled by the residual degrees of freedom,
///
/// `Ω̂_jj = (n − p + 1) / ‖(I − P_{-j}) X e_j‖²`.
pub fn estimate_omega_jj(x: ArrayView2<'_, f64>, j: usize) -> Result<f64> {
    let n = x.nrows();
    let p = x.ncols();
    if j >= p {
        return Err(Error::IndexOutOfRange { index: j, p });
    }
    if n <= p {
        return Err(Error::InvalidData(format!(
            "estimating the precision diagonal needs n > p (n = {n}, p = {p})"
        )));
    }
    let ones = Array1::ones(n);
    let gram = weighted_gram(x, ones.view());

    // partition the Gram around column j
    let keep: Vec<usize> = (0..p).filter(|&c| c != j).collect();
    let m = p - 1;
    let mut gsub = Array2::zeros((m, m));
    let mut gj = Array1::zeros(m);
    for (a, &ca) in keep.iter().enumerate() {
        gj[a] = gram[(ca, j)];
        for (b, &cb) in keep.iter().enumerate() {
            gsub[(a, b)] = gram[(ca, cb)];
        }
    }
    let chol = Cholesky::new(&SymMatrix::symmetrized(&gsub)).map_err(|_| {
        Error::RankDeficient("columns excluding j are linearly dependent".into())
    })?;
    let beta = chol.solve_vec(&gj);
    let ss = gram[(j, j)] - gj.dot(&beta);
    if !(ss > 0.0) {
        return Err(Error::RankDeficient(
            "column j lies in the span of the remaining columns".into(),
        ));
    }
    Ok((n - p + 1) as f64 / ss)
}

/// `Ω_jj` from a known covariance matrix: the j-th diagonal entry of its
/// inverse, obtained from one SPD solve.
pub fn omega_from_sigma(sigma: &SymMatrix, j: usize) -> Result<f64> {
    let p = sigma.dim();
    if j >= p {
        return Err(Error::IndexOutOfRange { index: j, p });
    }
    let chol = Cholesky::new(sigma)?;
    let mut e = Array1::zeros(p);
    e[j] = 1.0;
    let col = chol.solve_vec(&e);
    Ok(col[j])
}
