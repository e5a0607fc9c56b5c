use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::sym::SymMatrix;

/// Eigendecomposition of a symmetric matrix: `M = V diag(λ) Vᵀ` with
/// eigenvalues ascending and orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigDecomp {
    pub eigenvalues: Array1<f64>,
    pub eigenvectors: Array2<f64>,
}

impl EigDecomp {
    pub fn reconstruct(&self) -> Array2<f64> {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for j in 0..n {
            let lam = self.eigenvalues[j];
            scaled.column_mut(j).mapv_inplace(|v| v * lam);
        }
        scaled.dot(&self.eigenvectors.t())
    }
}

/// Symmetric eigendecomposition by Householder tridiagonalization followed
/// by tridiagonal QL iteration with implicit shifts.
pub fn sym_eig(m: &SymMatrix) -> Result<EigDecomp> {
    m.require_finite()?;
    let n = m.dim();
    let mut v = m.as_array().clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;
    sort_ascending(&mut v, &mut d);
    Ok(EigDecomp { eigenvalues: Array1::from(d), eigenvectors: v })
}

// Householder reduction to symmetric tridiagonal form, accumulating the
// orthogonal transformation in `v`. Classic EISPACK tred2.
fn tred2(v: &mut Array2<f64>, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for item in d.iter_mut().take(i) {
                *item /= scale;
                h += *item * *item;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let upd = f * e[k] + g * d[k];
                    v[(k, j)] -= upd;
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate the Householder transformations.
    for i in 0..n.saturating_sub(1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    let upd = g * d[k];
                    v[(k, j)] -= upd;
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

// Tridiagonal QL with implicit shifts, updating the eigenvector matrix.
fn tql2(v: &mut Array2<f64>, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    if n > 0 {
        e[n - 1] = 0.0;
    }

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m >= n {
            m = n - 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::Domain(
                        "eigendecomposition failed to converge".into(),
                    ));
                }

                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    for k in 0..n {
                        h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

fn sort_ascending(v: &mut Array2<f64>, d: &mut [f64]) {
    let n = d.len();
    // selection sort; dimensions are small and stability is irrelevant
    for i in 0..n {
        let mut k = i;
        for j in (i + 1)..n {
            if d[j] < d[k] {
                k = j;
            }
        }
        if k != i {
            d.swap(i, k);
            for row in 0..n {
                let tmp = v[(row, i)];
                v[(row, i)] = v[(row, k)];
                v[(row, k)] = tmp;
            }
        }
    }
}

/// `((M)^{1/2})†` for positive semi-definite `M`: eigenvalues at or below
/// `rel_tol · λ_max` are treated as exact zeros and dropped.
pub fn psd_sqrt_pinv(m: &SymMatrix, rel_tol: f64) -> Result<SymMatrix> {
    let decomp = sym_eig(m)?;
    let lam_max = decomp.eigenvalues.iter().fold(0.0_f64, |a, &b| a.max(b));
    let cutoff = rel_tol * lam_max;
    if let Some(&lam_min) = decomp
        .eigenvalues
        .iter()
        .find(|&&lam| lam < -cutoff)
    {
        return Err(Error::NotPsd { eigenvalue: lam_min, cutoff });
    }
    Ok(spectral_map(&decomp, |lam| {
        if lam > cutoff {
            lam.powf(-0.5)
        } else {
            0.0
        }
    }))
}

/// Symmetric square root of a PSD matrix (negative round-off clipped to zero).
pub fn psd_sqrt(m: &SymMatrix, rel_tol: f64) -> Result<SymMatrix> {
    let decomp = sym_eig(m)?;
    let lam_max = decomp.eigenvalues.iter().fold(0.0_f64, |a, &b| a.max(b));
    let cutoff = rel_tol * lam_max;
    if let Some(&lam_min) = decomp
        .eigenvalues
        .iter()
        .find(|&&lam| lam < -cutoff)
    {
        return Err(Error::NotPsd { eigenvalue: lam_min, cutoff });
    }
    Ok(spectral_map(&decomp, |lam| if lam > 0.0 { lam.sqrt() } else { 0.0 }))
}

/// Default pseudo-inverse cutoff: `dim · ε`, relative to the largest eigenvalue.
pub fn default_rel_tol(dim: usize) -> f64 {
    dim as f64 * f64::EPSILON
}

fn spectral_map(decomp: &EigDecomp, f: impl Fn(f64) -> f64) -> SymMatrix {
    let n = decomp.eigenvalues.len();
    let mut scaled = decomp.eigenvectors.clone();
    for j in 0..n {
        let w = f(decomp.eigenvalues[j]);
        scaled.column_mut(j).mapv_inplace(|v| v * w);
    }
    SymMatrix::symmetrized(&scaled.dot(&decomp.eigenvectors.t()))
}
