use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{default_rel_tol, psd_sqrt, sym_eig, SymMatrix};
use crate::simulate::config::CovariateFamily;

/// AR(1) correlation matrix `Σ_ij = ρ^{|i−j|}` with unit diagonal.
pub fn gen_sigma_ar1(p: usize, rho: f64) -> Result<SymMatrix> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Domain(format!("rho must lie in [0, 1), got {rho}")));
    }
    Ok(SymMatrix::from_fn(p, |i, j| rho.powi((i as i32 - j as i32).abs())))
}

/// Coefficient matrix with the first ⌈p/4⌉ rows standard normal, the rest
/// zero, normalized so that `A*ᵀ Σ A* = I_K`. The last row is exactly zero,
/// making coordinate p a null covariate by construction.
pub fn gen_coefficients(
    p: usize,
    k: usize,
    sigma: &SymMatrix,
    seed: u64,
) -> Result<Array2<f64>> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    gen_coefficients_with(p, k, sigma, &mut rng)
}

pub(crate) fn gen_coefficients_with(
    p: usize,
    k: usize,
    sigma: &SymMatrix,
    rng: &mut impl Rng,
) -> Result<Array2<f64>> {
    assert_eq!(sigma.dim(), p, "covariance dimension mismatch");
    let active = p.div_ceil(4);
    if active < k {
        return Err(Error::RankDeficient(format!(
            "only {active} nonzero coefficient rows for {k} columns"
        )));
    }
    let mut a0 = Array2::zeros((p, k));
    for i in 0..active {
        for j in 0..k {
            a0[(i, j)] = rng.sample::<f64, _>(StandardNormal);
        }
    }
    let gram = SymMatrix::symmetrized(&a0.t().dot(sigma.as_array()).dot(&a0));
    let decomp = sym_eig(&gram)?;
    let lam_max = decomp.eigenvalues.iter().fold(0.0_f64, |a, &b| a.max(b));
    if decomp
        .eigenvalues
        .iter()
        .any(|&l| l <= default_rel_tol(k) * lam_max)
    {
        return Err(Error::RankDeficient(
            "coefficient Gram matrix is singular".into(),
        ));
    }
    // inverse symmetric square root of the Gram
    let mut scaled = decomp.eigenvectors.clone();
    for j in 0..k {
        let w = decomp.eigenvalues[j].powf(-0.5);
        scaled.column_mut(j).mapv_inplace(|v| v * w);
    }
    let inv_sqrt = scaled.dot(&decomp.eigenvectors.t());
    Ok(a0.dot(&inv_sqrt))
}

/// Draw an n×p design from the requested family with covariance Σ.
/// Gaussian rows are `Σ^{1/2} z`; the discrete families are standardized
/// column-wise and then mixed by the same `Σ^{1/2}` on the right.
pub fn gen_covariates(
    n: usize,
    p: usize,
    family: CovariateFamily,
    sigma: &SymMatrix,
    seed: u64,
) -> Result<Array2<f64>> {
    assert_eq!(sigma.dim(), p, "covariance dimension mismatch");
    let sqrt = psd_sqrt(sigma, default_rel_tol(p))?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    gen_covariates_with(n, p, family, &sqrt, &mut rng)
}

pub(crate) fn gen_covariates_with(
    n: usize,
    p: usize,
    family: CovariateFamily,
    sqrt_sigma: &SymMatrix,
    rng: &mut impl Rng,
) -> Result<Array2<f64>> {
    let raw = match family {
        CovariateFamily::Gaussian => {
            Array2::from_shape_fn((n, p), |_| rng.sample::<f64, _>(StandardNormal))
        }
        CovariateFamily::Rademacher => Array2::from_shape_fn((n, p), |_| {
            if rng.gen::<bool>() {
                1.0
            } else {
                -1.0
            }
        }),
        CovariateFamily::Snp => {
            let mut m = Array2::zeros((n, p));
            let freqs = snp_allele_frequencies(p);
            for i in 0..n {
                for j in 0..p {
                    let a = freqs[j];
                    let u: f64 = rng.gen();
                    m[(i, j)] = if u < a * a {
                        0.0
                    } else if u < a * a + 2.0 * a * (1.0 - a) {
                        1.0
                    } else {
                        2.0
                    };
                }
            }
            standardize_columns(&mut m)?;
            m
        }
    };
    Ok(raw.dot(sqrt_sigma.as_array()))
}

/// Minor-allele frequencies spread evenly over [0.25, 0.75] across columns.
pub(crate) fn snp_allele_frequencies(p: usize) -> Vec<f64> {
    (0..p)
        .map(|j| {
            if p == 1 {
                0.5
            } else {
                0.25 + 0.5 * j as f64 / (p - 1) as f64
            }
        })
        .collect()
}

fn standardize_columns(m: &mut Array2<f64>) -> Result<()> {
    let n = m.nrows() as f64;
    for mut col in m.columns_mut() {
        let mean = col.sum() / n;
        col.mapv_inplace(|v| v - mean);
        let var = col.iter().map(|v| v * v).sum::<f64>() / n;
        if var <= 0.0 {
            return Err(Error::InvalidData(
                "constant covariate column cannot be standardized".into(),
            ));
        }
        let sd = var.sqrt();
        col.mapv_inplace(|v| v / sd);
    }
    Ok(())
}

/// Draw q-averaged multinomial responses from the log-odds model with
/// reference class K+1: class probabilities are the softmax of
/// `(x_iᵀA*, 0)`.
pub fn gen_labels(x: &Array2<f64>, a_star: &Array2<f64>, q: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    gen_labels_with(x, a_star, q, &mut rng)
}

pub(crate) fn gen_labels_with(
    x: &Array2<f64>,
    a_star: &Array2<f64>,
    q: usize,
    rng: &mut impl Rng,
) -> Array2<f64> {
    assert!(q >= 1);
    let n = x.nrows();
    let k = a_star.ncols();
    let classes = k + 1;
    let logits = x.dot(a_star); // n×K, reference class logit pinned to 0
    let mut y = Array2::zeros((n, classes));
    let mut probs = Array1::zeros(classes);
    for i in 0..n {
        let row = logits.row(i);
        let m = row.iter().fold(0.0_f64, |a, &b| a.max(b));
        let mut denom = (-m).exp(); // reference class
        for c in 0..k {
            let e = (row[c] - m).exp();
            probs[c] = e;
            denom += e;
        }
        probs[k] = (-m).exp();
        for c in 0..classes {
            probs[c] /= denom;
        }
        for _ in 0..q {
            let u: f64 = rng.gen();
            let mut cum = 0.0;
            let mut drawn = classes - 1;
            for c in 0..classes {
                cum += probs[c];
                if u < cum {
                    drawn = c;
                    break;
                }
            }
            y[(i, drawn)] += 1.0;
        }
    }
    y.mapv_inplace(|v| v / q as f64);
    y
}
