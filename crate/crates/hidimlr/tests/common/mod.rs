//! Shared helpers for the integration suites: instance generation through
//! the public API, matrix norms, and small self-contained numeric routines
//! kept independent of the library internals they are used to check.
#![allow(dead_code)]

use hidimlr::{
    fit_mle, gen_coefficients, gen_covariates, gen_labels, gen_sigma_ar1, CovariateFamily,
    Dataset, FitConfig, FitResult,
};
use ndarray::{Array2, ArrayView2};

pub fn frob(a: ArrayView2<'_, f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn rel_frob_diff(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    diff / frob(a).max(frob(b)).max(1e-300)
}

/// One synthetic instance drawn from the standard protocol: AR(1)
/// covariates, normalized coefficients with a null last coordinate,
/// multinomial labels.
pub fn make_instance(
    n: usize,
    p: usize,
    k: usize,
    rho: f64,
    q: usize,
    seed: u64,
) -> (Dataset, FitResult) {
    let sigma = gen_sigma_ar1(p, rho).unwrap();
    let x = gen_covariates(n, p, CovariateFamily::Gaussian, &sigma, seed).unwrap();
    let a_star = gen_coefficients(p, k, &sigma, seed ^ 0x9e3779b97f4a7c15).unwrap();
    let y = gen_labels(&x, &a_star, q, seed ^ 0xd1b54a32d192ed03);
    let data = Dataset::new(x, y, q).unwrap();
    let fit = fit_mle(&data, &FitConfig::default()).unwrap();
    (data, fit)
}

/// Stationarity check used after every fit in the suites.
pub fn assert_kkt(data: &Dataset, fit: &FitResult) {
    let xtg = data.x().t().dot(&fit.g);
    let bound = 1e-9 * data.n_obs() as f64;
    let worst = xtg.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
    assert!(worst <= bound, "stationarity residual {worst:e} > {bound:e}");
}

/// Per-observation Hessian in the (K+1)-class space.
pub fn obs_hessian(p_row: ndarray::ArrayView1<'_, f64>) -> Array2<f64> {
    let m = p_row.len();
    Array2::from_shape_fn((m, m), |(a, b)| {
        if a == b {
            p_row[a] * (1.0 - p_row[a])
        } else {
            -p_row[a] * p_row[b]
        }
    })
}

/// Brute-force `(1/n) Σ_i V̄_i` through the explicit dense pseudo-inverse of
/// the p(K+1)-dimensional curvature matrix. Only usable at toy sizes; this
/// is the reference the structured solvers are compared against.
pub fn v_sum_by_dense_pinv(fit: &FitResult, x: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = x.nrows();
    let p = x.ncols();
    let classes = fit.k() + 1;
    let dim = p * classes;

    // D = Σ_l Ĥ_l ⊗ (x_l x_lᵀ), class-major blocks of p×p
    let mut d = Array2::<f64>::zeros((dim, dim));
    for l in 0..n {
        let h = obs_hessian(fit.p_hat.row(l));
        let xl = x.row(l);
        for a in 0..classes {
            for b in 0..classes {
                let w = h[(a, b)];
                if w == 0.0 {
                    continue;
                }
                for r in 0..p {
                    for c in 0..p {
                        d[(a * p + r, b * p + c)] += w * xl[r] * xl[c];
                    }
                }
            }
        }
    }

    let sym = hidimlr::linalg::SymMatrix::symmetrized(&d);
    let decomp = hidimlr::linalg::sym_eig(&sym).unwrap();
    let lam_max = decomp.eigenvalues.iter().fold(0.0_f64, |m, &v| m.max(v));
    let cutoff = lam_max * dim as f64 * f64::EPSILON * 10.0;
    // D† with explicit thresholding
    let mut scaled = decomp.eigenvectors.clone();
    for j in 0..dim {
        let lam = decomp.eigenvalues[j];
        let w = if lam > cutoff { 1.0 / lam } else { 0.0 };
        scaled.column_mut(j).mapv_inplace(|v| v * w);
    }
    let pinv = scaled.dot(&decomp.eigenvectors.t());

    let mut acc = Array2::<f64>::zeros((classes, classes));
    for i in 0..n {
        let h = obs_hessian(fit.p_hat.row(i));
        let xi = x.row(i);
        // Z_i = Ĥ_i ⊗ x_i as a dim×classes matrix
        let mut z = Array2::<f64>::zeros((dim, classes));
        for a in 0..classes {
            for b in 0..classes {
                for r in 0..p {
                    z[(a * p + r, b)] = h[(a, b)] * xi[r];
                }
            }
        }
        let corr = z.t().dot(&pinv).dot(&z);
        acc += &h;
        acc -= &corr;
    }
    acc.mapv_inplace(|v| v / n as f64);
    acc
}

/// Adaptive Simpson quadrature, the independent oracle for distribution
/// functions.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}

/// Γ(k/2) by the half-integer recursion, for the test-side density.
pub fn gamma_half_integer(two_a: u64) -> f64 {
    let mut acc = if two_a % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut t = two_a;
    while t > 2 {
        t -= 2;
        acc *= t as f64 / 2.0;
    }
    acc
}

/// Chi-square density for the quadrature oracle.
pub fn chi2_density(k: usize) -> impl Fn(f64) -> f64 {
    let a = k as f64 / 2.0;
    let norm = 2f64.powf(a) * gamma_half_integer(k as u64);
    move |t: f64| {
        if t <= 0.0 {
            0.0
        } else {
            t.powf(a - 1.0) * (-t / 2.0).exp() / norm
        }
    }
}

/// Survival function by quadrature over [t, t + 400]; the discarded tail is
/// below e^{-200}. Substituting t = u² removes the k = 1 singularity at the
/// origin, and fixed panels keep the adaptive rule from being fooled by the
/// flat tail.
pub fn chi2_sf_by_quadrature(t: f64, k: usize) -> f64 {
    let f = chi2_density(k);
    let g = move |u: f64| 2.0 * u * f(u * u);
    let lo = t.sqrt();
    let hi = (t + 400.0).sqrt();
    let panels = 32;
    let mut total = 0.0;
    for s in 0..panels {
        let a = lo + (hi - lo) * s as f64 / panels as f64;
        let b = lo + (hi - lo) * (s + 1) as f64 / panels as f64;
        total += adaptive_simpson(&g, a, b, 1e-13);
    }
    total
}

/// Tiny self-contained linear solve (Gaussian elimination with partial
/// pivoting) so oracles do not lean on the library's factorizations.
pub fn solve_dense(a: &Array2<f64>, b: &[f64]) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut x: Vec<f64> = b.to_vec();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[(r, col)].abs() > m[(piv, col)].abs() {
                piv = r;
            }
        }
        if piv != col {
            for c in 0..n {
                let t = m[(col, c)];
                m[(col, c)] = m[(piv, c)];
                m[(piv, c)] = t;
            }
            x.swap(col, piv);
        }
        let d = m[(col, col)];
        assert!(d.abs() > 0.0, "singular system in test oracle");
        for r in col + 1..n {
            let f = m[(r, col)] / d;
            if f != 0.0 {
                for c in col..n {
                    m[(r, c)] -= f * m[(col, c)];
                }
                x[r] -= f * x[col];
            }
        }
    }
    for r in (0..n).rev() {
        let mut v = x[r];
        for c in r + 1..n {
            v -= m[(r, c)] * x[c];
        }
        x[r] = v / m[(r, r)];
    }
    x
}
