//! Cross-checks for the inference pipeline: the explicit dense
//! pseudo-inverse route, hand arithmetic at scalar sizes, the binary
//! special case, invariance properties of the statistic, and Monte Carlo
//! calibration at desk scale.

mod common;

use common::{assert_kkt, obs_hessian, solve_dense, v_sum_by_dense_pinv};
use hidimlr::linalg::{default_rel_tol, psd_sqrt_pinv, sym_eig, SymMatrix};
use hidimlr::{
    compute_v_sum, fit_mle, gen_covariates, gen_labels, gen_sigma_ar1, omega_from_sigma,
    run_monte_carlo, test_feature, Backend, CovariateFamily, Dataset, FitConfig, KronSolver,
    OmegaMode, OmegaSpec, RepStatus, SimConfig,
};
use ndarray::{Array1, Array2};

fn labeled_instance(n: usize, p: usize, k: usize, seed: u64) -> (Dataset, hidimlr::FitResult) {
    let sigma = gen_sigma_ar1(p, 0.4).unwrap();
    let x = gen_covariates(n, p, CovariateFamily::Gaussian, &sigma, seed).unwrap();
    // arbitrary fixed coefficients, moderate scale
    let a = Array2::from_shape_fn((p, k), |(i, j)| {
        0.7 * ((i * 3 + j * 5 + 1) as f64 * 0.83).sin()
    });
    let y = gen_labels(&x, &a, 1, seed ^ 0xabcdef);
    let data = Dataset::new(x, y, 1).unwrap();
    let fit = fit_mle(&data, &FitConfig::default()).unwrap();
    assert_kkt(&data, &fit);
    (data, fit)
}

#[test]
fn v_sum_matches_explicit_pseudo_inverse() {
    let (data, fit) = labeled_instance(30, 3, 2, 501);
    let solver = KronSolver::new(&fit, data.x().view(), Backend::Dense).unwrap();
    let got = compute_v_sum(&fit, data.x().view(), &solver).unwrap();
    let oracle = v_sum_by_dense_pinv(&fit, data.x().view());
    let err = common::rel_frob_diff(got.view(), oracle.view());
    assert!(err <= 1e-6, "relative error {err:e}");

    // and through the low-rank backend as well
    let wood = KronSolver::new(&fit, data.x().view(), Backend::Woodbury).unwrap();
    let got2 = compute_v_sum(&fit, data.x().view(), &wood).unwrap();
    let err2 = common::rel_frob_diff(got2.view(), oracle.view());
    assert!(err2 <= 1e-6, "low-rank relative error {err2:e}");
}

#[test]
fn scalar_instance_matches_hand_arithmetic() {
    // p = 1, n = 3, K = 1: everything collapses to scalars around the
    // 2×2 matrix E = [[1,−1],[−1,1]]
    let x = ndarray::array![[0.8], [-0.5], [1.3]];
    let data = Dataset::from_labels(x, &[0, 1, 1], 2).unwrap();
    let fit = fit_mle(&data, &FitConfig::default()).unwrap();
    let solver = KronSolver::new(&fit, data.x().view(), Backend::Dense).unwrap();

    // D = (Σ_i h_i x_i²)·E with h_i = p̂_i0·p̂_i1, and D† = E / (4 Σ h_i x_i²)
    let s: f64 = (0..3)
        .map(|i| {
            let h = fit.p_hat[(i, 0)] * fit.p_hat[(i, 1)];
            h * data.x()[(i, 0)] * data.x()[(i, 0)]
        })
        .sum();
    let f = ndarray::array![[0.4, -0.1]];
    let expect = {
        // E f̃ / (4s) with f̃ the stacked vector; matrix form is 1×2
        let e_f0 = f[(0, 0)] - f[(0, 1)];
        let e_f1 = -f[(0, 0)] + f[(0, 1)];
        ndarray::array![[e_f0 / (4.0 * s), e_f1 / (4.0 * s)]]
    };
    let got = solver.apply(&f);
    for c in 0..2 {
        assert!(
            (got[(0, c)] - expect[(0, c)]).abs() <= 1e-12 * (1.0 + expect[(0, c)].abs()),
            "component {c}: {} vs {}",
            got[(0, c)],
            expect[(0, c)]
        );
    }

    // V̄ = (1/n) Σ_i (h_i − h_i² x_i²/s) E, so its trace is twice that scalar
    let v = compute_v_sum(&fit, data.x().view(), &solver).unwrap();
    let vhat: f64 = (0..3)
        .map(|i| {
            let h = fit.p_hat[(i, 0)] * fit.p_hat[(i, 1)];
            let xi2 = data.x()[(i, 0)] * data.x()[(i, 0)];
            h - h * h * xi2 / s
        })
        .sum::<f64>()
        / 3.0;
    assert!((v.trace() - 2.0 * vhat).abs() <= 1e-12);
}

#[test]
fn binary_case_matches_scalar_formula() {
    // K = 1: the unique nonzero eigenvalue of the V sum equals twice the
    // scalar v̂ from the binary logistic correction formula
    let (data, fit) = labeled_instance(40, 4, 1, 902);
    let solver = KronSolver::new(&fit, data.x().view(), Backend::Dense).unwrap();
    let v = compute_v_sum(&fit, data.x().view(), &solver).unwrap();

    let n = data.n_obs();
    let p = data.n_features();
    // F = Σ_l ρ''_l x_l x_lᵀ with ρ''_l = p̂_l0 p̂_l1
    let mut f = Array2::<f64>::zeros((p, p));
    for l in 0..n {
        let w = fit.p_hat[(l, 0)] * fit.p_hat[(l, 1)];
        let xl = data.x().row(l);
        for a in 0..p {
            for b in 0..p {
                f[(a, b)] += w * xl[a] * xl[b];
            }
        }
    }
    let mut vhat = 0.0;
    for i in 0..n {
        let w = fit.p_hat[(i, 0)] * fit.p_hat[(i, 1)];
        let xi: Vec<f64> = data.x().row(i).to_vec();
        let fx = solve_dense(&f, &xi);
        let quad: f64 = xi.iter().zip(fx.iter()).map(|(a, b)| a * b).sum();
        vhat += w - w * w * quad;
    }
    vhat /= n as f64;

    // eigenvalues of the 2×2 V sum: one zero (kernel), one equal to 2v̂
    let eig = sym_eig(&v).unwrap();
    assert!(eig.eigenvalues[0].abs() <= 1e-10);
    assert!(
        (eig.eigenvalues[1] - 2.0 * vhat).abs() <= 1e-10 * (1.0 + 2.0 * vhat),
        "{} vs {}",
        eig.eigenvalues[1],
        2.0 * vhat
    );
}

// statistic computed from scratch for an arbitrary orthonormal basis of the
// complement of the ones vector
fn statistic_with_basis(
    fit: &hidimlr::FitResult,
    x: &Array2<f64>,
    j: usize,
    omega_jj: f64,
    qm: &Array2<f64>,
) -> f64 {
    let n = x.nrows();
    let p = x.ncols();
    let k = qm.ncols();
    let b2 = fit.b_hat_centered.dot(qm); // p×K
    let g2 = fit.g.dot(qm); // n×K
    let gram = SymMatrix::symmetrized(&(g2.t().dot(&g2) / n as f64));

    // brute-force curvature in this basis
    let dim = p * k;
    let mut m = Array2::<f64>::zeros((dim, dim));
    for i in 0..n {
        let h = obs_hessian(fit.p_hat.row(i));
        let hq = qm.t().dot(&h).dot(qm);
        let xi = x.row(i);
        for a in 0..k {
            for b in 0..k {
                let w = hq[(a, b)];
                for r in 0..p {
                    for c in 0..p {
                        m[(a * p + r, b * p + c)] += w * xi[r] * xi[c];
                    }
                }
            }
        }
    }
    // explicit inverse column by column
    let mut minv = Array2::<f64>::zeros((dim, dim));
    for col in 0..dim {
        let mut e = vec![0.0; dim];
        e[col] = 1.0;
        let sol = solve_dense(&m, &e);
        for r in 0..dim {
            minv[(r, col)] = sol[r];
        }
    }
    // V sum in this basis
    let mut vsum = Array2::<f64>::zeros((k, k));
    for i in 0..n {
        let h = obs_hessian(fit.p_hat.row(i));
        let hq = qm.t().dot(&h).dot(qm);
        let xi = x.row(i);
        let mut s = Array2::<f64>::zeros((k, k));
        for a in 0..k {
            for b in 0..k {
                let mut acc = 0.0;
                for r in 0..p {
                    for c in 0..p {
                        acc += xi[r] * minv[(a * p + r, b * p + c)] * xi[c];
                    }
                }
                s[(a, b)] = acc;
            }
        }
        let corr = hq.dot(&s).dot(&hq);
        vsum += &hq;
        vsum -= &corr;
    }
    vsum.mapv_inplace(|v| v / n as f64);

    let w = psd_sqrt_pinv(&gram, default_rel_tol(k)).unwrap();
    let bj = b2.row(j).to_owned();
    let vb = vsum.dot(&bj);
    let a: Array1<f64> = w.as_array().dot(&vb) * (n as f64 / omega_jj).sqrt();
    a.iter().map(|v| v * v).sum()
}

#[test]
fn statistic_is_invariant_to_basis_rotation() {
    let (data, fit) = labeled_instance(60, 6, 2, 777);
    let j = 5;
    let omega = 1.9;
    let t_prod = test_feature(&fit, data.x().view(), j, &OmegaSpec::Known(omega))
        .unwrap()
        .statistic;

    // rotate the canonical basis by a fixed orthogonal O (Gram-Schmidt)
    let q0 = hidimlr::build_q(2).matrix().clone();
    let raw: Array2<f64> = ndarray::array![[0.6, -0.3], [0.8, 0.9]];
    let mut o = raw.clone();
    // orthonormalize columns
    let c0 = o.column(0).to_owned();
    let n0: f64 = c0.dot(&c0);
    let c0 = c0 / n0.sqrt();
    let mut c1 = o.column(1).to_owned();
    let proj = c1.dot(&c0);
    c1.scaled_add(-proj, &c0);
    let n1: f64 = c1.dot(&c1);
    let c1 = c1 / n1.sqrt();
    o.column_mut(0).assign(&c0);
    o.column_mut(1).assign(&c1);
    let q_rot = q0.dot(&o);

    let t0 = statistic_with_basis(&fit, data.x(), j, omega, &q0);
    let t1 = statistic_with_basis(&fit, data.x(), j, omega, &q_rot);
    assert!(
        (t_prod - t0).abs() <= 1e-8 * (1.0 + t_prod),
        "production {t_prod} vs manual {t0}"
    );
    assert!(
        (t0 - t1).abs() <= 1e-8 * (1.0 + t0),
        "canonical {t0} vs rotated {t1}"
    );
}

#[test]
fn statistic_matches_over_specified_route() {
    // (K+1)-space evaluation through pseudo-inverses equals the production
    // K-space route
    for seed in [11u64, 12, 13] {
        let (data, fit) = labeled_instance(60, 10, 2, seed);
        let j = 9;
        let omega = 1.3;
        let report = test_feature(&fit, data.x().view(), j, &OmegaSpec::Known(omega)).unwrap();

        let n = data.n_obs() as f64;
        let classes = fit.k() + 1;
        let solver = KronSolver::new(&fit, data.x().view(), Backend::Dense).unwrap();
        let vbar = compute_v_sum(&fit, data.x().view(), &solver).unwrap();
        let gram_full =
            SymMatrix::symmetrized(&(fit.g.t().dot(&fit.g) / n));
        let sqrt_pinv = psd_sqrt_pinv(&gram_full, default_rel_tol(classes)).unwrap();
        // R Âᵀ e_j = (a_j, 0)
        let mut raj = Array1::zeros(classes);
        for c in 0..fit.k() {
            raj[c] = fit.a_hat[(j, c)];
        }
        let z = sqrt_pinv.as_array().dot(&vbar.as_array().dot(&raj));
        let t_full: f64 = z.iter().map(|v| v * v).sum::<f64>() * n / omega;
        assert!(
            (t_full - report.statistic).abs() <= 1e-8 * (1.0 + report.statistic),
            "over-specified {t_full} vs production {}",
            report.statistic
        );
        // whitened coordinate squared norm equals the statistic
        let w2: f64 = report.whitened_coordinate.iter().map(|v| v * v).sum();
        assert!((w2 - report.statistic).abs() <= 1e-10 * (1.0 + report.statistic));
    }
}

#[test]
fn statistic_is_scale_equivariant() {
    let (data, fit) = labeled_instance(50, 4, 2, 321);
    let j = 3;
    let omega = 1.0;
    let t1 = test_feature(&fit, data.x().view(), j, &OmegaSpec::Known(omega))
        .unwrap()
        .statistic;

    let c = 3.0;
    let x_scaled = data.x() * c;
    let scaled = Dataset::new(x_scaled, data.y().clone(), data.q()).unwrap();
    let fit2 = fit_mle(&scaled, &FitConfig::default()).unwrap();
    let t2 = test_feature(&fit2, scaled.x().view(), j, &OmegaSpec::Known(omega / (c * c)))
        .unwrap()
        .statistic;
    assert!(
        (t1 - t2).abs() <= 1e-8 * (1.0 + t1),
        "original {t1} vs rescaled {t2}"
    );
}

#[test]
fn kernel_consistency_of_gram_and_v_sum() {
    let (data, fit) = labeled_instance(45, 5, 2, 2024);
    let solver = KronSolver::new(&fit, data.x().view(), Backend::Dense).unwrap();
    let vbar = compute_v_sum(&fit, data.x().view(), &solver).unwrap();
    for s in vbar.row_sums() {
        assert!(s.abs() <= 1e-10);
    }
    let gram = fit.g.t().dot(&fit.g) / data.n_obs() as f64;
    for row in gram.rows() {
        assert!(row.sum().abs() <= 1e-10);
    }
}

#[test]
fn null_statistic_mean_is_chi_square_mean() {
    // the χ²_K mean is K; at n = 400, p = 80 the empirical mean over 400
    // null repetitions should sit near it
    let config = SimConfig {
        n: 400,
        p: 80,
        k: 2,
        q: 1,
        rho: 0.5,
        covariate_family: CovariateFamily::Gaussian,
        reps: 400,
        seed: 88,
        alpha: 0.05,
        null_index: None,
        omega_mode: OmegaMode::Known,
    };
    let summary = run_monte_carlo(&config).unwrap();
    let (mut sum, mut count) = (0.0, 0);
    for r in &summary.reps {
        if r.status == RepStatus::Ok {
            sum += r.statistic.unwrap();
            count += 1;
        }
    }
    let mean = sum / count as f64;
    assert!(
        (mean - 2.0).abs() <= 0.35,
        "mean statistic {mean} over {count} reps"
    );
}

#[test]
fn classical_test_is_calibrated_when_p_is_small() {
    // fixed p = 5 with n = 5000: the Fisher baseline is valid here and its
    // p-values should look uniform
    let config = SimConfig {
        n: 5000,
        p: 5,
        k: 2,
        q: 1,
        rho: 0.5,
        covariate_family: CovariateFamily::Gaussian,
        reps: 400,
        seed: 4242,
        alpha: 0.05,
        null_index: None,
        omega_mode: OmegaMode::Estimated,
    };
    let summary = run_monte_carlo(&config).unwrap();
    assert!(
        summary.classical_ks_distance <= 0.08,
        "classical KS distance {} at fixed small p",
        summary.classical_ks_distance
    );
}

#[test]
fn omega_known_value_matches_sigma_inverse() {
    let sigma = gen_sigma_ar1(6, 0.5).unwrap();
    let corner = omega_from_sigma(&sigma, 5).unwrap();
    assert!((corner - 1.0 / 0.75).abs() < 1e-10);
}
