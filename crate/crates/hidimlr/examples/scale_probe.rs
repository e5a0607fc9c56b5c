// Quick wall-clock probe of the fit + test pipeline at the Monte Carlo
// geometries. Not part of the test suite; run with
//   cargo run -p hidimlr --example scale_probe --release
use std::time::Instant;

use hidimlr::{
    fit_mle, gen_coefficients, gen_covariates, gen_labels, gen_sigma_ar1, test_feature,
    CovariateFamily, Dataset, FitConfig, OmegaSpec,
};

fn probe(n: usize, p: usize, k: usize) {
    let t0 = Instant::now();
    let sigma = gen_sigma_ar1(p, 0.5).unwrap();
    let x = gen_covariates(n, p, CovariateFamily::Gaussian, &sigma, 1).unwrap();
    let a_star = gen_coefficients(p, k, &sigma, 2).unwrap();
    let y = gen_labels(&x, &a_star, 1, 3);
    let data = Dataset::new(x, y, 1).unwrap();
    let t_gen = t0.elapsed();

    let t1 = Instant::now();
    let fit = fit_mle(&data, &FitConfig::default()).unwrap();
    let t_fit = t1.elapsed();

    let t2 = Instant::now();
    let report = test_feature(&fit, data.x().view(), p - 1, &OmegaSpec::Estimate).unwrap();
    let t_test = t2.elapsed();

    println!(
        "n={n} p={p} k={k}: gen {:.2}s fit {:.2}s ({} iters) test {:.2}s  T={:.3} p={:.3}",
        t_gen.as_secs_f64(),
        t_fit.as_secs_f64(),
        fit.iterations,
        t_test.as_secs_f64(),
        report.statistic,
        report.p_value
    );
}

fn main() {
    probe(800, 200, 2);
    probe(2000, 600, 2);
}
