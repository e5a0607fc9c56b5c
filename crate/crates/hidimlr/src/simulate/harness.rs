use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{test_feature, OmegaSpec};
use crate::linalg::{chi2_quantile, default_rel_tol, psd_sqrt, SymMatrix};
use crate::mle::{fit_mle, Dataset, FitConfig};
use crate::simulate::config::{OmegaMode, SimConfig};
use crate::simulate::gen::{
    gen_coefficients_with, gen_covariates_with, gen_labels_with, gen_sigma_ar1,
};
use crate::simulate::ks::ks_distance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepStatus {
    Ok,
    Unbounded,
    MaxIterations,
    Failed,
}

/// Raw outcome of one repetition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepRecord {
    /// One-based repetition index; also the offset of its RNG stream.
    pub rep: usize,
    pub status: RepStatus,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub classical_statistic: Option<f64>,
    pub classical_p_value: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FailureCounts {
    pub unbounded: usize,
    pub max_iterations: usize,
    pub other: usize,
}

impl FailureCounts {
    pub fn total(&self) -> usize {
        self.unbounded + self.max_iterations + self.other
    }
}

/// Aggregated outputs of one Monte Carlo experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimSummary {
    pub config: SimConfig,
    pub reps_attempted: usize,
    pub reps_used: usize,
    pub failures: FailureCounts,
    /// Fraction of used reps with high-dimensional p-value below alpha.
    pub type_i_error: f64,
    pub classical_type_i_error: f64,
    /// Fraction of used reps inside the 95% confidence set.
    pub coverage95: f64,
    pub classical_coverage95: f64,
    pub ks_distance: f64,
    pub classical_ks_distance: f64,
    /// Sorted (empirical statistic, chi-square quantile) pairs.
    pub qq: Vec<(f64, f64)>,
    pub classical_qq: Vec<(f64, f64)>,
    pub reps: Vec<RepRecord>,
}

/// Run the full experiment described by the configuration. Repetitions are
/// independent: rep r draws from the stream `seed ⊕ r`, so results do not
/// depend on execution order or thread count.
pub fn run_monte_carlo(config: &SimConfig) -> Result<SimSummary> {
    config.validate()?;
    let sigma = gen_sigma_ar1(config.p, config.rho)?;
    let sqrt_sigma = psd_sqrt(&sigma, default_rel_tol(config.p))?;
    // coefficients are drawn once for the whole experiment, stream = seed
    let mut coef_rng = ChaCha12Rng::seed_from_u64(config.seed);
    let a_star = gen_coefficients_with(config.p, config.k, &sigma, &mut coef_rng)?;
    let j = config.null_index_zero_based();

    let omega = match config.omega_mode {
        OmegaMode::Known => {
            OmegaSpec::Known(crate::inference::omega_from_sigma(&sigma, j)?)
        }
        OmegaMode::Estimated => OmegaSpec::Estimate,
    };

    let records: Vec<RepRecord> = (1..=config.reps)
        .into_par_iter()
        .map(|rep| run_one_rep(config, &sqrt_sigma, &a_star, j, &omega, rep))
        .collect();

    summarize(config.clone(), records)
}

/// As [`run_monte_carlo`] with an explicit cap on worker threads.
pub fn run_monte_carlo_with_threads(
    config: &SimConfig,
    threads: Option<usize>,
) -> Result<SimSummary> {
    match threads {
        None => run_monte_carlo(config),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            pool.install(|| run_monte_carlo(config))
        }
    }
}

fn run_one_rep(
    config: &SimConfig,
    sqrt_sigma: &SymMatrix,
    a_star: &Array2<f64>,
    j: usize,
    omega: &OmegaSpec,
    rep: usize,
) -> RepRecord {
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed ^ rep as u64);
    let fail = |status| RepRecord {
        rep,
        status,
        statistic: None,
        p_value: None,
        classical_statistic: None,
        classical_p_value: None,
    };

    let x = match gen_covariates_with(
        config.n,
        config.p,
        config.covariate_family,
        sqrt_sigma,
        &mut rng,
    ) {
        Ok(x) => x,
        Err(_) => return fail(RepStatus::Failed),
    };
    let y = gen_labels_with(&x, a_star, config.q, &mut rng);
    let data = match Dataset::new(x, y, config.q) {
        Ok(d) => d,
        Err(_) => return fail(RepStatus::Failed),
    };
    let fit = match fit_mle(&data, &FitConfig::default()) {
        Ok(f) => f,
        Err(Error::Unbounded { .. }) => return fail(RepStatus::Unbounded),
        Err(Error::MaxIterations { .. }) => return fail(RepStatus::MaxIterations),
        Err(_) => return fail(RepStatus::Failed),
    };
    match test_feature(&fit, data.x().view(), j, omega) {
        Ok(report) => RepRecord {
            rep,
            status: RepStatus::Ok,
            statistic: Some(report.statistic),
            p_value: Some(report.p_value),
            classical_statistic: Some(report.classical_statistic),
            classical_p_value: Some(report.classical_p_value),
        },
        Err(_) => fail(RepStatus::Failed),
    }
}

fn summarize(config: SimConfig, records: Vec<RepRecord>) -> Result<SimSummary> {
    let attempted = records.len();
    let mut failures = FailureCounts::default();
    for r in &records {
        match r.status {
            RepStatus::Ok => {}
            RepStatus::Unbounded => failures.unbounded += 1,
            RepStatus::MaxIterations => failures.max_iterations += 1,
            RepStatus::Failed => failures.other += 1,
        }
    }
    let failed = failures.total();
    if 5 * failed > attempted {
        return Err(Error::TooManyFailures { failed, attempted });
    }
    let used: Vec<&RepRecord> = records
        .iter()
        .filter(|r| r.status == RepStatus::Ok)
        .collect();
    if used.is_empty() {
        return Err(Error::TooManyFailures { failed, attempted });
    }
    let m = used.len();
    let t_hd: Vec<f64> = used.iter().map(|r| r.statistic.unwrap()).collect();
    let p_hd: Vec<f64> = used.iter().map(|r| r.p_value.unwrap()).collect();
    let t_cl: Vec<f64> = used.iter().map(|r| r.classical_statistic.unwrap()).collect();
    let p_cl: Vec<f64> = used.iter().map(|r| r.classical_p_value.unwrap()).collect();

    let alpha = config.alpha;
    let frac_below = |v: &[f64], cut: f64| v.iter().filter(|&&x| x < cut).count() as f64 / m as f64;
    let crit95 = chi2_quantile(0.05, config.k)?;

    let qq = qq_points(&t_hd, config.k)?;
    let classical_qq = qq_points(&t_cl, config.k)?;

    Ok(SimSummary {
        config,
        reps_attempted: attempted,
        reps_used: m,
        failures,
        type_i_error: frac_below(&p_hd, alpha),
        classical_type_i_error: frac_below(&p_cl, alpha),
        coverage95: t_hd.iter().filter(|&&t| t <= crit95).count() as f64 / m as f64,
        classical_coverage95: t_cl.iter().filter(|&&t| t <= crit95).count() as f64 / m as f64,
        ks_distance: ks_distance(&p_hd)?,
        classical_ks_distance: ks_distance(&p_cl)?,
        qq,
        classical_qq,
        reps: records,
    })
}

fn qq_points(stats: &[f64], k: usize) -> Result<Vec<(f64, f64)>> {
    let mut sorted = stats.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = sorted.len();
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let upper = 1.0 - (i as f64 + 0.5) / m as f64;
            Ok((t, chi2_quantile(upper, k)?))
        })
        .collect()
}
