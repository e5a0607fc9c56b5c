use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::linalg::{weighted_gram, Cholesky, SymMatrix};
use crate::mle::dataset::Dataset;
use crate::mle::loss::softmax_rows;
use crate::mle::qbasis::{build_q, QBasis};

const ARMIJO: f64 = 1e-4;

/// Solver configuration. `grad_tol` is the absolute sup-norm threshold on
/// the stationarity residual `XᵀG`; when unset it defaults to `1e-9·n`
/// because the gradient is a sum of n bounded terms.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub grad_tol: Option<f64>,
    pub max_iter: usize,
    /// Boundedness constant: the fit is declared unbounded once
    /// `‖X B̂‖_F² / n` exceeds this.
    pub tau: f64,
    /// Balance constant: each class should be observed in at least
    /// `gamma·n` rows.
    pub gamma: f64,
    pub line_search_shrink: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            grad_tol: None,
            max_iter: 200,
            tau: 50.0,
            gamma: 0.05,
            line_search_shrink: 0.5,
        }
    }
}

impl FitConfig {
    pub fn validate(&self, classes: usize) -> Result<()> {
        if let Some(t) = self.grad_tol {
            if !(t > 0.0) {
                return Err(Error::InvalidConfig("grad_tol must be positive".into()));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be positive".into()));
        }
        if !(self.tau > 0.0) {
            return Err(Error::InvalidConfig("tau must be positive".into()));
        }
        if !(self.gamma > 0.0) || self.gamma > 1.0 / classes as f64 {
            return Err(Error::InvalidConfig(format!(
                "gamma must lie in (0, 1/{classes}]"
            )));
        }
        if !(self.line_search_shrink > 0.0 && self.line_search_shrink < 1.0) {
            return Err(Error::InvalidConfig(
                "line_search_shrink must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }

    pub fn resolved_grad_tol(&self, n: usize) -> f64 {
        self.grad_tol.unwrap_or(1e-9 * n as f64)
    }
}

/// Converged maximum-likelihood fit, carrying the estimate in all three
/// parametrizations plus the per-observation quantities inference needs.
#[derive(Debug, Clone)]
pub struct FitResult {
    /// Reference-class estimate (p×K): column k is the contrast between
    /// class k and the last class.
    pub a_hat: Array2<f64>,
    /// Centered estimate (p×(K+1)) with rows summing to zero.
    pub b_hat_centered: Array2<f64>,
    /// Coefficients in the orthogonal parametrization (p×K); the logits are
    /// `X · b_ortho · Qᵀ`.
    pub b_ortho: Array2<f64>,
    /// Fitted probabilities (n×(K+1)); rows strictly positive, summing to one.
    pub p_hat: Array2<f64>,
    /// Per-observation gradients `p̂_i − y_i` as rows (n×(K+1)).
    pub g: Array2<f64>,
    pub iterations: usize,
    pub final_grad_norm: f64,
    /// `‖X B̂‖_F² / n`, the quantity compared against `tau`.
    pub boundedness: f64,
}

impl FitResult {
    pub fn n_obs(&self) -> usize {
        self.p_hat.nrows()
    }

    pub fn k(&self) -> usize {
        self.a_hat.ncols()
    }

    pub fn n_features(&self) -> usize {
        self.a_hat.nrows()
    }
}

fn loss_from_xb(xb: &Array2<f64>, q: &QBasis, y: ArrayView2<'_, f64>) -> f64 {
    // logits U = XB·Qᵀ; loss = Σ lse(U_i) − <Y, U>
    let u = xb.dot(&q.matrix().t());
    let mut total = 0.0;
    for (urow, yrow) in u.rows().into_iter().zip(y.rows()) {
        let m = urow.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let lse = m + urow.iter().map(|&v| (v - m).exp()).sum::<f64>().ln();
        let dot: f64 = urow.iter().zip(yrow.iter()).map(|(a, b)| a * b).sum();
        total += lse - dot;
    }
    total
}

/// Newton solver for the cross-entropy MLE in the K-dimensional orthogonal
/// parametrization, with backtracking line search. Initialization is at
/// zero, the symmetric point of the convex objective.
pub fn fit_mle(data: &Dataset, config: &FitConfig) -> Result<FitResult> {
    let classes = data.n_classes();
    config.validate(classes)?;
    let n = data.n_obs();
    let p = data.n_features();
    let k = data.k();
    let x = data.x();
    let y = data.y();
    let q = build_q(k);
    let grad_tol = config.resolved_grad_tol(n);

    let mut b = Array2::<f64>::zeros((p, k));
    let mut xb = Array2::<f64>::zeros((n, k));
    let mut iterations = 0;
    let mut grad_norm;

    loop {
        let u = xb.dot(&q.matrix().t());
        let boundedness = xb.iter().map(|v| v * v).sum::<f64>() / n as f64;
        if boundedness > config.tau {
            return Err(Error::Unbounded { metric: boundedness, tau: config.tau });
        }
        let p_hat = softmax_rows(&u);
        let g = &p_hat - y;

        let xtg = x.t().dot(&g);
        grad_norm = xtg.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
        if grad_norm <= grad_tol {
            return Ok(finish(data, &q, b, xb, p_hat, g, iterations, grad_norm));
        }
        if iterations >= config.max_iter {
            return Err(Error::MaxIterations { max_iter: config.max_iter, grad_norm });
        }

        let grad_q = xtg.dot(q.matrix());
        let newton = assemble_newton_matrix(x.view(), &p_hat, &q);
        let chol = Cholesky::new(&newton).map_err(|e| match e {
            Error::NotSpd { pivot, index } => Error::RankDeficient(format!(
                "Newton system is numerically singular (pivot {pivot:e} at {index})"
            )),
            other => other,
        })?;

        let mut rhs = Array1::<f64>::zeros(p * k);
        for col in 0..k {
            for row in 0..p {
                rhs[col * p + row] = -grad_q[(row, col)];
            }
        }
        let sol = chol.solve_vec(&rhs);
        let mut dir = Array2::<f64>::zeros((p, k));
        for col in 0..k {
            for row in 0..p {
                dir[(row, col)] = sol[col * p + row];
            }
        }

        let descent: f64 = grad_q.iter().zip(dir.iter()).map(|(a, b)| a * b).sum();
        let loss0 = loss_from_xb(&xb, &q, y.view());
        let xd = x.dot(&dir);

        // round-off allowance: near the optimum the true decrease per step
        // falls below one ulp of the loss and a strict Armijo test would
        // reject every candidate
        let slack = 8.0 * f64::EPSILON * loss0.abs();
        let mut step = 1.0;
        loop {
            let cand = &xb + &(&xd * step);
            let loss1 = loss_from_xb(&cand, &q, y.view());
            if loss1 <= loss0 + ARMIJO * step * descent + slack {
                xb = cand;
                break;
            }
            step *= config.line_search_shrink;
            if step < 1e-16 {
                return Err(Error::MaxIterations {
                    max_iter: config.max_iter,
                    grad_norm,
                });
            }
        }
        b.scaled_add(step, &dir);
        iterations += 1;
    }
}

fn assemble_newton_matrix(
    x: ArrayView2<'_, f64>,
    p_hat: &Array2<f64>,
    q: &QBasis,
) -> SymMatrix {
    let p = x.ncols();
    let k = q.k();
    let t = p_hat.dot(q.matrix()); // n×K, entries p̂_iᵀ q_k
    let mut m = Array2::<f64>::zeros((p * k, p * k));
    for a in 0..k {
        for bcol in a..k {
            // weight h_i = q_aᵀ Ĥ_i q_b = Σ_c p̂_ic q_ca q_cb − (p̂ᵀq_a)(p̂ᵀq_b)
            let prod = Array1::from_iter(
                q.matrix()
                    .column(a)
                    .iter()
                    .zip(q.matrix().column(bcol).iter())
                    .map(|(u, v)| u * v),
            );
            let mut h = p_hat.dot(&prod);
            for (i, hv) in h.iter_mut().enumerate() {
                *hv -= t[(i, a)] * t[(i, bcol)];
            }
            let block = weighted_gram(x, h.view());
            m.slice_mut(ndarray::s![a * p..(a + 1) * p, bcol * p..(bcol + 1) * p])
                .assign(block.as_array());
            if bcol != a {
                m.slice_mut(ndarray::s![bcol * p..(bcol + 1) * p, a * p..(a + 1) * p])
                    .assign(block.as_array());
            }
        }
    }
    SymMatrix::symmetrized(&m)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    data: &Dataset,
    q: &QBasis,
    b: Array2<f64>,
    xb: Array2<f64>,
    p_hat: Array2<f64>,
    g: Array2<f64>,
    iterations: usize,
    final_grad_norm: f64,
) -> FitResult {
    let n = data.n_obs();
    let mut b_hat_centered = b.dot(&q.matrix().t());
    // take out the row means so each row sums to zero exactly up to round-off
    let classes = data.n_classes() as f64;
    for mut row in b_hat_centered.rows_mut() {
        let mean = row.sum() / classes;
        row.mapv_inplace(|v| v - mean);
    }
    let k = data.k();
    let mut a_hat = Array2::zeros((data.n_features(), k));
    for col in 0..k {
        let diff = &b_hat_centered.column(col) - &b_hat_centered.column(k);
        a_hat.column_mut(col).assign(&diff);
    }
    let boundedness = xb.iter().map(|v| v * v).sum::<f64>() / n as f64;
    FitResult {
        a_hat,
        b_hat_centered,
        b_ortho: b,
        p_hat,
        g,
        iterations,
        final_grad_norm,
        boundedness,
    }
}

/// Class balance check: class k counts as observed in row i when
/// `y_ik ≥ 1/q`. Returns whether every class is observed at least
/// `gamma·n` times, along with the per-class counts.
pub fn check_balance(data: &Dataset, gamma: f64) -> (bool, Vec<usize>) {
    let n = data.n_obs();
    let q = data.q() as f64;
    let thresh = 1.0 / q - 1e-9;
    let counts: Vec<usize> = (0..data.n_classes())
        .map(|k| {
            data.y()
                .index_axis(Axis(1), k)
                .iter()
                .filter(|&&v| v >= thresh)
                .count()
        })
        .collect();
    let ok = counts.iter().all(|&c| c as f64 >= gamma * n as f64);
    (ok, counts)
}

/// Boundedness check on a converged fit: `‖X B̂‖_F²/n ≤ tau`.
pub fn check_boundedness(fit: &FitResult, tau: f64) -> bool {
    fit.boundedness <= tau
}
