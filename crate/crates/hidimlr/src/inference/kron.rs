use ndarray::{s, Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::linalg::{rowwise_quadform, weighted_gram, Cholesky, PartialPivLu, SymMatrix};
use crate::mle::{build_q, FitResult, QBasis};

/// Which factorization backs the inverse action of the full curvature
/// matrix `Σ_l Ĥ_l ⊗ (x_l x_lᵀ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// One SPD factorization of the pK×pK matrix in the orthogonal
    /// parametrization.
    Dense,
    /// Low-rank update route: K+1 SPD factorizations of the per-class
    /// p×p blocks plus one (n+p)×(n+p) core factorization.
    Woodbury,
}

impl Backend {
    /// Pick a backend from the problem shape. The low-rank route only wins
    /// when the dense pK×pK factorization would dwarf both the class blocks
    /// and the (n+p)×(n+p) core, which requires pK to exceed n+p.
    pub fn auto(n: usize, p: usize, k: usize) -> Backend {
        if p * (k + 1) > 600 && p * k > n + p {
            Backend::Woodbury
        } else {
            Backend::Dense
        }
    }
}

const MIN_PROB_WOODBURY: f64 = 1e-12;
const VSUM_BATCH: usize = 128;

enum Inner {
    Dense {
        q: QBasis,
        chol: Cholesky,
    },
    Woodbury {
        class_chols: Vec<Cholesky>,
        /// `A_k^{-1} Xᵀ` per class (p×n).
        binv_xt: Vec<Array2<f64>>,
        core_lu: PartialPivLu,
        p_hat: Array2<f64>,
        x: Array2<f64>,
    },
}

/// Factorized representation of `Σ_l Ĥ_l ⊗ (x_l x_lᵀ)` supporting the
/// pseudo-inverse action on arbitrary right-hand sides.
pub struct KronSolver {
    n: usize,
    p: usize,
    k: usize,
    inner: Inner,
}

impl KronSolver {
    pub fn new(fit: &FitResult, x: ArrayView2<'_, f64>, backend: Backend) -> Result<KronSolver> {
        let n = fit.n_obs();
        let p = fit.n_features();
        let k = fit.k();
        assert_eq!(x.nrows(), n, "design matrix rows do not match the fit");
        assert_eq!(x.ncols(), p, "design matrix columns do not match the fit");

        let inner = match backend {
            Backend::Dense => {
                let q = build_q(k);
                let m = kspace_curvature(x, &fit.p_hat, &q);
                let chol = Cholesky::new(&m)?;
                Inner::Dense { q, chol }
            }
            Backend::Woodbury => {
                let min_prob = fit.p_hat.iter().cloned().fold(f64::INFINITY, f64::min);
                if min_prob < MIN_PROB_WOODBURY {
                    return Err(Error::DegenerateProbabilities { min_prob });
                }
                build_woodbury(fit, x)?
            }
        };
        Ok(KronSolver { n, p, k, inner })
    }

    pub fn backend(&self) -> Backend {
        match self.inner {
            Inner::Dense { .. } => Backend::Dense,
            Inner::Woodbury { .. } => Backend::Woodbury,
        }
    }

    pub fn classes(&self) -> usize {
        self.k + 1
    }

    /// Apply the pseudo-inverse of `Σ_l Ĥ_l ⊗ (x_l x_lᵀ)` to a vector given
    /// in matrix form: `F` is p×(K+1) with column k holding block k of the
    /// stacked vector.
    pub fn apply(&self, f: &Array2<f64>) -> Array2<f64> {
        assert_eq!(f.nrows(), self.p);
        assert_eq!(f.ncols(), self.k + 1);
        match &self.inner {
            Inner::Dense { q, chol } => {
                let fq = f.dot(q.matrix()); // p×K
                let mut rhs = Array1::zeros(self.p * self.k);
                for col in 0..self.k {
                    for row in 0..self.p {
                        rhs[col * self.p + row] = fq[(row, col)];
                    }
                }
                let sol = chol.solve_vec(&rhs);
                let mut y = Array2::zeros((self.p, self.k));
                for col in 0..self.k {
                    for row in 0..self.p {
                        y[(row, col)] = sol[col * self.p + row];
                    }
                }
                y.dot(&q.matrix().t())
            }
            Inner::Woodbury { class_chols, core_lu, p_hat, x, .. } => {
                let classes = self.k + 1;
                // y1 = A^{-1} f, class block by class block
                let mut y1 = Array2::zeros((self.p, classes));
                for c in 0..classes {
                    let col = class_chols[c].solve_vec(&f.column(c).to_owned());
                    y1.column_mut(c).assign(&col);
                }
                // t = Uᵀ y1
                let xy = x.dot(&y1); // n×(K+1)
                let mut t = Array1::zeros(self.n + self.p);
                for i in 0..self.n {
                    let mut acc = 0.0;
                    for c in 0..classes {
                        acc += p_hat[(i, c)] * xy[(i, c)];
                    }
                    t[i] = acc;
                }
                for j in 0..self.p {
                    t[self.n + j] = y1.row(j).sum();
                }
                let w = core_lu.solve_vec(&t);
                // Uw in matrix form
                let w_top = w.slice(s![..self.n]);
                let mut scaled = p_hat.clone();
                for (mut row, &wi) in scaled.rows_mut().into_iter().zip(w_top.iter()) {
                    row.mapv_inplace(|v| v * wi);
                }
                let mut uw = x.t().dot(&scaled); // p×(K+1)
                let w_bot = w.slice(s![self.n..]);
                for c in 0..classes {
                    let mut col = uw.column_mut(c);
                    col += &w_bot;
                }
                // y2 = A^{-1} (U w)
                let mut y2 = Array2::zeros((self.p, classes));
                for c in 0..classes {
                    let col = class_chols[c].solve_vec(&uw.column(c).to_owned());
                    y2.column_mut(c).assign(&col);
                }
                let mut out = &y1 - &y2;
                // restore the pseudo-inverse on the kernel component
                let denom = (classes * classes) as f64;
                let rowsum: Array1<f64> = f.sum_axis(Axis(1));
                for c in 0..classes {
                    let mut col = out.column_mut(c);
                    col.scaled_add(1.0 / denom, &rowsum);
                }
                out
            }
        }
    }
}

fn build_woodbury(fit: &FitResult, x: ArrayView2<'_, f64>) -> Result<Inner> {
    let n = fit.n_obs();
    let p = fit.n_features();
    let classes = fit.k() + 1;
    let p_hat = fit.p_hat.clone();

    let mut class_chols = Vec::with_capacity(classes);
    let mut binv_xt = Vec::with_capacity(classes);
    let mut a_inv_sum = Array2::<f64>::zeros((p, p));
    for c in 0..classes {
        let a_c = weighted_gram(x, p_hat.column(c));
        let chol = Cholesky::new(&a_c)?;
        let b_c = chol.solve_mat(&x.t().to_owned());
        a_inv_sum += chol.inverse().as_array();
        class_chols.push(chol);
        binv_xt.push(b_c);
    }

    // core C = −I + Uᵀ A^{-1} U, ordered observations first then kernel columns
    let mut core = Array2::<f64>::zeros((n + p, n + p));
    for c in 0..classes {
        let g_c = x.dot(&binv_xt[c]); // n×n
        let pc = p_hat.column(c);
        {
            let mut tl = core.slice_mut(s![..n, ..n]);
            for l in 0..n {
                let pl = pc[l];
                let grow = g_c.row(l);
                let mut crow = tl.row_mut(l);
                for i in 0..n {
                    crow[i] += pl * grow[i] * pc[i];
                }
            }
        }
        {
            // top-right block: Σ_k p̂_lk B_k[j, l]
            let mut tr = core.slice_mut(s![..n, n..]);
            for l in 0..n {
                let pl = pc[l];
                let bcol = binv_xt[c].column(l);
                let mut crow = tr.row_mut(l);
                for j in 0..p {
                    crow[j] += pl * bcol[j];
                }
            }
        }
    }
    {
        let mut br = core.slice_mut(s![n.., n..]);
        br += &a_inv_sum;
    }
    // mirror the top-right into the bottom-left
    for l in 0..n {
        for j in 0..p {
            core[(n + j, l)] = core[(l, n + j)];
        }
    }
    for d in 0..(n + p) {
        core[(d, d)] -= 1.0;
    }
    let core_lu = PartialPivLu::new(&core).map_err(|_| {
        Error::RankDeficient("low-rank core factorization failed".into())
    })?;

    Ok(Inner::Woodbury {
        class_chols,
        binv_xt,
        core_lu,
        p_hat,
        x: x.to_owned(),
    })
}

/// `Σ_i (Qᵀ Ĥ_i Q) ⊗ (x_i x_iᵀ)`: the curvature of the fit in the
/// orthogonal parametrization, assembled block by block as weighted Grams.
pub(crate) fn kspace_curvature(
    x: ArrayView2<'_, f64>,
    p_hat: &Array2<f64>,
    q: &QBasis,
) -> SymMatrix {
    let p = x.ncols();
    let k = q.k();
    let t = p_hat.dot(q.matrix());
    let mut m = Array2::<f64>::zeros((p * k, p * k));
    for a in 0..k {
        for b in a..k {
            let prod = Array1::from_iter(
                q.matrix()
                    .column(a)
                    .iter()
                    .zip(q.matrix().column(b).iter())
                    .map(|(u, v)| u * v),
            );
            let mut h = p_hat.dot(&prod);
            for (i, hv) in h.iter_mut().enumerate() {
                *hv -= t[(i, a)] * t[(i, b)];
            }
            let block = weighted_gram(x, h.view());
            m.slice_mut(s![a * p..(a + 1) * p, b * p..(b + 1) * p])
                .assign(block.as_array());
            if b != a {
                m.slice_mut(s![b * p..(b + 1) * p, a * p..(a + 1) * p])
                    .assign(block.as_array());
            }
        }
    }
    SymMatrix::symmetrized(&m)
}

fn obs_hessian(p_row: ndarray::ArrayView1<'_, f64>) -> Array2<f64> {
    let m = p_row.len();
    let mut h = Array2::zeros((m, m));
    for a in 0..m {
        for b in 0..m {
            h[(a, b)] = if a == b {
                p_row[a] * (1.0 - p_row[a])
            } else {
                -p_row[a] * p_row[b]
            };
        }
    }
    h
}

/// `(1/n) Σ_i V̄_i` in the orthogonal (K-dimensional) parametrization.
pub(crate) fn v_sum_k(
    fit: &FitResult,
    x: ArrayView2<'_, f64>,
    solver: &KronSolver,
) -> Result<SymMatrix> {
    let k = fit.k();
    match &solver.inner {
        Inner::Dense { q, chol } => {
            let n = fit.n_obs();
            let p = fit.n_features();
            let minv = chol.inverse();
            // per-block row quadratic forms s_i[a,b] = x_iᵀ (M^{-1})_{ab} x_i
            let mut svals: Vec<Vec<f64>> = Vec::with_capacity(k * k);
            for _ in 0..k * k {
                svals.push(Vec::new());
            }
            for a in 0..k {
                for b in a..k {
                    let block = minv
                        .as_array()
                        .slice(s![a * p..(a + 1) * p, b * p..(b + 1) * p]);
                    let qf = rowwise_quadform(x, block);
                    svals[a * k + b] = qf.clone();
                    if b != a {
                        svals[b * k + a] = qf;
                    }
                }
            }
            let t = fit.p_hat.dot(q.matrix()); // n×K
            let qm = q.matrix();
            let classes = k + 1;
            let mut acc = Array2::<f64>::zeros((k, k));
            let mut h_i = Array2::<f64>::zeros((k, k));
            let mut s_i = Array2::<f64>::zeros((k, k));
            for i in 0..n {
                for a in 0..k {
                    for b in 0..k {
                        let mut v = 0.0;
                        for c in 0..classes {
                            v += fit.p_hat[(i, c)] * qm[(c, a)] * qm[(c, b)];
                        }
                        h_i[(a, b)] = v - t[(i, a)] * t[(i, b)];
                        s_i[(a, b)] = svals[a * k + b][i];
                    }
                }
                let hs = h_i.dot(&s_i);
                let hsh = hs.dot(&h_i);
                acc += &h_i;
                acc -= &hsh;
            }
            acc.mapv_inplace(|v| v / n as f64);
            Ok(SymMatrix::symmetrized(&acc))
        }
        Inner::Woodbury { .. } => {
            let vbar = v_sum_full(fit, x, solver)?;
            let q = build_q(k);
            let vk = q.matrix().t().dot(vbar.as_array()).dot(q.matrix());
            Ok(SymMatrix::symmetrized(&vk))
        }
    }
}

/// `(1/n) Σ_i V̄_i` in the over-specified (K+1)-dimensional space: the
/// per-observation Hessian minus its correction through the full curvature
/// matrix. Symmetric, PSD, with the all-ones vector in its kernel.
pub fn compute_v_sum(
    fit: &FitResult,
    x: ArrayView2<'_, f64>,
    solver: &KronSolver,
) -> Result<SymMatrix> {
    match &solver.inner {
        Inner::Dense { q, .. } => {
            let vk = v_sum_k(fit, x, solver)?;
            let vbar = q.matrix().dot(vk.as_array()).dot(&q.matrix().t());
            Ok(SymMatrix::symmetrized(&vbar))
        }
        Inner::Woodbury { .. } => v_sum_full(fit, x, solver),
    }
}

// Batched evaluation of Σ_i [Ĥ_i − Z_iᵀ (A − UUᵀ)^{-1} Z_i] with
// Z_i = Ĥ_i ⊗ x_i, using the low-rank factorization.
fn v_sum_full(
    fit: &FitResult,
    x: ArrayView2<'_, f64>,
    solver: &KronSolver,
) -> Result<SymMatrix> {
    let (binv_xt, core_lu, p_hat) = match &solver.inner {
        Inner::Woodbury { binv_xt, core_lu, p_hat, .. } => (binv_xt, core_lu, p_hat),
        Inner::Dense { .. } => unreachable!("dense backend handled by caller"),
    };
    let n = fit.n_obs();
    let p = fit.n_features();
    let classes = fit.k() + 1;

    // d_ic = x_iᵀ A_c^{-1} x_i
    let mut diag_quad = Array2::<f64>::zeros((n, classes));
    for c in 0..classes {
        for i in 0..n {
            diag_quad[(i, c)] = x.row(i).dot(&binv_xt[c].column(i));
        }
    }

    let mut acc = Array2::<f64>::zeros((classes, classes));
    let mut batch_start = 0;
    while batch_start < n {
        let bs = VSUM_BATCH.min(n - batch_start);
        let idx = batch_start..batch_start + bs;
        let mut w = Array2::<f64>::zeros((n + p, bs * classes));

        for c in 0..classes {
            let g_ci = x.dot(&binv_xt[c].slice(s![.., idx.clone()])); // n×bs
            let pc = p_hat.column(c);
            for (loc, i) in idx.clone().enumerate() {
                let h_i = obs_hessian(fit.p_hat.row(i));
                // scaled column p̂_{·c} ∘ G_c[·, i]
                let mut scaled = g_ci.column(loc).to_owned();
                for (v, &pv) in scaled.iter_mut().zip(pc.iter()) {
                    *v *= pv;
                }
                for a in 0..classes {
                    let coef = h_i[(c, a)];
                    if coef != 0.0 {
                        let mut col = w.slice_mut(s![..n, loc * classes + a]);
                        col.scaled_add(coef, &scaled);
                    }
                }
                let bcol = binv_xt[c].column(i);
                for a in 0..classes {
                    let coef = h_i[(c, a)];
                    if coef != 0.0 {
                        let mut col = w.slice_mut(s![n.., loc * classes + a]);
                        col.scaled_add(coef, &bcol);
                    }
                }
            }
        }

        let solved = core_lu.solve_mat(&w);
        for (loc, i) in idx.clone().enumerate() {
            let h_i = obs_hessian(fit.p_hat.row(i));
            let wi = w.slice(s![.., loc * classes..(loc + 1) * classes]);
            let pi = solved.slice(s![.., loc * classes..(loc + 1) * classes]);
            let quad = wi.t().dot(&pi); // (K+1)×(K+1)
            // Ĥ_i D_i Ĥ_i with D = diag of per-class quadratic forms
            let mut hd = h_i.clone();
            for col in 0..classes {
                let d = diag_quad[(i, col)];
                hd.column_mut(col).mapv_inplace(|v| v * d);
            }
            let hdh = hd.dot(&h_i);
            acc += &h_i;
            acc -= &hdh;
            acc += &quad;
        }
        batch_start += bs;
    }
    acc.mapv_inplace(|v| v / n as f64);
    Ok(SymMatrix::symmetrized(&acc))
}
