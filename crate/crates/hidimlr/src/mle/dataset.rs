use ndarray::Array2;

use crate::error::{Error, Result};

/// A design matrix `X` (n×p) paired with a response matrix `Y` (n×(K+1))
/// whose rows live on the q-grid simplex `{0, 1/q, ..., 1}^{K+1}`, summing
/// to one. `q = 1` is plain one-hot encoding; `q > 1` stores the average of
/// q one-hot draws per observation.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Array2<f64>,
    y: Array2<f64>,
    q: usize,
}

const GRID_TOL: f64 = 1e-9;

impl Dataset {
    pub fn new(x: Array2<f64>, y: Array2<f64>, q: usize) -> Result<Dataset> {
        let n = x.nrows();
        let p = x.ncols();
        if y.nrows() != n {
            return Err(Error::InvalidData(format!(
                "X has {n} rows but Y has {}",
                y.nrows()
            )));
        }
        let classes = y.ncols();
        if classes < 2 {
            return Err(Error::InvalidData(
                "Y needs at least two class columns (K >= 1)".into(),
            ));
        }
        if p < 1 {
            return Err(Error::InvalidData("X needs at least one column".into()));
        }
        if n <= p {
            return Err(Error::InvalidData(format!(
                "need more observations than features (n = {n}, p = {p})"
            )));
        }
        if q == 0 {
            return Err(Error::InvalidData("repetition count q must be >= 1".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        for (i, row) in y.rows().into_iter().enumerate() {
            let mut sum = 0.0;
            for &v in row.iter() {
                if !v.is_finite() || !(-GRID_TOL..=1.0 + GRID_TOL).contains(&v) {
                    return Err(Error::InvalidData(format!(
                        "Y[{i}] entry {v} outside [0, 1]"
                    )));
                }
                let scaled = v * q as f64;
                if (scaled - scaled.round()).abs() > GRID_TOL * q as f64 {
                    return Err(Error::InvalidData(format!(
                        "Y[{i}] entry {v} is not a multiple of 1/{q}"
                    )));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > GRID_TOL {
                return Err(Error::InvalidData(format!(
                    "Y row {i} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(Dataset { x, y, q })
    }

    /// One-hot dataset from integer class labels in `0..classes`.
    pub fn from_labels(x: Array2<f64>, labels: &[usize], classes: usize) -> Result<Dataset> {
        let n = x.nrows();
        if labels.len() != n {
            return Err(Error::InvalidData(format!(
                "{} labels for {n} rows",
                labels.len()
            )));
        }
        let mut y = Array2::zeros((n, classes));
        for (i, &c) in labels.iter().enumerate() {
            if c >= classes {
                return Err(Error::InvalidData(format!(
                    "label {c} out of range for {classes} classes"
                )));
            }
            y[(i, c)] = 1.0;
        }
        Dataset::new(x, y, 1)
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array2<f64> {
        &self.y
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n_obs(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.y.ncols()
    }

    /// K, the number of contrast coordinates (classes minus one).
    pub fn k(&self) -> usize {
        self.y.ncols() - 1
    }

    /// Expand a q-averaged dataset into the equivalent one-hot dataset with
    /// q·n rows. Ties in the grid representation are resolved exactly since
    /// entries are integer multiples of 1/q.
    pub fn expand_repeats(&self) -> Result<Dataset> {
        let q = self.q;
        let n = self.n_obs();
        let classes = self.n_classes();
        let mut x_big = Array2::zeros((n * q, self.n_features()));
        let mut y_big = Array2::zeros((n * q, classes));
        let mut row = 0;
        for i in 0..n {
            let mut counts: Vec<usize> = self
                .y
                .row(i)
                .iter()
                .map(|&v| (v * q as f64).round() as usize)
                .collect();
            for k in 0..classes {
                while counts[k] > 0 {
                    counts[k] -= 1;
                    x_big.row_mut(row).assign(&self.x.row(i));
                    y_big[(row, k)] = 1.0;
                    row += 1;
                }
            }
        }
        Dataset::new(x_big, y_big, 1)
    }
}
