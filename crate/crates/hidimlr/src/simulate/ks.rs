use crate::error::{Error, Result};

/// Kolmogorov–Smirnov distance between the empirical distribution of the
/// given values and the uniform distribution on [0, 1].
pub fn ks_distance(pvals: &[f64]) -> Result<f64> {
    if pvals.is_empty() {
        return Err(Error::Empty);
    }
    if pvals.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Domain("p-values must lie in [0, 1]".into()));
    }
    let mut sorted = pvals.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = sorted.len() as f64;
    let mut d = 0.0_f64;
    for (i, &u) in sorted.iter().enumerate() {
        let hi = (i + 1) as f64 / m - u;
        let lo = u - i as f64 / m;
        d = d.max(hi).max(lo);
    }
    Ok(d)
}
