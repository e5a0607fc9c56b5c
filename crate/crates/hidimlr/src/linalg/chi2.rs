//! Chi-square survival function and upper quantile via the regularized
//! incomplete gamma function: series expansion for small arguments,
//! continued fraction for large ones, quantiles by bracketed bisection.

use crate::error::{Error, Result};

const MAX_ITER: usize = 500;
const EPS: f64 = 1e-16;

// ln Γ(k/2) is exact (up to rounding of ln) for the half-integer orders a
// chi-square needs: Γ(a+1) = a Γ(a) walked down to Γ(1) = 1 or Γ(1/2) = √π.
fn ln_gamma_half(two_a: u64) -> f64 {
    debug_assert!(two_a >= 1);
    let mut acc = if two_a % 2 == 0 {
        0.0 // ln Γ(1)
    } else {
        0.5 * std::f64::consts::PI.ln() // ln Γ(1/2)
    };
    let mut t = two_a;
    while t > 2 {
        t -= 2;
        acc += (t as f64 / 2.0).ln();
    }
    acc
}

// Regularized lower incomplete gamma P(a, x) by power series; a = two_a/2.
fn gamma_p_series(two_a: u64, x: f64) -> f64 {
    let a = two_a as f64 / 2.0;
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma_half(two_a)).exp()
}

// Regularized upper incomplete gamma Q(a, x) by Lentz continued fraction.
fn gamma_q_cf(two_a: u64, x: f64) -> f64 {
    let a = two_a as f64 / 2.0;
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma_half(two_a)).exp() * h
}

/// Survival function `P(W > t)` of a chi-square variable with `k` degrees of
/// freedom.
pub fn chi2_sf(t: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("degrees of freedom must be positive".into()));
    }
    if !t.is_finite() {
        if t.is_nan() {
            return Err(Error::NonFinite);
        }
        return Ok(if t > 0.0 { 0.0 } else { 1.0 });
    }
    if t < 0.0 {
        return Err(Error::Domain(format!("chi2_sf requires t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let two_a = k as u64;
    let a = two_a as f64 / 2.0;
    let x = t / 2.0;
    let q = if x < a + 1.0 {
        1.0 - gamma_p_series(two_a, x)
    } else {
        gamma_q_cf(two_a, x)
    };
    Ok(q.clamp(0.0, 1.0))
}

/// Upper quantile: the `t` with `chi2_sf(t, k) = alpha`, found by expanding a
/// bracket and bisecting until f64 resolution.
pub fn chi2_quantile(alpha: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("degrees of freedom must be positive".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "chi2_quantile requires alpha in (0, 1), got {alpha}"
        )));
    }
    let kf = k as f64;
    let mut hi = kf + 10.0 * (2.0 * kf).sqrt() + 50.0;
    while chi2_sf(hi, k)? > alpha {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Domain("quantile bracket expansion failed".into()));
        }
    }
    let mut lo = 0.0_f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if chi2_sf(mid, k)? > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
