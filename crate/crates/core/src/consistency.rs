//! Classical consistency baselines for Kalman filtering: NEES, NIS, the
//! sliding-window time-average NIS with chi-squared confidence bounds, and
//! the special functions they rest on.
//!
//! The chi-squared machinery is implemented from scratch (regularized lower
//! incomplete gamma via series and continued-fraction expansions, quantiles
//! by bisection) so the toolkit carries no statistics dependency and can be
//! checked directly against published tables.

use nalgebra::{DMatrix, DVector};
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConsistencyError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("matrix is not positive definite")]
    NonPositiveDefinite,
}

pub type Result<T> = std::result::Result<T, ConsistencyError>;

// ── special functions ──────────────────────────────────────────────────

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
#[allow(clippy::excessive_precision)] // published coefficient table
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // recurrence ln G(x) = ln G(x+1) - ln x keeps the small-argument range accurate
        return ln_gamma(x + 1.0) - x.ln();
    }
    let z = x - 1.0;
    let mut acc = 0.99999999999980993;
    for (i, c) in COEFFS.iter().enumerate() {
        acc += c / (z + (i + 1) as f64);
    }
    let t = z + 7.5;
    0.5 * (std::f64::consts::TAU).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 500;

/// Regularized lower incomplete gamma function P(a, x).
pub fn gamma_p(a: f64, x: f64) -> Result<f64> {
    check_gamma_args(a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        Ok(gamma_p_series(a, x))
    } else {
        Ok(1.0 - gamma_q_continued_fraction(a, x))
    }
}

/// Regularized upper incomplete gamma function Q(a, x) = 1 - P(a, x),
/// computed without cancellation in the tail.
pub fn gamma_q(a: f64, x: f64) -> Result<f64> {
    check_gamma_args(a, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x < a + 1.0 {
        Ok(1.0 - gamma_p_series(a, x))
    } else {
        Ok(gamma_q_continued_fraction(a, x))
    }
}

fn check_gamma_args(a: f64, x: f64) -> Result<()> {
    if a <= 0.0 {
        return Err(ConsistencyError::Domain(format!(
            "incomplete gamma: a = {a} <= 0"
        )));
    }
    if x < 0.0 {
        return Err(ConsistencyError::Domain(format!(
            "incomplete gamma: x = {x} < 0"
        )));
    }
    Ok(())
}

// series expansion, converges fastest for x < a + 1
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut denom = a;
    for _ in 0..GAMMA_MAX_ITER {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    let log_prefactor = a * x.ln() - x - ln_gamma(a);
    if log_prefactor < -700.0 {
        return 0.0;
    }
    sum * log_prefactor.exp()
}

// Lentz's continued fraction for Q(a, x), converges for x >= a + 1
fn gamma_q_continued_fraction(a: f64, x: f64) -> f64 {
    const FPMIN: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    let log_prefactor = a * x.ln() - x - ln_gamma(a);
    if log_prefactor < -700.0 {
        return 0.0;
    }
    h * log_prefactor.exp()
}

/// Chi-squared CDF with `dof` degrees of freedom (any positive real).
pub fn chi2_cdf(x: f64, dof: f64) -> Result<f64> {
    if dof <= 0.0 {
        return Err(ConsistencyError::Domain(format!("chi2_cdf: dof = {dof}")));
    }
    if x < 0.0 {
        return Err(ConsistencyError::Domain(format!("chi2_cdf: x = {x} < 0")));
    }
    gamma_p(dof / 2.0, x / 2.0)
}

/// Chi-squared quantile by bisection on [`chi2_cdf`].
pub fn chi2_quantile(p: f64, dof: f64) -> Result<f64> {
    if dof <= 0.0 {
        return Err(ConsistencyError::Domain(format!(
            "chi2_quantile: dof = {dof}"
        )));
    }
    if !(0.0..1.0).contains(&p) || p == 0.0 {
        if p == 0.0 {
            return Ok(0.0);
        }
        return Err(ConsistencyError::Domain(format!("chi2_quantile: p = {p}")));
    }
    // bracket the quantile, then bisect
    let mut lo = 0.0;
    let mut hi = dof + 10.0 * (2.0 * dof).sqrt() + 10.0;
    while chi2_cdf(hi, dof)? < p {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(ConsistencyError::Domain(format!(
                "chi2_quantile: failed to bracket p = {p}"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi2_cdf(mid, dof)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Two-sided chi-squared confidence band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceBand {
    pub lo: f64,
    pub hi: f64,
    pub confidence: f64,
}

/// Central confidence interval of the chi-squared distribution: the
/// `(1-c)/2` and `(1+c)/2` quantiles.
pub fn chi2_interval(dof: f64, confidence: f64) -> Result<ConfidenceBand> {
    if !(0.0..1.0).contains(&confidence) || confidence == 0.0 {
        return Err(ConsistencyError::Domain(format!(
            "chi2_interval: confidence = {confidence}"
        )));
    }
    let lo = chi2_quantile((1.0 - confidence) / 2.0, dof)?;
    let hi = chi2_quantile((1.0 + confidence) / 2.0, dof)?;
    Ok(ConfidenceBand { lo, hi, confidence })
}

/// Standard normal CDF, evaluated through the incomplete gamma function.
///
/// The lower tail goes through the upper incomplete gamma directly
/// (`Phi(x) = Q(1/2, x^2/2) / 2` for negative `x`), which keeps tail
/// probabilities accurate to full relative precision.
pub fn norm_cdf(x: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    let q = gamma_q(0.5, 0.5 * x * x).expect("fixed positive arguments");
    if x < 0.0 {
        0.5 * q
    } else {
        1.0 - 0.5 * q
    }
}

/// Standard normal inverse CDF.
///
/// Acklam's rational approximation refined with one Newton step on
/// [`norm_cdf`]; absolute error is far below 1e-9 over the open unit
/// interval. The refinement always runs in the lower tail, where the CDF
/// is relative-accurate; `1 - p` is exact for `p >= 0.5`.
pub fn norm_inv_cdf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(ConsistencyError::Domain(format!("norm_inv_cdf: p = {p}")));
    }
    if p > 0.5 {
        return Ok(-norm_inv_cdf_lower(1.0 - p));
    }
    Ok(norm_inv_cdf_lower(p))
}

// q in (0, 0.5]
fn norm_inv_cdf_lower(q: f64) -> f64 {
    let x = acklam(q);
    // one Newton refinement: x - (Phi(x) - q) / phi(x)
    let pdf = (-0.5 * x * x).exp() / (std::f64::consts::TAU).sqrt();
    if pdf > 0.0 {
        x - (norm_cdf(x) - q) / pdf
    } else {
        x
    }
}

#[allow(clippy::excessive_precision)] // published coefficient table
fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

// ── Mahalanobis statistics ─────────────────────────────────────────────

fn mahalanobis_squared(v: &DVector<f64>, m: &DMatrix<f64>) -> Result<f64> {
    if m.nrows() != v.len() || m.ncols() != v.len() {
        return Err(ConsistencyError::Domain(format!(
            "dimension mismatch: vector {} vs matrix {}x{}",
            v.len(),
            m.nrows(),
            m.ncols()
        )));
    }
    let chol = m
        .clone()
        .cholesky()
        .ok_or(ConsistencyError::NonPositiveDefinite)?;
    let solved = chol.solve(v);
    Ok(v.dot(&solved))
}

/// Normalized estimation error squared: `e' P^-1 e`.
pub fn nees(state_error: &DVector<f64>, cov: &DMatrix<f64>) -> Result<f64> {
    mahalanobis_squared(state_error, cov)
}

/// Normalized innovation squared: `g' S^-1 g`.
pub fn nis(residual: &DVector<f64>, innovation_cov: &DMatrix<f64>) -> Result<f64> {
    mahalanobis_squared(residual, innovation_cov)
}

// ── time-average NIS window ────────────────────────────────────────────

/// Sliding window of NIS values with a running mean.
///
/// Until the window fills, the mean is taken over the values seen so far;
/// callers flag those rows as warm-up.
#[derive(Debug, Clone)]
pub struct NisWindow {
    capacity: usize,
    buffer: VecDeque<f64>,
    sum: f64,
}

impl NisWindow {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "window capacity must be positive");
        Self {
            capacity,
            buffer: VecDeque::with_capacity(capacity),
            sum: 0.0,
        }
    }

    /// Pushes one NIS value, evicting the oldest when full, and returns the
    /// mean of the current buffer.
    pub fn push(&mut self, eps: f64) -> Result<f64> {
        if eps < 0.0 {
            return Err(ConsistencyError::Domain(format!(
                "NIS value must be non-negative, got {eps}"
            )));
        }
        if self.buffer.len() == self.capacity {
            self.sum -= self.buffer.pop_front().expect("non-empty buffer");
        }
        self.buffer.push_back(eps);
        self.sum += eps;
        Ok(self.sum / self.buffer.len() as f64)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    /// True until `capacity` values have been pushed.
    pub fn is_warmup(&self) -> bool {
        self.buffer.len() < self.capacity
    }
}
