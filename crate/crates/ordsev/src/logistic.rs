//! Standard logistic distribution primitives.
//!
//! Interval probabilities use the factorization
//!
//! ```text
//! F(b) - F(a) = F(b) * F(-a) * (1 - exp(-(b - a)))
//! ```
//!
//! which is nonnegative by construction and keeps full precision in both
//! tails, including infinite endpoints. Log-domain variants survive interval
//! probabilities far below the smallest normal double.

/// Logistic CDF, 1 / (1 + exp(-z)). Stable for the whole double range.
pub fn logistic_cdf(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Log of the logistic CDF, -ln(1 + exp(-z)).
pub fn log_logistic_cdf(z: f64) -> f64 {
    -softplus(-z)
}

/// Inverse CDF (logit). `p` must lie in (0, 1).
pub fn logistic_quantile(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// ln(1 + exp(t)) without overflow; handles +/- infinity.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// ln(1 - exp(-d)) for d >= 0.
fn log1m_exp(d: f64) -> f64 {
    if d > std::f64::consts::LN_2 {
        (-(-d).exp()).ln_1p()
    } else {
        (-(-d).exp_m1()).ln()
    }
}

/// P(a < Z <= b) for a standard logistic Z, a <= b. Never negative.
pub fn interval_prob(a: f64, b: f64) -> f64 {
    debug_assert!(a <= b);
    logistic_cdf(b) * logistic_cdf(-a) * -(-(b - a)).exp_m1()
}

/// Natural log of [`interval_prob`], finite down to the extreme tails.
pub fn log_interval_prob(a: f64, b: f64) -> f64 {
    debug_assert!(a <= b);
    log_logistic_cdf(b) + log_logistic_cdf(-a) + log1m_exp(b - a)
}

/// Per-interval quantities shared by likelihood, gradient, and Hessian
/// accumulation for one observation.
///
/// `ratio_lo` is pdf(a) / prob and `ratio_hi` is pdf(b) / prob; both stay
/// finite deep in the tails where pdf and prob underflow individually.
/// `shape_lo`/`shape_hi` are 1 - 2 F(.) at the endpoints (equal to
/// -tanh(z / 2)).
#[derive(Debug, Clone, Copy)]
pub(crate) struct IntervalStats {
    pub log_prob: f64,
    pub ratio_lo: f64,
    pub ratio_hi: f64,
    pub shape_lo: f64,
    pub shape_hi: f64,
}

pub(crate) fn interval_stats(a: f64, b: f64) -> IntervalStats {
    let l1me = log1m_exp(b - a);
    let (lp_a, lq_a) = (log_logistic_cdf(a), log_logistic_cdf(-a));
    let (lp_b, lq_b) = (log_logistic_cdf(b), log_logistic_cdf(-b));
    IntervalStats {
        log_prob: lp_b + lq_a + l1me,
        ratio_lo: (lp_a - lp_b - l1me).exp(),
        ratio_hi: (lq_b - lq_a - l1me).exp(),
        shape_lo: -(a / 2.0).tanh(),
        shape_hi: -(b / 2.0).tanh(),
    }
}
