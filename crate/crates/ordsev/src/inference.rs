//! Post-estimation statistics: standard errors, t-statistics with
//! significance stars, the likelihood-ratio chi-square against the
//! intercept-only model, and McFadden's pseudo R-squared.

use serde::{Deserialize, Serialize};

use crate::design::ColumnLabel;
use crate::error::{Error, Result};
use crate::fit::OrderedLogitFit;
use crate::special::chi_square_sf;

/// Two-sided significance level of a t-ratio under the normal approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Significance {
    None,
    Pct90,
    Pct95,
    Pct99,
}

impl Significance {
    pub fn from_t(t: f64) -> Self {
        let t = t.abs();
        if t >= 2.576 {
            Significance::Pct99
        } else if t >= 1.960 {
            Significance::Pct95
        } else if t >= 1.645 {
            Significance::Pct90
        } else {
            Significance::None
        }
    }

    /// Conventional star marker.
    pub fn stars(&self) -> &'static str {
        match self {
            Significance::None => "",
            Significance::Pct90 => "*",
            Significance::Pct95 => "**",
            Significance::Pct99 => "***",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_statistic: f64,
    pub significance: Significance,
}

/// Coefficient table plus model-level fit statistics. Cut-off rows come
/// first, mirroring the conventional layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub rows: Vec<ReportRow>,
    pub lr_chi_square: f64,
    pub lr_df: usize,
    pub lr_p_value: f64,
    pub mcfadden_rho2: f64,
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    pub n_obs: usize,
    pub converged: bool,
    pub iterations: usize,
}

/// Exact log-likelihood of the intercept-only model: the sum of
/// n_j ln(n_j / N) over classes.
pub fn null_log_likelihood(y: &[u8], n_classes: usize) -> Result<f64> {
    if n_classes < 2 {
        return Err(Error::TooFewOutcomeClasses);
    }
    if y.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut counts = vec![0u64; n_classes];
    for &c in y {
        if c as usize >= n_classes {
            return Err(Error::InvalidArgument(format!("outcome {c} out of range")));
        }
        counts[c as usize] += 1;
    }
    null_log_likelihood_from_counts(&counts)
}

/// Same as [`null_log_likelihood`] but from pre-tabulated class counts.
pub fn null_log_likelihood_from_counts(counts: &[u64]) -> Result<f64> {
    if counts.len() < 2 {
        return Err(Error::TooFewOutcomeClasses);
    }
    if let Some(idx) = counts.iter().position(|&c| c == 0) {
        return Err(Error::MissingOutcomeClass(format!("class {idx}")));
    }
    let n: u64 = counts.iter().sum();
    Ok(counts.iter().map(|&c| c as f64 * (c as f64 / n as f64).ln()).sum())
}

/// Likelihood-ratio test of the fitted model against the null model.
pub fn lr_test(fit_ll: f64, null_ll: f64, df: usize) -> Result<(f64, usize, f64)> {
    if fit_ll < null_ll {
        return Err(Error::FitBelowNull { fit_ll, null_ll });
    }
    let chi_square = 2.0 * (fit_ll - null_ll);
    let p_value = if df == 0 { 1.0 } else { chi_square_sf(chi_square, df) };
    Ok((chi_square, df, p_value))
}

/// McFadden's goodness-of-fit ratio, 1 - fit_ll / null_ll.
pub fn mcfadden_rho2(fit_ll: f64, null_ll: f64) -> Result<f64> {
    if null_ll >= 0.0 || null_ll.is_nan() {
        return Err(Error::InvalidArgument("null log-likelihood must be negative".into()));
    }
    if fit_ll < null_ll {
        return Err(Error::FitBelowNull { fit_ll, null_ll });
    }
    Ok(1.0 - fit_ll / null_ll)
}

/// Builds the coefficient report for a fit. Needs the design column labels
/// for the slope rows; cut-offs are labeled `Cut-off Point j`.
pub fn report(fit: &OrderedLogitFit, labels: &[ColumnLabel]) -> Result<FitReport> {
    let k = fit.params.n_slopes();
    if labels.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: labels.len() });
    }
    let covariance = fit.covariance.as_ref().ok_or(Error::CovarianceUnavailable)?;

    let row = |label: String, estimate: f64, var: f64| -> Result<ReportRow> {
        if var < 0.0 {
            return Err(Error::NegativeVariance(label));
        }
        let std_error = var.sqrt();
        let t_statistic = estimate / std_error;
        Ok(ReportRow {
            label,
            estimate,
            std_error,
            t_statistic,
            significance: Significance::from_t(t_statistic),
        })
    };

    let mut rows = Vec::with_capacity(fit.params.n_params());
    for (m, &c) in fit.params.cutoffs().iter().enumerate() {
        let idx = k + m;
        rows.push(row(format!("Cut-off Point {}", m + 1), c, covariance[idx][idx])?);
    }
    for (i, label) in labels.iter().enumerate() {
        rows.push(row(label.to_string(), fit.params.beta()[i], covariance[i][i])?);
    }

    let (lr_chi_square, lr_df, lr_p_value) =
        lr_test(fit.log_likelihood, fit.null_log_likelihood, k)?;
    let rho2 = mcfadden_rho2(fit.log_likelihood, fit.null_log_likelihood)?;

    Ok(FitReport {
        rows,
        lr_chi_square,
        lr_df,
        lr_p_value,
        mcfadden_rho2: rho2,
        log_likelihood: fit.log_likelihood,
        null_log_likelihood: fit.null_log_likelihood,
        n_obs: fit.n_obs,
        converged: fit.converged,
        iterations: fit.iterations,
    })
}
