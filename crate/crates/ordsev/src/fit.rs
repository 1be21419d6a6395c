//! Maximum-likelihood estimation of the ordered logit model.
//!
//! The optimizer works in an unconstrained internal parameterization: the
//! first cut-off is free and each later one adds the exponential of a free
//! parameter, which enforces strict ordering without constraints. Newton
//! steps on the exact Hessian are combined with a backtracking line search;
//! when the Hessian is not negative definite the step falls back to scaled
//! gradient ascent. Results are reported in the natural parameterization,
//! with the covariance mapped back by the delta method.
//!
//! Starting values are the exact optimum of the intercept-only model: zero
//! slopes and cut-offs at the logits of the cumulative class shares.

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{cholesky, cholesky_inverse, cholesky_solve};
use crate::logistic::logistic_quantile;
use crate::ologit::{eval_all, eval_ll, packed_index, OrderedLogitParams};

/// Estimation controls. Defaults: gradient tolerance 1e-6 (max-norm),
/// relative log-likelihood tolerance 1e-10, at most 200 iterations.
#[derive(Debug, Clone)]
pub struct FitOptions {
    pub tol_grad: f64,
    pub tol_ll: f64,
    pub max_iter: usize,
    /// Take scaled gradient-ascent steps when the Hessian is not negative
    /// definite instead of failing.
    pub hessian_fallback: bool,
    pub execution: Execution,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tol_grad: 1e-6,
            tol_ll: 1e-10,
            max_iter: 200,
            hessian_fallback: true,
            execution: Execution::default(),
        }
    }
}

/// Non-fatal conditions detected during estimation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FitWarning {
    /// A dummy column perfectly predicts a boundary class; its coefficient
    /// is unbounded in the limit.
    Separation { column: String, class: String },
}

impl std::fmt::Display for FitWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FitWarning::Separation { column, class } => write!(
                f,
                "column `{column}` perfectly predicts class `{class}`; its estimate is unbounded"
            ),
        }
    }
}

/// Estimation result in the natural parameterization.
#[derive(Debug, Clone)]
pub struct OrderedLogitFit {
    pub params: OrderedLogitParams,
    /// (K + J - 1) square observed-information covariance, slopes first then
    /// cut-offs. `None` when the information matrix could not be inverted on
    /// a non-converged fit.
    pub covariance: Option<Vec<Vec<f64>>>,
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Max-norm of the natural-parameterization gradient at the reported
    /// parameters.
    pub gradient_norm: f64,
    pub n_obs: usize,
    pub warnings: Vec<FitWarning>,
}

fn cutoffs_from_internal(theta_c: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(theta_c.len());
    let mut c = theta_c[0];
    out.push(c);
    for t in &theta_c[1..] {
        c += t.exp();
        out.push(c);
    }
    out
}

fn internal_from_cutoffs(cutoffs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(cutoffs.len());
    out.push(cutoffs[0]);
    for w in cutoffs.windows(2) {
        out.push((w[1] - w[0]).ln());
    }
    out
}

fn params_from_theta(theta: &[f64], k: usize) -> OrderedLogitParams {
    let beta = theta[..k].to_vec();
    let cutoffs = cutoffs_from_internal(&theta[k..]);
    OrderedLogitParams::new(beta, cutoffs).expect("internal parameterization preserves ordering")
}

/// Jacobian of the cut-offs with respect to the internal cut-off parameters:
/// row m, column 0 is 1; column j >= 1 is exp(theta_j) when j <= m.
fn cutoff_jacobian(theta_c: &[f64]) -> Vec<Vec<f64>> {
    let m = theta_c.len();
    let mut jac = vec![vec![0.0; m]; m];
    for (row, jac_row) in jac.iter_mut().enumerate() {
        jac_row[0] = 1.0;
        for (j, t) in theta_c.iter().enumerate().skip(1).take(row) {
            jac_row[j] = t.exp();
        }
    }
    jac
}

/// Pulls the natural gradient and packed Hessian back to internal
/// coordinates. The chain-rule curvature correction vanishes at a stationary
/// point but matters along the path.
fn internalize(
    theta_c: &[f64],
    grad_nat: &[f64],
    hess_nat: &[f64],
    k: usize,
) -> (Vec<f64>, Vec<f64>) {
    let m = theta_c.len();
    let p = k + m;
    let jac = cutoff_jacobian(theta_c);

    let mut grad = grad_nat.to_vec();
    for j in 0..m {
        grad[k + j] = (0..m).map(|row| jac[row][j] * grad_nat[k + row]).sum();
    }

    let nat = |i: usize, j: usize| {
        if i >= j {
            hess_nat[packed_index(i, j)]
        } else {
            hess_nat[packed_index(j, i)]
        }
    };
    let mut hess = vec![0.0; p * (p + 1) / 2];
    // slope block unchanged
    for i in 0..k {
        for j in 0..=i {
            hess[packed_index(i, j)] = nat(i, j);
        }
    }
    // slope x cut-off block: H_bc J
    for i in 0..m {
        for j in 0..k {
            let v: f64 = (0..m).map(|row| nat(k + row, j) * jac[row][i]).sum();
            hess[packed_index(k + i, j)] = v;
        }
    }
    // cut-off block: J^T H_cc J plus the gradient term on the diagonal
    for i in 0..m {
        for j in 0..=i {
            let mut v = 0.0;
            for r in 0..m {
                if jac[r][i] == 0.0 {
                    continue;
                }
                for s in 0..m {
                    v += jac[r][i] * nat(k + r, k + s) * jac[s][j];
                }
            }
            if i == j && i >= 1 {
                let tail: f64 = (i..m).map(|row| grad_nat[k + row]).sum();
                v += theta_c[i].exp() * tail;
            }
            hess[packed_index(k + i, k + j)] = v;
        }
    }
    (grad, hess)
}

fn unpack_negated(packed: &[f64], p: usize) -> Vec<f64> {
    let mut dense = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let v = -packed[packed_index(i, j)];
            dense[i * p + j] = v;
            dense[j * p + i] = v;
        }
    }
    dense
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

fn scan_separation(design: &DesignMatrix) -> Vec<FitWarning> {
    let k = design.n_cols();
    let top = design.n_classes() - 1;
    let mut any = vec![false; k];
    let mut non_lowest = vec![false; k];
    let mut non_highest = vec![false; k];
    for i in 0..design.n_rows() {
        let class = design.y()[i] as usize;
        for &c in design.row(i) {
            let c = c as usize;
            any[c] = true;
            if class != 0 {
                non_lowest[c] = true;
            }
            if class != top {
                non_highest[c] = true;
            }
        }
    }
    let mut warnings = Vec::new();
    for c in 0..k {
        if !any[c] {
            continue;
        }
        if !non_lowest[c] {
            warnings.push(FitWarning::Separation {
                column: design.columns()[c].to_string(),
                class: design.class_labels()[0].clone(),
            });
        }
        if !non_highest[c] {
            warnings.push(FitWarning::Separation {
                column: design.columns()[c].to_string(),
                class: design.class_labels()[top].clone(),
            });
        }
    }
    warnings
}

/// Fits the model by maximum likelihood.
///
/// Requires at least as many observations as parameters and every outcome
/// class present. Perfect prediction of a boundary class by a dummy is
/// reported as a warning, not an error; the fit is still returned when the
/// iteration converges.
pub fn fit(design: &DesignMatrix, options: &FitOptions) -> Result<OrderedLogitFit> {
    let n = design.n_rows();
    let k = design.n_cols();
    let j = design.n_classes();
    let p = k + j - 1;
    if n < p {
        return Err(Error::TooFewObservations { got: n, params: p });
    }
    let counts = design.class_counts();
    if let Some(missing) = counts.iter().position(|&c| c == 0) {
        return Err(Error::MissingOutcomeClass(design.class_labels()[missing].clone()));
    }

    let warnings = scan_separation(design);
    let null_ll = crate::inference::null_log_likelihood(design.y(), j)?;

    // start at the intercept-only optimum
    let mut cum = 0u64;
    let mut start_cutoffs = Vec::with_capacity(j - 1);
    for &c in &counts[..j - 1] {
        cum += c;
        start_cutoffs.push(logistic_quantile(cum as f64 / n as f64));
    }
    let mut theta = vec![0.0; k];
    theta.extend(internal_from_cutoffs(&start_cutoffs));

    let exec = options.execution;
    let mut params = params_from_theta(&theta, k);
    let (mut ll, mut grad_nat, mut hess_nat) = eval_all(design, &params, exec);
    let mut delta_ll: Option<f64> = None;
    let mut iterations = 0usize;
    let mut converged = false;

    loop {
        let gnorm = max_abs(&grad_nat);
        if gnorm < options.tol_grad
            && delta_ll.is_none_or(|d| d.abs() <= options.tol_ll * (1.0 + ll.abs()))
        {
            converged = true;
            break;
        }
        if iterations >= options.max_iter {
            break;
        }

        let (grad_int, hess_int) = internalize(&theta[k..], &grad_nat, &hess_nat, k);
        let neg_hess = unpack_negated(&hess_int, p);
        let newton = cholesky(&neg_hess, p).map(|l| cholesky_solve(&l, p, &grad_int));
        let direction = match newton {
            Some(d) => d,
            None if options.hessian_fallback => {
                let scale = 1.0 / (1.0 + max_abs(&grad_int));
                grad_int.iter().map(|g| g * scale).collect()
            }
            None => return Err(Error::SingularHessian),
        };
        let slope: f64 = grad_int.iter().zip(&direction).map(|(g, d)| g * d).sum();
        let (direction, slope) = if slope > 0.0 {
            (direction, slope)
        } else {
            // numerically non-ascending Newton direction; fall back
            let scale = 1.0 / (1.0 + max_abs(&grad_int));
            let d: Vec<f64> = grad_int.iter().map(|g| g * scale).collect();
            let s: f64 = grad_int.iter().zip(&d).map(|(g, d)| g * d).sum();
            (d, s)
        };

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> =
                theta.iter().zip(&direction).map(|(t, d)| t + step * d).collect();
            let trial_params = params_from_theta(&trial, k);
            let trial_ll = eval_ll(design, &trial_params, exec);
            if trial_ll.is_finite() && trial_ll >= ll + 1e-4 * step * slope {
                accepted = Some((trial, trial_params, trial_ll));
                break;
            }
            step *= 0.5;
        }
        let Some((new_theta, new_params, new_ll)) = accepted else {
            break; // no ascent possible within the step budget
        };
        iterations += 1;
        delta_ll = Some(new_ll - ll);
        theta = new_theta;
        params = new_params;
        (ll, grad_nat, hess_nat) = eval_all(design, &params, exec);
    }

    let gradient_norm = max_abs(&grad_nat);

    // observed-information covariance, mapped through the delta method
    let (_, hess_int) = internalize(&theta[k..], &grad_nat, &hess_nat, k);
    let neg_hess = unpack_negated(&hess_int, p);
    let covariance = match cholesky(&neg_hess, p) {
        Some(l) => {
            let inv = cholesky_inverse(&l, p);
            Some(delta_transform(&inv, &theta[k..], k))
        }
        None if converged => return Err(Error::SingularHessian),
        None => None,
    };

    Ok(OrderedLogitFit {
        params,
        covariance,
        log_likelihood: ll,
        null_log_likelihood: null_ll,
        iterations,
        converged,
        gradient_norm,
        n_obs: n,
        warnings,
    })
}

/// Sigma_nat = A Sigma_int A^T with A block-diagonal: identity on slopes and
/// the cut-off Jacobian on the rest.
fn delta_transform(sigma_int: &[f64], theta_c: &[f64], k: usize) -> Vec<Vec<f64>> {
    let m = theta_c.len();
    let p = k + m;
    let jac = cutoff_jacobian(theta_c);
    let a = |i: usize, j: usize| -> f64 {
        if i < k {
            if i == j {
                1.0
            } else {
                0.0
            }
        } else if j >= k {
            jac[i - k][j - k]
        } else {
            0.0
        }
    };
    // tmp = Sigma_int A^T
    let mut tmp = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            let mut v = 0.0;
            for l in 0..p {
                let alj = a(j, l);
                if alj != 0.0 {
                    v += sigma_int[i * p + l] * alj;
                }
            }
            tmp[i * p + j] = v;
        }
    }
    let mut out = vec![vec![0.0; p]; p];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let mut v = 0.0;
            for l in 0..p {
                let ail = a(i, l);
                if ail != 0.0 {
                    v += ail * tmp[l * p + j];
                }
            }
            *cell = v;
        }
    }
    out
}
