//! Ordered logit model: a latent index x . beta plus a standard logistic
//! error, classified into ordinal classes by strictly increasing cut-off
//! points. Class j has probability F(c_j - x.beta) - F(c_{j-1} - x.beta)
//! with c_0 = -inf and c_J = +inf.
//!
//! Likelihood, gradient, and Hessian accumulate per fixed block of
//! observations and fold block partials in order, so results are
//! bit-identical across thread counts (see [`crate::exec`]).

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::exec::{map_blocks, Execution};
use crate::logistic::{interval_prob, interval_stats};

/// Slope coefficients and cut-off points, in utility units.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedLogitParams {
    beta: Vec<f64>,
    cutoffs: Vec<f64>,
}

impl OrderedLogitParams {
    /// Validates that the cut-offs are finite and strictly increasing.
    pub fn new(beta: Vec<f64>, cutoffs: Vec<f64>) -> Result<Self> {
        if cutoffs.is_empty()
            || cutoffs.iter().any(|c| !c.is_finite())
            || cutoffs.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::NonIncreasingCutoffs);
        }
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        Ok(Self { beta, cutoffs })
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn cutoffs(&self) -> &[f64] {
        &self.cutoffs
    }

    pub fn n_slopes(&self) -> usize {
        self.beta.len()
    }

    pub fn n_classes(&self) -> usize {
        self.cutoffs.len() + 1
    }

    /// Total parameter count, K slopes plus J - 1 cut-offs.
    pub fn n_params(&self) -> usize {
        self.beta.len() + self.cutoffs.len()
    }
}

/// Lower and upper interval bounds on the latent scale for one observation,
/// with infinite sentinels at the boundary classes.
#[inline]
fn class_bounds(cutoffs: &[f64], class: usize, eta: f64) -> (f64, f64) {
    let lo = if class == 0 { f64::NEG_INFINITY } else { cutoffs[class - 1] - eta };
    let hi = if class == cutoffs.len() { f64::INFINITY } else { cutoffs[class] - eta };
    (lo, hi)
}

/// Class probabilities for one latent index.
pub(crate) fn probs_from_eta(eta: f64, cutoffs: &[f64]) -> Vec<f64> {
    let n_classes = cutoffs.len() + 1;
    (0..n_classes)
        .map(|k| {
            let (lo, hi) = class_bounds(cutoffs, k, eta);
            interval_prob(lo, hi)
        })
        .collect()
}

/// Probability of each outcome class for the profile `x`.
///
/// Components are nonnegative even for extreme latent indices and sum to one
/// up to round-off.
pub fn class_probabilities(x: &[f64], params: &OrderedLogitParams) -> Result<Vec<f64>> {
    if x.len() != params.beta.len() {
        return Err(Error::DimensionMismatch { expected: params.beta.len(), got: x.len() });
    }
    let eta: f64 = x.iter().zip(&params.beta).map(|(xi, bi)| xi * bi).sum();
    Ok(probs_from_eta(eta, &params.cutoffs))
}

fn validate_dims(design: &DesignMatrix, params: &OrderedLogitParams) -> Result<()> {
    if params.beta.len() != design.n_cols() {
        return Err(Error::DimensionMismatch { expected: design.n_cols(), got: params.beta.len() });
    }
    if params.n_classes() != design.n_classes() {
        return Err(Error::DimensionMismatch {
            expected: design.n_classes() - 1,
            got: params.cutoffs.len(),
        });
    }
    Ok(())
}

/// Sample log-likelihood. Log-domain evaluation keeps per-observation terms
/// finite far into the tails; -inf appears only for genuinely
/// zero-probability configurations.
pub fn log_likelihood(design: &DesignMatrix, params: &OrderedLogitParams) -> Result<f64> {
    validate_dims(design, params)?;
    Ok(eval_ll(design, params, Execution::default()))
}

/// [`log_likelihood`] with an explicit execution mode.
pub fn log_likelihood_with(
    design: &DesignMatrix,
    params: &OrderedLogitParams,
    exec: Execution,
) -> Result<f64> {
    validate_dims(design, params)?;
    Ok(eval_ll(design, params, exec))
}

pub(crate) fn eval_ll(design: &DesignMatrix, params: &OrderedLogitParams, exec: Execution) -> f64 {
    let cutoffs = &params.cutoffs;
    let beta = &params.beta;
    let blocks = map_blocks(design.n_rows(), exec, |range| {
        let mut ll = 0.0;
        for i in range {
            let eta = design.linear_index(i, beta);
            let (lo, hi) = class_bounds(cutoffs, design.y()[i] as usize, eta);
            ll += crate::logistic::log_interval_prob(lo, hi);
        }
        ll
    });
    blocks.into_iter().sum()
}

/// Gradient of the log-likelihood in the natural parameterization, ordered as
/// K slope entries followed by J - 1 cut-off entries.
pub fn gradient(design: &DesignMatrix, params: &OrderedLogitParams) -> Result<Vec<f64>> {
    validate_dims(design, params)?;
    let (_, grad, _) = eval_all(design, params, Execution::default());
    Ok(grad)
}

/// Packed lower-triangle index for a symmetric matrix.
#[inline]
pub(crate) fn packed_index(i: usize, j: usize) -> usize {
    debug_assert!(i >= j);
    i * (i + 1) / 2 + j
}

/// One pass over the data producing the log-likelihood, the gradient, and
/// the packed lower triangle of the Hessian, all in the natural
/// parameterization.
pub(crate) fn eval_all(
    design: &DesignMatrix,
    params: &OrderedLogitParams,
    exec: Execution,
) -> (f64, Vec<f64>, Vec<f64>) {
    let k = params.beta.len();
    let n_cut = params.cutoffs.len();
    let p = k + n_cut;
    let packed_len = p * (p + 1) / 2;
    let cutoffs = &params.cutoffs;
    let beta = &params.beta;

    let blocks = map_blocks(design.n_rows(), exec, |range| {
        let mut ll = 0.0;
        let mut grad = vec![0.0; p];
        let mut hess = vec![0.0; packed_len];
        for i in range {
            let active = design.row(i);
            let class = design.y()[i] as usize;
            let eta: f64 = active.iter().map(|&c| beta[c as usize]).sum();
            let (lo, hi) = class_bounds(cutoffs, class, eta);
            let s = interval_stats(lo, hi);
            ll += s.log_prob;

            let g_eta = s.ratio_lo - s.ratio_hi;
            let h_eta_eta =
                (s.ratio_hi * s.shape_hi - s.ratio_lo * s.shape_lo) - g_eta * g_eta;

            for &c in active {
                grad[c as usize] += g_eta;
            }
            for (ai, &ca) in active.iter().enumerate() {
                let ca = ca as usize;
                for &cb in &active[..=ai] {
                    hess[packed_index(ca, cb as usize)] += h_eta_eta;
                }
            }

            if class < n_cut {
                // upper cut-off of this class
                let row = k + class;
                grad[row] += s.ratio_hi;
                hess[packed_index(row, row)] += s.ratio_hi * s.shape_hi - s.ratio_hi * s.ratio_hi;
                let h_eta_hi = -s.ratio_hi * s.shape_hi - s.ratio_hi * g_eta;
                for &c in active {
                    hess[packed_index(row, c as usize)] += h_eta_hi;
                }
            }
            if class > 0 {
                // lower cut-off of this class
                let row = k + class - 1;
                grad[row] -= s.ratio_lo;
                hess[packed_index(row, row)] += -s.ratio_lo * s.shape_lo - s.ratio_lo * s.ratio_lo;
                let h_eta_lo = s.ratio_lo * s.shape_lo + s.ratio_lo * g_eta;
                for &c in active {
                    hess[packed_index(row, c as usize)] += h_eta_lo;
                }
            }
            if class < n_cut && class > 0 {
                hess[packed_index(k + class, k + class - 1)] += s.ratio_lo * s.ratio_hi;
            }
        }
        (ll, grad, hess)
    });

    let mut ll = 0.0;
    let mut grad = vec![0.0; p];
    let mut hess = vec![0.0; packed_len];
    for (bll, bgrad, bhess) in blocks {
        ll += bll;
        for (g, b) in grad.iter_mut().zip(&bgrad) {
            *g += b;
        }
        for (h, b) in hess.iter_mut().zip(&bhess) {
            *h += b;
        }
    }
    (ll, grad, hess)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::ColumnLabel;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn table4_params() -> OrderedLogitParams {
        OrderedLogitParams::new(
            vec![
                2.553, 2.007, 0.391, 0.087, -0.347, 0.091, 0.391, 0.381, 0.179, 1.078, 0.490,
                0.743, 0.154, -0.627,
            ],
            vec![-0.357, 6.348],
        )
        .unwrap()
    }

    fn small_design(rows: Vec<(Vec<u16>, u8)>, n_cols: usize, n_classes: usize) -> DesignMatrix {
        let columns = (0..n_cols)
            .map(|i| ColumnLabel { variable: format!("v{i}"), category: "on".into() })
            .collect();
        let classes = (0..n_classes).map(|i| format!("c{i}")).collect();
        DesignMatrix::from_rows(columns, classes, rows).unwrap()
    }

    #[test]
    fn rejects_unordered_cutoffs() {
        assert!(OrderedLogitParams::new(vec![], vec![1.0, 1.0]).is_err());
        assert!(OrderedLogitParams::new(vec![], vec![2.0, 1.0]).is_err());
        assert!(OrderedLogitParams::new(vec![], vec![f64::NAN]).is_err());
        assert!(OrderedLogitParams::new(vec![], vec![-1.0, 0.5]).is_ok());
    }

    #[test]
    fn base_profile_probabilities_match_reference() {
        // Frozen from a 50-digit evaluation at the zero profile.
        let p = class_probabilities(&[0.0; 14], &table4_params()).unwrap();
        assert_relative_eq!(p[0], 0.411685974839127, max_relative = 1e-13);
        assert_relative_eq!(p[1], 0.586566839037, max_relative = 1e-11);
        assert_relative_eq!(p[2], 0.00174718612411, max_relative = 1e-11);
        let sum: f64 = p.iter().sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn pedestrian_dummy_shifts_mass_toward_severe_classes() {
        let params = table4_params();
        let mut x = vec![0.0; 14];
        let base = class_probabilities(&x, &params).unwrap();
        x[0] = 1.0; // +2.553 on the latent index
        let shifted = class_probabilities(&x, &params).unwrap();
        assert!(shifted[0] < base[0]);
        assert!(shifted[2] > base[2]);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = class_probabilities(&[0.0; 3], &table4_params()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 14, got: 3 }));
    }

    #[test]
    fn single_observation_log_likelihood_matches_reference() {
        // Base profile, middle class: ln of the frozen interval probability.
        let design = small_design(vec![(vec![], 1)], 14, 3);
        let ll = log_likelihood(&design, &table4_params()).unwrap();
        assert_relative_eq!(ll, -0.5334686548298139, max_relative = 1e-12);
    }

    #[test]
    fn empty_design_has_zero_log_likelihood() {
        let design = small_design(vec![], 2, 3);
        let params = OrderedLogitParams::new(vec![0.3, -0.2], vec![-1.0, 1.0]).unwrap();
        assert_eq!(log_likelihood(&design, &params).unwrap(), 0.0);
    }

    #[test]
    fn duplicating_rows_doubles_the_log_likelihood() {
        let rows = vec![(vec![0], 0u8), (vec![1], 1), (vec![], 2), (vec![0, 1], 1)];
        let doubled: Vec<_> = rows.iter().cloned().chain(rows.iter().cloned()).collect();
        let params = OrderedLogitParams::new(vec![0.8, -0.4], vec![-0.5, 1.5]).unwrap();
        let a = log_likelihood(&small_design(rows, 2, 3), &params).unwrap();
        let b = log_likelihood(&small_design(doubled, 2, 3), &params).unwrap();
        assert_relative_eq!(a * 2.0, b, max_relative = 1e-13);
    }

    /// Central-difference gradient of the log-likelihood in natural space.
    fn fd_gradient(design: &DesignMatrix, params: &OrderedLogitParams, h: f64) -> Vec<f64> {
        let k = params.n_slopes();
        let p = params.n_params();
        let mut out = Vec::with_capacity(p);
        for idx in 0..p {
            let wiggle = |delta: f64| {
                let mut beta = params.beta().to_vec();
                let mut cutoffs = params.cutoffs().to_vec();
                if idx < k {
                    beta[idx] += delta;
                } else {
                    cutoffs[idx - k] += delta;
                }
                let p = OrderedLogitParams::new(beta, cutoffs).unwrap();
                log_likelihood(design, &p).unwrap()
            };
            out.push((wiggle(h) - wiggle(-h)) / (2.0 * h));
        }
        out
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let rows = vec![
            (vec![0], 0u8),
            (vec![1], 1),
            (vec![0, 2], 2),
            (vec![], 1),
            (vec![2], 0),
            (vec![0, 1, 2], 1),
            (vec![1, 2], 2),
            (vec![], 0),
        ];
        let design = small_design(rows, 3, 3);
        let params = OrderedLogitParams::new(vec![0.9, -1.3, 0.4], vec![-0.8, 1.1]).unwrap();
        let analytic = gradient(&design, &params).unwrap();
        let fd = fd_gradient(&design, &params, 1e-5);
        for (a, f) in analytic.iter().zip(&fd) {
            assert_relative_eq!(a, f, max_relative = 1e-7, epsilon = 1e-8);
        }
    }

    #[test]
    fn hessian_matches_finite_difference_of_gradient() {
        let rows = vec![
            (vec![0], 0u8),
            (vec![1], 1),
            (vec![0, 1], 2),
            (vec![], 1),
            (vec![1], 0),
            (vec![0], 2),
        ];
        let design = small_design(rows, 2, 3);
        let params = OrderedLogitParams::new(vec![0.5, -0.7], vec![-0.6, 0.9]).unwrap();
        let (_, _, hess) = eval_all(&design, &params, Execution::Sequential);
        let h = 1e-6;
        let p = params.n_params();
        let k = params.n_slopes();
        for col in 0..p {
            let wiggle = |delta: f64| {
                let mut beta = params.beta().to_vec();
                let mut cutoffs = params.cutoffs().to_vec();
                if col < k {
                    beta[col] += delta;
                } else {
                    cutoffs[col - k] += delta;
                }
                gradient(&design, &OrderedLogitParams::new(beta, cutoffs).unwrap()).unwrap()
            };
            let up = wiggle(h);
            let down = wiggle(-h);
            for row in 0..p {
                let fd = (up[row] - down[row]) / (2.0 * h);
                let packed = if row >= col { packed_index(row, col) } else { packed_index(col, row) };
                assert_relative_eq!(hess[packed], fd, max_relative = 2e-5, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn balanced_two_class_gradient_vanishes_at_zero_cutoff() {
        let rows = vec![(vec![], 0u8), (vec![], 1), (vec![], 0), (vec![], 1)];
        let design = small_design(rows, 0, 2);
        let params = OrderedLogitParams::new(vec![], vec![0.0]).unwrap();
        let g = gradient(&design, &params).unwrap();
        assert_abs_diff_eq!(g[0], 0.0, epsilon = 1e-14);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_evaluation_is_bit_identical() {
        let rows: Vec<(Vec<u16>, u8)> = (0..20_000)
            .map(|i| {
                let mut active = Vec::new();
                if i % 3 == 0 {
                    active.push(0u16);
                }
                if i % 7 == 0 {
                    active.push(1u16);
                }
                (active, (i % 3) as u8)
            })
            .collect();
        let design = small_design(rows, 2, 3);
        let params = OrderedLogitParams::new(vec![0.31, -0.55], vec![-0.9, 1.4]).unwrap();
        let (ll_s, g_s, h_s) = eval_all(&design, &params, Execution::Sequential);
        let (ll_p, g_p, h_p) = eval_all(&design, &params, Execution::Parallel);
        assert_eq!(ll_s.to_bits(), ll_p.to_bits());
        assert!(g_s.iter().zip(&g_p).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert!(h_s.iter().zip(&h_p).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    proptest! {
        /// Probabilities are a distribution for any admissible parameters,
        /// including extreme latent indices.
        #[test]
        fn probabilities_form_a_distribution(
            eta in -500.0f64..500.0,
            c1 in -400.0f64..400.0,
            width in 1e-6f64..300.0,
        ) {
            let cutoffs = vec![c1, c1 + width];
            let p = probs_from_eta(eta, &cutoffs);
            for &v in &p {
                prop_assert!(v >= 0.0);
                prop_assert!(v <= 1.0);
            }
            let sum: f64 = p.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }

        /// Raising the latent index moves mass from the lowest class to the
        /// highest.
        #[test]
        fn monotone_in_the_latent_index(
            eta in -30.0f64..30.0,
            bump in 0.01f64..5.0,
            c1 in -5.0f64..5.0,
            width in 0.1f64..8.0,
        ) {
            let cutoffs = vec![c1, c1 + width];
            let lo = probs_from_eta(eta, &cutoffs);
            let hi = probs_from_eta(eta + bump, &cutoffs);
            prop_assert!(hi[0] <= lo[0] + 1e-15);
            prop_assert!(hi[2] + 1e-15 >= lo[2]);
        }

        /// Shifting every cut-off and the latent index by the same amount
        /// leaves the distribution unchanged.
        #[test]
        fn translation_consistency(
            eta in -10.0f64..10.0,
            delta in -20.0f64..20.0,
            c1 in -4.0f64..4.0,
            width in 0.1f64..6.0,
        ) {
            let cutoffs = vec![c1, c1 + width];
            let shifted: Vec<f64> = cutoffs.iter().map(|c| c + delta).collect();
            let a = probs_from_eta(eta, &cutoffs);
            let b = probs_from_eta(eta + delta, &shifted);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
