//! Average discrete-change marginal effects of each dummy on each class
//! probability.
//!
//! The effect of a column is the sample average of the probability change
//! when the observation is moved from its variable's reference group to the
//! column's category. Sibling dummies of the same variable are zeroed in
//! both counterfactuals so each one is a valid category assignment.

use crate::design::{ColumnLabel, DesignMatrix};
use crate::error::{Error, Result};
use crate::exec::{map_blocks, Execution};
use crate::fit::OrderedLogitFit;
use crate::ologit::{probs_from_eta, OrderedLogitParams};

/// One row per design column with the per-class average probability changes.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalEffectsTable {
    pub class_labels: Vec<String>,
    pub rows: Vec<MarginalEffectsRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalEffectsRow {
    pub variable: String,
    pub category: String,
    /// Change in each class probability; sums to zero up to round-off.
    pub effects: Vec<f64>,
}

fn column_effect(
    params: &OrderedLogitParams,
    design: &DesignMatrix,
    column: usize,
    exec: Execution,
) -> Vec<f64> {
    let n = design.n_rows();
    let n_classes = design.n_classes();
    let beta = params.beta();
    let cutoffs = params.cutoffs();
    let group = design.column_group(column);
    let beta_col = beta[column];

    let blocks = map_blocks(n, exec, |range| {
        let mut sums = vec![0.0; n_classes];
        for i in range {
            // latent index with the whole variable group at the reference
            let eta_off: f64 = design
                .row(i)
                .iter()
                .filter(|&&c| design.column_group(c as usize) != group)
                .map(|&c| beta[c as usize])
                .sum();
            let on = probs_from_eta(eta_off + beta_col, cutoffs);
            let off = probs_from_eta(eta_off, cutoffs);
            for (s, (po, pf)) in sums.iter_mut().zip(on.iter().zip(&off)) {
                *s += po - pf;
            }
        }
        sums
    });

    let mut total = vec![0.0; n_classes];
    for block in blocks {
        for (t, b) in total.iter_mut().zip(&block) {
            *t += b;
        }
    }
    for t in &mut total {
        *t /= n as f64;
    }
    total
}

/// Average discrete-change effect of one column on every class probability.
pub fn average_marginal_effect(
    fit: &OrderedLogitFit,
    design: &DesignMatrix,
    column: &ColumnLabel,
) -> Result<Vec<f64>> {
    average_marginal_effect_for_params(&fit.params, design, column)
}

/// [`average_marginal_effect`] from bare parameters.
pub fn average_marginal_effect_for_params(
    params: &OrderedLogitParams,
    design: &DesignMatrix,
    column: &ColumnLabel,
) -> Result<Vec<f64>> {
    validate(params, design)?;
    let idx = design
        .column_index(column)
        .ok_or_else(|| Error::UnknownColumn(column.to_string()))?;
    Ok(column_effect(params, design, idx, Execution::default()))
}

/// Effects for every design column.
pub fn margins_table(fit: &OrderedLogitFit, design: &DesignMatrix) -> Result<MarginalEffectsTable> {
    margins_table_with(&fit.params, design, Execution::default())
}

/// [`margins_table`] with explicit parameters and execution mode.
pub fn margins_table_with(
    params: &OrderedLogitParams,
    design: &DesignMatrix,
    exec: Execution,
) -> Result<MarginalEffectsTable> {
    validate(params, design)?;
    let rows = design
        .columns()
        .iter()
        .enumerate()
        .map(|(idx, label)| MarginalEffectsRow {
            variable: label.variable.clone(),
            category: label.category.clone(),
            effects: column_effect(params, design, idx, exec),
        })
        .collect();
    Ok(MarginalEffectsTable { class_labels: design.class_labels().to_vec(), rows })
}

fn validate(params: &OrderedLogitParams, design: &DesignMatrix) -> Result<()> {
    if params.n_slopes() != design.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: design.n_cols(),
            got: params.n_slopes(),
        });
    }
    if params.n_classes() != design.n_classes() {
        return Err(Error::DimensionMismatch {
            expected: design.n_classes() - 1,
            got: params.cutoffs().len(),
        });
    }
    Ok(())
}
