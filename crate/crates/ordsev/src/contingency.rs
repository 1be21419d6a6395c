//! Pearson chi-square test of independence with expected counts and cell
//! residuals.
//!
//! Residuals are reported as (observed - expected) / sqrt(expected), so a
//! positive residual marks an over-represented cell. Cells with expected
//! count below 5 are flagged rather than rejected.

use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::special::chi_square_sf;

/// Observed counts for two categorical axes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservedTable {
    pub row_variable: String,
    pub col_variable: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ObservedTable {
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let rows = counts.len();
        let cols = counts.first().map_or(0, |r| r.len());
        if rows == 0 || cols == 0 || counts.iter().any(|r| r.len() != cols) {
            return Err(Error::DegenerateTable { rows, cols });
        }
        Ok(Self {
            row_variable: "rows".into(),
            col_variable: "cols".into(),
            row_labels: (1..=rows).map(|i| format!("r{i}")).collect(),
            col_labels: (1..=cols).map(|i| format!("c{i}")).collect(),
            counts,
        })
    }
}

/// Full test output: observed and expected counts, residuals, the statistic
/// with its degrees of freedom and p-value, and each cell's share of the
/// grand total in percent.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyResult {
    pub row_variable: String,
    pub col_variable: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub observed: Vec<Vec<u64>>,
    pub expected: Vec<Vec<f64>>,
    pub residuals: Vec<Vec<f64>>,
    pub cell_frequency_pct: Vec<Vec<f64>>,
    pub chi_square: f64,
    pub df: usize,
    pub p_value: f64,
    /// Cells with expected count below 5 (classical validity caveat).
    pub low_expected_cells: Vec<(usize, usize)>,
}

/// Cross-tabulates two variables of a dataset. The outcome may serve as
/// either axis under its schema name.
pub fn observed_table(dataset: &Dataset, var_a: &str, var_b: &str) -> Result<ObservedTable> {
    let schema = dataset.schema();
    let axis = |name: &str| -> Result<(Option<usize>, Vec<String>)> {
        if name == schema.outcome_name() {
            Ok((None, schema.class_labels().to_vec()))
        } else {
            let (idx, spec) =
                schema.variable(name).ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
            Ok((Some(idx), spec.categories().to_vec()))
        }
    };
    let (a_idx, a_labels) = axis(var_a)?;
    let (b_idx, b_labels) = axis(var_b)?;
    let mut counts = vec![vec![0u64; b_labels.len()]; a_labels.len()];
    for i in 0..dataset.n_records() {
        let value = |idx: Option<usize>| match idx {
            None => dataset.severity(i) as usize,
            Some(v) => dataset.category(i, v) as usize,
        };
        counts[value(a_idx)][value(b_idx)] += 1;
    }
    Ok(ObservedTable {
        row_variable: var_a.to_string(),
        col_variable: var_b.to_string(),
        row_labels: a_labels,
        col_labels: b_labels,
        counts,
    })
}

fn margins(observed: &[Vec<u64>]) -> (Vec<u64>, Vec<u64>, u64) {
    let cols = observed[0].len();
    let row_totals: Vec<u64> = observed.iter().map(|r| r.iter().sum()).collect();
    let col_totals: Vec<u64> =
        (0..cols).map(|c| observed.iter().map(|r| r[c]).sum()).collect();
    let grand: u64 = row_totals.iter().sum();
    (row_totals, col_totals, grand)
}

/// Expected counts under independence: row total x column total / grand
/// total.
pub fn expected_counts(observed: &[Vec<u64>]) -> Result<Vec<Vec<f64>>> {
    if observed.is_empty() || observed[0].is_empty() {
        return Err(Error::DegenerateTable { rows: observed.len(), cols: 0 });
    }
    let (row_totals, col_totals, grand) = margins(observed);
    if grand == 0 {
        return Err(Error::ZeroGrandTotal);
    }
    let grand = grand as f64;
    Ok(row_totals
        .iter()
        .map(|&rt| col_totals.iter().map(|&ct| rt as f64 * ct as f64 / grand).collect())
        .collect())
}

/// Pearson residual per cell, (O - E) / sqrt(E). Every expected count must be
/// positive.
pub fn pearson_residuals(observed: &[Vec<u64>]) -> Result<Vec<Vec<f64>>> {
    let expected = expected_counts(observed)?;
    residuals_from_expected(observed, &expected)
}

fn residuals_from_expected(observed: &[Vec<u64>], expected: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(observed.len());
    for (r, (orow, erow)) in observed.iter().zip(expected).enumerate() {
        let mut row = Vec::with_capacity(orow.len());
        for (c, (&o, &e)) in orow.iter().zip(erow).enumerate() {
            if e <= 0.0 {
                return Err(Error::ZeroExpectedCell { row: r, col: c });
            }
            row.push((o as f64 - e) / e.sqrt());
        }
        out.push(row);
    }
    Ok(out)
}

/// Runs the full test on an observed table.
pub fn chi_square_test(table: &ObservedTable) -> Result<ContingencyResult> {
    let observed = &table.counts;
    let rows = observed.len();
    let cols = observed.first().map_or(0, |r| r.len());
    if rows < 2 || cols < 2 {
        return Err(Error::DegenerateTable { rows, cols });
    }
    let expected = expected_counts(observed)?;
    let residuals = residuals_from_expected(observed, &expected)?;
    let chi_square: f64 = residuals.iter().flatten().map(|r| r * r).sum();
    let df = (rows - 1) * (cols - 1);
    let p_value = chi_square_sf(chi_square, df);
    let grand: u64 = observed.iter().flatten().sum();
    let cell_frequency_pct = observed
        .iter()
        .map(|r| r.iter().map(|&o| 100.0 * o as f64 / grand as f64).collect())
        .collect();
    let low_expected_cells = expected
        .iter()
        .enumerate()
        .flat_map(|(r, row)| {
            row.iter().enumerate().filter(|(_, &e)| e < 5.0).map(move |(c, _)| (r, c))
        })
        .collect();
    Ok(ContingencyResult {
        row_variable: table.row_variable.clone(),
        col_variable: table.col_variable.clone(),
        row_labels: table.row_labels.clone(),
        col_labels: table.col_labels.clone(),
        observed: observed.clone(),
        expected,
        residuals,
        cell_frequency_pct,
        chi_square,
        df,
        p_value,
        low_expected_cells,
    })
}
