//! Table rendering for the CLI: CSV, JSON, and markdown views of the same
//! cell grid. Human formats carry 6 significant digits; archives keep full
//! precision.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::contingency::ContingencyResult;
use crate::error::{Error, Result};
use crate::inference::FitReport;
use crate::ingest::Crosstab;
use crate::margins::MarginalEffectsTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Md,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Md => "md",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "md" => Ok(OutputFormat::Md),
            other => Err(Error::InvalidArgument(format!("unknown format `{other}`"))),
        }
    }
}

/// A rendered table: a title, a header row, and string cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
            OutputFormat::Md => self.to_markdown(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("csv write");
        for row in &self.rows {
            w.write_record(row).expect("csv write");
        }
        String::from_utf8(w.into_inner().expect("csv flush")).expect("csv utf8")
    }

    pub fn to_json(&self) -> String {
        let value = serde_json::json!({
            "title": self.title,
            "headers": self.headers,
            "rows": self.rows,
        });
        serde_json::to_string_pretty(&value).expect("json serializes")
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        if !self.title.is_empty() {
            let _ = writeln!(out, "### {}\n", self.title);
        }
        let _ = writeln!(out, "| {} |", self.headers.join(" | "));
        let _ = writeln!(out, "|{}|", self.headers.iter().map(|_| " --- ").collect::<Vec<_>>().join("|"));
        for row in &self.rows {
            let _ = writeln!(out, "| {} |", row.join(" | "));
        }
        out
    }
}

/// Formats a number with 6 significant digits, plain notation in the
/// human-friendly magnitude range and scientific outside it.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        let decimals = (5 - mag).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.5e}")
    }
}

/// Fixed-decimal formatting for percentage columns.
pub fn fmt_pct(x: f64) -> String {
    format!("{x:.1}")
}

/// P-value display with the conventional floor.
pub fn fmt_p(p: f64) -> String {
    if p < 1e-4 {
        "< 0.0001".to_string()
    } else {
        fmt_sig(p)
    }
}

/// Cross-tabulation in the descriptive-statistics layout: one row per
/// category with count and row percent per class, a total column, and a
/// leading overall row.
pub fn crosstab_table(tab: &Crosstab) -> Table {
    let mut headers = vec![tab.variable.clone()];
    for label in &tab.class_labels {
        headers.push(format!("{label} Count"));
        headers.push(format!("{label} %"));
    }
    headers.push("Total".to_string());
    headers.push("Total %".to_string());

    let mut rows = Vec::with_capacity(tab.categories.len() + 1);
    let mut total_row = vec!["Total".to_string()];
    for &class_total in &tab.class_totals {
        total_row.push(class_total.to_string());
        let pct = if tab.total == 0 { 0.0 } else { 100.0 * class_total as f64 / tab.total as f64 };
        total_row.push(fmt_pct(pct));
    }
    total_row.push(tab.total.to_string());
    total_row.push(fmt_pct(if tab.total == 0 { 0.0 } else { 100.0 }));
    rows.push(total_row);

    let pct = tab.row_percentages();
    for (r, category) in tab.categories.iter().enumerate() {
        let mut row = vec![category.clone()];
        for (count, p) in tab.counts[r].iter().zip(&pct[r]) {
            row.push(count.to_string());
            row.push(fmt_pct(*p));
        }
        row.push(tab.row_totals[r].to_string());
        row.push(fmt_pct(tab.category_share_pct(r)));
        rows.push(row);
    }
    Table { title: format!("Crash counts by {}", tab.variable), headers, rows }
}

fn matrix_table<T: Copy>(
    title: String,
    corner: &str,
    row_labels: &[String],
    col_labels: &[String],
    cells: &[Vec<T>],
    fmt: impl Fn(T) -> String,
) -> Table {
    let mut headers = vec![corner.to_string()];
    headers.extend(col_labels.iter().cloned());
    let rows = row_labels
        .iter()
        .zip(cells)
        .map(|(label, row)| {
            let mut out = vec![label.clone()];
            out.extend(row.iter().map(|&v| fmt(v)));
            out
        })
        .collect();
    Table { title, headers, rows }
}

/// The four cell layers plus a summary table for a chi-square test.
pub fn contingency_tables(result: &ContingencyResult) -> Vec<(String, Table)> {
    let corner = format!("{} \\ {}", result.row_variable, result.col_variable);
    let mut out = Vec::with_capacity(5);
    out.push((
        "observed".to_string(),
        matrix_table(
            "Observed counts".into(),
            &corner,
            &result.row_labels,
            &result.col_labels,
            &result.observed,
            |v: u64| v.to_string(),
        ),
    ));
    out.push((
        "expected".to_string(),
        matrix_table(
            "Expected counts under independence".into(),
            &corner,
            &result.row_labels,
            &result.col_labels,
            &result.expected,
            fmt_sig,
        ),
    ));
    out.push((
        "residuals".to_string(),
        matrix_table(
            "Pearson residuals".into(),
            &corner,
            &result.row_labels,
            &result.col_labels,
            &result.residuals,
            fmt_sig,
        ),
    ));
    out.push((
        "cell_pct".to_string(),
        matrix_table(
            "Cell frequency (% of all records)".into(),
            &corner,
            &result.row_labels,
            &result.col_labels,
            &result.cell_frequency_pct,
            fmt_pct,
        ),
    ));

    let mut rows = vec![
        vec!["chi-square".to_string(), fmt_sig(result.chi_square)],
        vec!["df".to_string(), result.df.to_string()],
        vec!["p-value".to_string(), fmt_p(result.p_value)],
    ];
    if !result.low_expected_cells.is_empty() {
        rows.push(vec![
            "cells with expected < 5".to_string(),
            result.low_expected_cells.len().to_string(),
        ]);
    }
    out.push((
        "summary".to_string(),
        Table {
            title: "Chi-square test".into(),
            headers: vec!["Statistic".into(), "Value".into()],
            rows,
        },
    ));
    out
}

/// Coefficient table in the conventional layout: thresholds first, then
/// slopes, with stars next to estimates.
pub fn fit_report_table(report: &FitReport) -> Table {
    let rows = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.label.clone(),
                format!("{}{}", fmt_sig(r.estimate), pad_stars(r.significance.stars())),
                fmt_sig(r.std_error),
                fmt_sig(r.t_statistic),
            ]
        })
        .collect();
    Table {
        title: "Estimation results".into(),
        headers: vec![
            "Parameter".into(),
            "Estimated Coefficient".into(),
            "Standard Error".into(),
            "t statistics".into(),
        ],
        rows,
    }
}

fn pad_stars(stars: &str) -> String {
    if stars.is_empty() {
        String::new()
    } else {
        format!(" {stars}")
    }
}

/// Model-level statistics as (metric, value) rows.
pub fn fit_summary_table(report: &FitReport) -> Table {
    Table {
        title: "Fit statistics".into(),
        headers: vec!["Metric".into(), "Value".into()],
        rows: vec![
            vec!["observations".into(), report.n_obs.to_string()],
            vec!["log-likelihood".into(), fmt_sig(report.log_likelihood)],
            vec!["null log-likelihood".into(), fmt_sig(report.null_log_likelihood)],
            vec!["LR chi-square".into(), fmt_sig(report.lr_chi_square)],
            vec!["LR df".into(), report.lr_df.to_string()],
            vec!["LR p-value".into(), fmt_p(report.lr_p_value)],
            vec!["McFadden rho-squared".into(), fmt_sig(report.mcfadden_rho2)],
            vec!["converged".into(), report.converged.to_string()],
            vec!["iterations".into(), report.iterations.to_string()],
        ],
    }
}

/// Marginal-effects layout: one row per dummy, one column per class, plus a
/// row-sum self-check column.
pub fn margins_table_view(table: &MarginalEffectsTable) -> Table {
    let mut headers = vec!["Variable".to_string(), "Category".to_string()];
    headers.extend(table.class_labels.iter().cloned());
    headers.push("Row Sum".to_string());
    let rows = table
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![r.variable.clone(), r.category.clone()];
            row.extend(r.effects.iter().map(|&e| fmt_sig(e)));
            row.push(format!("{:.1e}", r.effects.iter().sum::<f64>()));
            row
        })
        .collect();
    Table { title: "Average marginal effects".into(), headers, rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(2.553), "2.553");
        assert_eq!(fmt_sig(-0.347), "-0.347");
        assert_eq!(fmt_sig(91577.179817), "91577.2");
        assert_eq!(fmt_sig(0.411685974), "0.411686");
        assert_eq!(fmt_sig(1234567.0), "1.23457e6");
        assert_eq!(fmt_sig(0.00001234567), "1.23457e-5");
        assert_eq!(fmt_sig(100.0), "100");
    }

    #[test]
    fn p_value_floor() {
        assert_eq!(fmt_p(0.0), "< 0.0001");
        assert_eq!(fmt_p(5e-5), "< 0.0001");
        assert_eq!(fmt_p(0.0234), "0.0234");
    }

    #[test]
    fn csv_render_round_trips() {
        let table = Table {
            title: "t".into(),
            headers: vec!["a".into(), "b, with comma".into()],
            rows: vec![vec!["1".into(), "x\"y".into()], vec!["2".into(), "plain".into()]],
        };
        let csv_text = table.to_csv();
        let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
        let headers: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
        assert_eq!(headers, table.headers);
        let rows: Vec<Vec<String>> = rdr
            .records()
            .map(|r| r.unwrap().iter().map(String::from).collect())
            .collect();
        assert_eq!(rows, table.rows);
    }

    #[test]
    fn markdown_has_header_separator() {
        let table = Table {
            title: "Demo".into(),
            headers: vec!["x".into(), "y".into()],
            rows: vec![vec!["1".into(), "2".into()]],
        };
        let md = table.to_markdown();
        assert!(md.contains("### Demo"));
        assert!(md.contains("| x | y |"));
        assert!(md.contains("| --- | --- |"));
        assert!(md.contains("| 1 | 2 |"));
    }
}
