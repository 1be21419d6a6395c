//! Dummy encoding of categorical records into a 0/1 design matrix.
//!
//! Column j is 1 exactly when the record falls in that column's selected
//! category. The base category and unselected categories of a variable leave
//! all of its columns at 0, so they share one reference group. Column order
//! follows schema declaration order, making coefficient vectors reproducible
//! across runs.
//!
//! Rows are stored as sorted lists of active column indices; with dummy
//! regressors this is both the compact and the fast representation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::schema::CategoricalSchema;

/// Identifies a design column as a (variable, category) pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColumnLabel {
    pub variable: String,
    pub category: String,
}

impl std::fmt::Display for ColumnLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.variable, self.category)
    }
}

/// Mapping from (variable, category) to design column, shared by encoding,
/// simulation, and profile enumeration.
#[derive(Debug, Clone)]
pub(crate) struct DummyLayout {
    /// per variable, per category: design column if selected
    pub col_of: Vec<Vec<Option<u16>>>,
    pub labels: Vec<ColumnLabel>,
    /// variable group of each column
    pub group_of: Vec<usize>,
}

impl DummyLayout {
    pub fn new(schema: &CategoricalSchema) -> Self {
        let mut col_of = Vec::with_capacity(schema.n_variables());
        let mut labels = Vec::new();
        let mut group_of = Vec::new();
        for (v, spec) in schema.variables().iter().enumerate() {
            let mut per_cat = vec![None; spec.n_categories()];
            for &cat in spec.selected_indices() {
                per_cat[cat] = Some(labels.len() as u16);
                labels.push(ColumnLabel {
                    variable: spec.name().to_string(),
                    category: spec.categories()[cat].clone(),
                });
                group_of.push(v);
            }
            col_of.push(per_cat);
        }
        Self { col_of, labels, group_of }
    }
}

/// Dummy-encoded regressors with the ordinal outcome vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    columns: Vec<ColumnLabel>,
    group_of: Vec<usize>,
    class_labels: Vec<String>,
    y: Vec<u8>,
    row_offsets: Vec<u32>,
    active: Vec<u16>,
}

impl DesignMatrix {
    /// Builds a matrix from explicit active-column rows. Groups are derived
    /// from the column labels' variable names.
    pub fn from_rows(
        columns: Vec<ColumnLabel>,
        class_labels: Vec<String>,
        rows: impl IntoIterator<Item = (Vec<u16>, u8)>,
    ) -> Result<Self> {
        if class_labels.len() < 2 {
            return Err(Error::TooFewOutcomeClasses);
        }
        let mut variables: Vec<&str> = Vec::new();
        let group_of = columns
            .iter()
            .map(|c| {
                match variables.iter().position(|v| *v == c.variable) {
                    Some(g) => g,
                    None => {
                        variables.push(&c.variable);
                        variables.len() - 1
                    }
                }
            })
            .collect();
        let n_cols = columns.len();
        let n_classes = class_labels.len();
        let mut y = Vec::new();
        let mut row_offsets = vec![0u32];
        let mut active = Vec::new();
        for (cols, outcome) in rows {
            if outcome as usize >= n_classes {
                return Err(Error::InvalidArgument(format!("outcome {outcome} out of range")));
            }
            let mut cols = cols;
            cols.sort_unstable();
            cols.dedup();
            if cols.iter().any(|&c| c as usize >= n_cols) {
                return Err(Error::InvalidArgument("active column out of range".into()));
            }
            active.extend_from_slice(&cols);
            row_offsets.push(active.len() as u32);
            y.push(outcome);
        }
        Ok(Self { columns, group_of, class_labels, y, row_offsets, active })
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_labels.len()
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    pub fn columns(&self) -> &[ColumnLabel] {
        &self.columns
    }

    /// Variable group index of a column; sibling dummies share a group.
    pub fn column_group(&self, col: usize) -> usize {
        self.group_of[col]
    }

    pub fn column_index(&self, label: &ColumnLabel) -> Option<usize> {
        self.columns.iter().position(|c| c == label)
    }

    /// Sorted active (value 1) column indices of one row.
    pub fn row(&self, i: usize) -> &[u16] {
        let lo = self.row_offsets[i] as usize;
        let hi = self.row_offsets[i + 1] as usize;
        &self.active[lo..hi]
    }

    pub fn value(&self, i: usize, col: usize) -> f64 {
        if self.row(i).binary_search(&(col as u16)).is_ok() {
            1.0
        } else {
            0.0
        }
    }

    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols()];
        for &c in self.row(i) {
            out[c as usize] = 1.0;
        }
        out
    }

    pub fn y(&self) -> &[u8] {
        &self.y
    }

    /// x_i . beta for one row.
    pub fn linear_index(&self, i: usize, beta: &[f64]) -> f64 {
        self.row(i).iter().map(|&c| beta[c as usize]).sum()
    }

    /// Per-class outcome counts.
    pub fn class_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.n_classes()];
        for &c in &self.y {
            counts[c as usize] += 1;
        }
        counts
    }
}

/// Encodes a dataset against its schema.
pub fn encode_design(dataset: &Dataset) -> Result<DesignMatrix> {
    let schema = dataset.schema();
    if schema.n_selected() > u16::MAX as usize {
        return Err(Error::InvalidArgument("design width exceeds 65535 columns".into()));
    }
    let layout = DummyLayout::new(schema);
    let n = dataset.n_records();
    let mut y = Vec::with_capacity(n);
    let mut row_offsets = Vec::with_capacity(n + 1);
    row_offsets.push(0u32);
    let mut active = Vec::new();
    for i in 0..n {
        for (v, per_cat) in layout.col_of.iter().enumerate() {
            if let Some(col) = per_cat[dataset.category(i, v) as usize] {
                active.push(col);
            }
        }
        row_offsets.push(active.len() as u32);
        y.push(dataset.severity(i));
    }
    Ok(DesignMatrix {
        columns: layout.labels,
        group_of: layout.group_of,
        class_labels: schema.class_labels().to_vec(),
        y,
        row_offsets,
        active,
    })
}
