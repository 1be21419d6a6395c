//! Record ingestion and cross-tabulation.
//!
//! Records arrive as RFC 4180 CSV with a header row naming the outcome column
//! and one column per schema variable. Ingestion is a single sequential pass;
//! rows whose labels are not in the schema are dropped or mapped according to
//! the [`UnknownPolicy`].

use std::io::Read;

use crate::error::{Error, Result};
use crate::schema::CategoricalSchema;

/// What to do with a row whose label is absent from the schema.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum UnknownPolicy {
    /// Drop the row and count it in `dropped_count`.
    #[default]
    Drop,
    /// Route unknown covariate labels to the named catch-all category.
    /// Variables that do not declare that category, and unknown outcome
    /// labels, still drop the row.
    MapToCategory(String),
}

/// Parsed observations: one ordinal outcome plus one category index per
/// schema variable for every record.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: CategoricalSchema,
    severities: Vec<u8>,
    categories: Vec<u16>, // row-major, n_records x n_variables
    dropped: usize,
}

impl Dataset {
    /// Builds a dataset from pre-resolved indices, validating every record
    /// against the schema.
    pub fn from_records(
        schema: CategoricalSchema,
        records: impl IntoIterator<Item = (u8, Vec<u16>)>,
        dropped: usize,
    ) -> Result<Self> {
        let n_vars = schema.n_variables();
        let mut severities = Vec::new();
        let mut categories = Vec::new();
        for (sev, cats) in records {
            if sev as usize >= schema.n_classes() {
                return Err(Error::InvalidArgument(format!("severity index {sev} out of range")));
            }
            if cats.len() != n_vars {
                return Err(Error::DimensionMismatch { expected: n_vars, got: cats.len() });
            }
            for (v, &c) in cats.iter().enumerate() {
                if c as usize >= schema.variables()[v].n_categories() {
                    return Err(Error::InvalidArgument(format!(
                        "category index {c} out of range for variable `{}`",
                        schema.variables()[v].name()
                    )));
                }
            }
            severities.push(sev);
            categories.extend_from_slice(&cats);
        }
        Ok(Self { schema, severities, categories, dropped })
    }

    pub fn schema(&self) -> &CategoricalSchema {
        &self.schema
    }

    pub fn n_records(&self) -> usize {
        self.severities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.severities.is_empty()
    }

    pub fn dropped_count(&self) -> usize {
        self.dropped
    }

    pub fn severity(&self, record: usize) -> u8 {
        self.severities[record]
    }

    pub fn severities(&self) -> &[u8] {
        &self.severities
    }

    /// Category index of `record` for the variable at `var_idx`.
    pub fn category(&self, record: usize, var_idx: usize) -> u16 {
        self.categories[record * self.schema.n_variables() + var_idx]
    }

    /// Writes the dataset in the records CSV format.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let schema = &self.schema;
        let mut header = vec![schema.outcome_name().to_string()];
        header.extend(schema.variables().iter().map(|v| v.name().to_string()));
        w.write_record(&header)?;
        for i in 0..self.n_records() {
            let mut row = vec![schema.class_labels()[self.severity(i) as usize].clone()];
            for (v, spec) in schema.variables().iter().enumerate() {
                row.push(spec.categories()[self.category(i, v) as usize].clone());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Streams CSV records into a [`Dataset`].
pub fn ingest_records<R: Read>(
    reader: R,
    schema: &CategoricalSchema,
    policy: &UnknownPolicy,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyInput);
    }

    let col_of = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let outcome_col = col_of(schema.outcome_name())?;
    let var_cols: Vec<usize> =
        schema.variables().iter().map(|v| col_of(v.name())).collect::<Result<_>>()?;

    let mut severities = Vec::new();
    let mut categories = Vec::new();
    let mut dropped = 0usize;
    let n_vars = schema.n_variables();

    let mut row_buf: Vec<u16> = vec![0; n_vars];
    'rows: for record in rdr.records() {
        let record = record?;
        let sev = match schema.class_index(&record[outcome_col]) {
            Some(s) => s,
            None => {
                dropped += 1;
                continue;
            }
        };
        for (v, spec) in schema.variables().iter().enumerate() {
            let label = &record[var_cols[v]];
            let idx = spec.category_index(label).or_else(|| match policy {
                UnknownPolicy::Drop => None,
                UnknownPolicy::MapToCategory(catch_all) => spec.category_index(catch_all),
            });
            match idx {
                Some(i) => row_buf[v] = i as u16,
                None => {
                    dropped += 1;
                    continue 'rows;
                }
            }
        }
        severities.push(sev);
        categories.extend_from_slice(&row_buf);
    }

    Ok(Dataset { schema: schema.clone(), severities, categories, dropped })
}

/// Counts of one variable's categories against the outcome classes, plus
/// marginal totals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Crosstab {
    pub variable: String,
    pub categories: Vec<String>,
    pub class_labels: Vec<String>,
    /// categories x classes
    pub counts: Vec<Vec<u64>>,
    pub row_totals: Vec<u64>,
    pub class_totals: Vec<u64>,
    pub total: u64,
}

impl Crosstab {
    /// Percent of the category's total falling into each class.
    pub fn row_percentages(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .zip(&self.row_totals)
            .map(|(row, &t)| {
                row.iter()
                    .map(|&c| if t == 0 { 0.0 } else { 100.0 * c as f64 / t as f64 })
                    .collect()
            })
            .collect()
    }

    /// Percent of all records falling into each category.
    pub fn category_share_pct(&self, category: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.row_totals[category] as f64 / self.total as f64
        }
    }
}

/// Tabulates one variable against the outcome.
pub fn crosstab(dataset: &Dataset, variable: &str) -> Result<Crosstab> {
    let schema = dataset.schema();
    let (var_idx, spec) = schema
        .variable(variable)
        .ok_or_else(|| Error::UnknownVariable(variable.to_string()))?;
    let n_cats = spec.n_categories();
    let n_classes = schema.n_classes();
    let mut counts = vec![vec![0u64; n_classes]; n_cats];
    for i in 0..dataset.n_records() {
        counts[dataset.category(i, var_idx) as usize][dataset.severity(i) as usize] += 1;
    }
    let row_totals: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
    let class_totals: Vec<u64> =
        (0..n_classes).map(|c| counts.iter().map(|r| r[c]).sum()).collect();
    let total = row_totals.iter().sum();
    Ok(Crosstab {
        variable: variable.to_string(),
        categories: spec.categories().to_vec(),
        class_labels: schema.class_labels().to_vec(),
        counts,
        row_totals,
        class_totals,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::parse_schema;

    fn two_var_schema() -> CategoricalSchema {
        parse_schema(
            r#"
outcome = ["PDO", "Injury", "Fatal"]

[[variables]]
name = "road"
categories = ["main", "side", "other"]
base = "main"
selected = ["side"]

[[variables]]
name = "season"
categories = ["warm", "cold"]
base = "cold"
selected = ["warm"]
"#,
        )
        .unwrap()
    }

    #[test]
    fn ingests_well_formed_rows() {
        let schema = two_var_schema();
        let csv = "severity,road,season\nPDO,main,warm\nInjury,side,cold\nFatal,other,warm\n";
        let ds = ingest_records(csv.as_bytes(), &schema, &UnknownPolicy::Drop).unwrap();
        assert_eq!(ds.n_records(), 3);
        assert_eq!(ds.dropped_count(), 0);
        assert_eq!(ds.severity(2), 2);
        assert_eq!(ds.category(1, 0), 1);
        assert_eq!(ds.category(2, 1), 0);
    }

    #[test]
    fn drops_unknown_labels_and_counts_them() {
        let schema = two_var_schema();
        let csv = "severity,road,season\nUnknown,main,warm\nPDO,alley,warm\nInjury,side,cold\n";
        let ds = ingest_records(csv.as_bytes(), &schema, &UnknownPolicy::Drop).unwrap();
        assert_eq!(ds.n_records(), 1);
        assert_eq!(ds.dropped_count(), 2);
        assert_eq!(ds.n_records() + ds.dropped_count(), 3);
    }

    #[test]
    fn maps_unknown_covariates_to_catch_all() {
        let schema = two_var_schema();
        let policy = UnknownPolicy::MapToCategory("other".to_string());
        let csv = "severity,road,season\nPDO,alley,warm\nPDO,main,mild\nBad,main,warm\n";
        let ds = ingest_records(csv.as_bytes(), &schema, &policy).unwrap();
        // row 1: road mapped to `other`; row 2: season lacks `other`, dropped;
        // row 3: unknown outcome, dropped.
        assert_eq!(ds.n_records(), 1);
        assert_eq!(ds.category(0, 0), 2);
        assert_eq!(ds.dropped_count(), 2);
    }

    #[test]
    fn missing_column_is_an_error() {
        let schema = two_var_schema();
        let err = ingest_records("severity,road\nPDO,main\n".as_bytes(), &schema, &UnknownPolicy::Drop)
            .unwrap_err();
        assert!(matches!(err, Error::MissingColumn(c) if c == "season"));
    }

    #[test]
    fn empty_stream_is_an_error_but_headers_alone_are_not() {
        let schema = two_var_schema();
        let err = ingest_records("".as_bytes(), &schema, &UnknownPolicy::Drop).unwrap_err();
        assert!(matches!(err, Error::EmptyInput));

        let ds =
            ingest_records("severity,road,season\n".as_bytes(), &schema, &UnknownPolicy::Drop).unwrap();
        assert!(ds.is_empty());
        assert_eq!(ds.dropped_count(), 0);
    }

    #[test]
    fn quoted_fields_parse_per_rfc4180() {
        let schema = parse_schema(
            r#"
outcome = ["a", "b"]

[[variables]]
name = "v"
categories = ["plain", "with, comma"]
base = "plain"
selected = ["with, comma"]
"#,
        )
        .unwrap();
        let csv = "severity,v\na,\"with, comma\"\n";
        let ds = ingest_records(csv.as_bytes(), &schema, &UnknownPolicy::Drop).unwrap();
        assert_eq!(ds.n_records(), 1);
        assert_eq!(ds.category(0, 0), 1);
    }

    #[test]
    fn crosstab_counts_and_percentages() {
        let schema = two_var_schema();
        let csv = "severity,road,season\nPDO,main,warm\nInjury,main,warm\nInjury,side,cold\nFatal,side,cold\nInjury,side,warm\n";
        let ds = ingest_records(csv.as_bytes(), &schema, &UnknownPolicy::Drop).unwrap();
        let tab = crosstab(&ds, "road").unwrap();
        assert_eq!(tab.total, 5);
        assert_eq!(tab.counts[0], vec![1, 1, 0]);
        assert_eq!(tab.counts[1], vec![0, 2, 1]);
        assert_eq!(tab.row_totals, vec![2, 3, 0]);
        assert_eq!(tab.class_totals, vec![1, 3, 1]);
        let pct = tab.row_percentages();
        assert!((pct[0][0] - 50.0).abs() < 1e-12);
        for row in &pct[..2] {
            let s: f64 = row.iter().sum();
            assert!((s - 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn crosstab_single_record() {
        let schema = two_var_schema();
        let ds =
            ingest_records("severity,road,season\nInjury,side,warm\n".as_bytes(), &schema, &UnknownPolicy::Drop)
                .unwrap();
        let tab = crosstab(&ds, "season").unwrap();
        assert_eq!(tab.counts[0][1], 1);
        assert_eq!(tab.row_percentages()[0][1], 100.0);
    }

    #[test]
    fn crosstab_unknown_variable() {
        let schema = two_var_schema();
        let ds = ingest_records("severity,road,season\n".as_bytes(), &schema, &UnknownPolicy::Drop)
            .unwrap();
        assert!(matches!(crosstab(&ds, "nope"), Err(Error::UnknownVariable(_))));
    }

    #[test]
    fn crosstab_is_invariant_to_record_order() {
        let schema = two_var_schema();
        let records: Vec<(u8, Vec<u16>)> = (0..200)
            .map(|i| ((i % 3) as u8, vec![(i % 2) as u16, ((i / 3) % 2) as u16]))
            .collect();
        let forward = Dataset::from_records(schema.clone(), records.clone(), 0).unwrap();
        let mut shuffled = records;
        shuffled.reverse();
        shuffled.swap(3, 170);
        shuffled.swap(40, 99);
        let backward = Dataset::from_records(schema, shuffled, 0).unwrap();
        for var in ["road", "season"] {
            let a = crosstab(&forward, var).unwrap();
            let b = crosstab(&backward, var).unwrap();
            assert_eq!(a.counts, b.counts);
            assert_eq!(a.row_totals, b.row_totals);
        }
    }

    #[test]
    fn csv_round_trip_preserves_records() {
        let schema = two_var_schema();
        let csv = "severity,road,season\nPDO,main,warm\nInjury,side,cold\nFatal,other,warm\n";
        let ds = ingest_records(csv.as_bytes(), &schema, &UnknownPolicy::Drop).unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let again = ingest_records(buf.as_slice(), &schema, &UnknownPolicy::Drop).unwrap();
        assert_eq!(ds, again);
    }
}
