//! Library-level pipeline tests: CSV in, tables and fits out.

use ordsev::contingency::{chi_square_test, observed_table};
use ordsev::design::encode_design;
use ordsev::dgp::simulate;
use ordsev::export::{crosstab_table, fit_report_table, OutputFormat};
use ordsev::fit::{fit, FitOptions};
use ordsev::inference::report;
use ordsev::{assets, crosstab, ingest_records, parse_schema, Dataset, UnknownPolicy};

/// Reference rider-age by severity cell counts (PDO, Injury, Fatal per row).
const AGE_CELLS: [(&str, [u64; 3]); 3] = [
    ("Under25", [1_740, 12_182, 176]),
    ("26to55", [4_480, 17_789, 197]),
    ("Over56", [266, 1_955, 48]),
];

fn age_dataset() -> Dataset {
    let schema = parse_schema(
        r#"
outcome = ["PDO", "Injury", "Fatal"]

[[variables]]
name = "rider_age"
categories = ["Under25", "26to55", "Over56"]
base = "26to55"
selected = ["Under25", "Over56"]
"#,
    )
    .unwrap();
    let mut records = Vec::new();
    for (cat, (_, cells)) in AGE_CELLS.iter().enumerate() {
        for (class, &count) in cells.iter().enumerate() {
            for _ in 0..count {
                records.push((class as u8, vec![cat as u16]));
            }
        }
    }
    Dataset::from_records(schema, records, 0).unwrap()
}

#[test]
fn crosstab_reproduces_reference_row_percentages() {
    let ds = age_dataset();
    assert_eq!(ds.n_records(), 38_833);
    let tab = crosstab(&ds, "rider_age").unwrap();
    assert_eq!(tab.total, 38_833);
    let pct = tab.row_percentages();
    // Under25 row rounds to (12.3, 86.4, 1.2) percent
    assert!((pct[0][0] - 12.3).abs() < 0.05, "{}", pct[0][0]);
    assert!((pct[0][1] - 86.4).abs() < 0.05, "{}", pct[0][1]);
    assert!((pct[0][2] - 1.2).abs() < 0.05, "{}", pct[0][2]);
    for row in &pct {
        let sum: f64 = row.iter().sum();
        assert!((sum - 100.0).abs() < 1e-9);
    }
    // category shares match the reference margins
    assert!((tab.category_share_pct(0) - 36.3).abs() < 0.05);
    assert!((tab.category_share_pct(2) - 5.8).abs() < 0.05);
}

#[test]
fn csv_round_trip_through_ingest_preserves_everything() {
    let ds = age_dataset();
    let mut bytes = Vec::new();
    ds.write_csv(&mut bytes).unwrap();
    let again = ingest_records(bytes.as_slice(), ds.schema(), &UnknownPolicy::Drop).unwrap();
    assert_eq!(again.n_records(), 38_833);
    assert_eq!(again.dropped_count(), 0);
    assert_eq!(&again, &ds);
}

#[test]
fn age_severity_association_is_strongly_significant() {
    let ds = age_dataset();
    let table = observed_table(&ds, "rider_age", "severity").unwrap();
    assert_eq!(table.counts[0], vec![1_740, 12_182, 176]);
    let result = chi_square_test(&table).unwrap();
    assert!(result.chi_square > 100.0);
    assert!(result.p_value < 1e-3);
    // under-25 crashes are over-represented among injuries
    assert!(result.residuals[0][1] > 0.0);
}

#[test]
fn simulated_sample_matches_marginal_frequencies() {
    let spec = assets::table4_dgp().with_sample_size(40_000).unwrap().with_seed(17);
    let ds = simulate(&spec).unwrap();
    let tab = crosstab(&ds, "season").unwrap();
    // Spring/Summer carries 59.1% of the weight in the bundled spec
    assert!((tab.category_share_pct(0) - 59.1).abs() < 1.0, "{}", tab.category_share_pct(0));

    let view = crosstab_table(&tab);
    assert_eq!(view.rows.len(), 3); // total row + two categories
    assert_eq!(view.rows[0][0], "Total");
}

#[test]
fn enumerated_class_shares_predict_simulated_shares() {
    // Law of total probability over the full bundled covariate space versus
    // a 200k-record draw.
    let spec = assets::table4_dgp().with_sample_size(200_000).unwrap().with_seed(23);
    let profiles = ordsev::dgp::enumerate_profiles(&spec).unwrap();
    let mut exact = [0.0f64; 3];
    for p in &profiles {
        for (e, c) in exact.iter_mut().zip(&p.class_probabilities) {
            *e += p.probability * c;
        }
    }
    let total: f64 = exact.iter().sum();
    assert!((total - 1.0).abs() < 1e-9);

    let ds = simulate(&spec).unwrap();
    let mut counts = [0u64; 3];
    for i in 0..ds.n_records() {
        counts[ds.severity(i) as usize] += 1;
    }
    let bound = 4.0 / (ds.n_records() as f64).sqrt();
    for (c, e) in counts.iter().zip(&exact) {
        let share = *c as f64 / ds.n_records() as f64;
        assert!((share - e).abs() < bound, "share {share} vs exact {e}");
    }
}

#[test]
fn full_fit_report_has_reference_shape() {
    let spec = assets::table4_dgp().with_sample_size(30_000).unwrap().with_seed(2);
    let ds = simulate(&spec).unwrap();
    let design = encode_design(&ds).unwrap();
    let fitted = fit(&design, &FitOptions::default()).unwrap();
    assert!(fitted.converged);
    let rep = report(&fitted, design.columns()).unwrap();

    assert_eq!(rep.rows.len(), 16); // 2 cutoffs + 14 slopes
    assert_eq!(rep.lr_df, 14);
    assert!(rep.rows[0].label.starts_with("Cut-off Point"));
    assert!(rep.mcfadden_rho2 > 0.0 && rep.mcfadden_rho2 < 1.0);
    assert!(rep.lr_p_value < 1e-4);

    // rendered views agree on the row count in every format
    let table = fit_report_table(&rep);
    for format in [OutputFormat::Csv, OutputFormat::Json, OutputFormat::Md] {
        let rendered = table.render(format);
        assert!(!rendered.is_empty());
    }
    let csv_text = table.to_csv();
    let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
    assert_eq!(rdr.records().count(), 16);
}
