//! Categorical crash-severity analytics.
//!
//! The crate ingests categorical crash records, runs Pearson chi-square
//! association tests with cell residuals, fits an ordered logistic
//! regression of severity by maximum likelihood, reports inference
//! statistics (standard errors, t-ratios, likelihood-ratio chi-square,
//! McFadden's rho-squared), and computes average discrete-change marginal
//! effects. A seeded generator simulates datasets from a known process for
//! parameter-recovery studies.
//!
//! Heavy per-observation loops run data-parallel under the default
//! `parallel` feature with a fixed block reduction order, so results are
//! bit-identical across thread counts and with the sequential fallback
//! (`--no-default-features`).
//!
//! ```
//! use ordsev::{assets, encode_design, fit, FitOptions};
//! use ordsev::inference::report;
//!
//! let spec = assets::table4_dgp().with_sample_size(2_000).unwrap();
//! let data = ordsev::dgp::simulate(&spec).unwrap();
//! let design = encode_design(&data).unwrap();
//! let fitted = fit(&design, &FitOptions::default()).unwrap();
//! assert!(fitted.converged);
//!
//! let summary = report(&fitted, design.columns()).unwrap();
//! assert_eq!(summary.lr_df, 14);
//! assert!(summary.mcfadden_rho2 > 0.0);
//! ```

pub mod archive;
pub mod assets;
pub mod contingency;
pub mod design;
pub mod dgp;
pub mod error;
pub mod exec;
pub mod export;
pub mod fit;
pub mod inference;
pub mod ingest;
mod linalg;
pub mod logistic;
pub mod margins;
pub mod ologit;
pub mod schema;
pub mod special;

pub use design::{encode_design, ColumnLabel, DesignMatrix};
pub use error::{Error, Result};
pub use exec::Execution;
pub use fit::{fit, FitOptions, FitWarning, OrderedLogitFit};
pub use ingest::{crosstab, ingest_records, Dataset, UnknownPolicy};
pub use ologit::{class_probabilities, log_likelihood, OrderedLogitParams};
pub use schema::{parse_schema, CategoricalSchema, VariableSpec};
