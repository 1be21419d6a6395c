//! Machine-readable fit archive.
//!
//! The archive carries everything downstream marginal-effects runs need:
//! parameters at full precision, the covariance, likelihoods, convergence
//! metadata, and a schema fingerprint so an archive cannot silently be
//! reused against different data.

use serde::{Deserialize, Serialize};

use crate::design::{ColumnLabel, DesignMatrix};
use crate::error::{Error, Result};
use crate::fit::{FitOptions, OrderedLogitFit};
use crate::ologit::OrderedLogitParams;
use crate::schema::CategoricalSchema;

pub const ARCHIVE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArchiveOptions {
    pub tol_grad: f64,
    pub tol_ll: f64,
    pub max_iter: usize,
    pub hessian_fallback: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitArchive {
    pub format_version: u32,
    pub schema_hash: String,
    pub outcome_classes: Vec<String>,
    pub columns: Vec<ColumnLabel>,
    pub beta: Vec<f64>,
    pub cutoffs: Vec<f64>,
    pub covariance: Option<Vec<Vec<f64>>>,
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
    pub n_observations: usize,
    pub warnings: Vec<String>,
    pub options: ArchiveOptions,
}

impl FitArchive {
    pub fn from_fit(
        fit: &OrderedLogitFit,
        design: &DesignMatrix,
        schema: &CategoricalSchema,
        options: &FitOptions,
    ) -> Self {
        Self {
            format_version: ARCHIVE_FORMAT_VERSION,
            schema_hash: schema.fingerprint(),
            outcome_classes: design.class_labels().to_vec(),
            columns: design.columns().to_vec(),
            beta: fit.params.beta().to_vec(),
            cutoffs: fit.params.cutoffs().to_vec(),
            covariance: fit.covariance.clone(),
            log_likelihood: fit.log_likelihood,
            null_log_likelihood: fit.null_log_likelihood,
            iterations: fit.iterations,
            converged: fit.converged,
            gradient_norm: fit.gradient_norm,
            n_observations: fit.n_obs,
            warnings: fit.warnings.iter().map(|w| w.to_string()).collect(),
            options: ArchiveOptions {
                tol_grad: options.tol_grad,
                tol_ll: options.tol_ll,
                max_iter: options.max_iter,
                hessian_fallback: options.hessian_fallback,
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("archive serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let archive: FitArchive =
            serde_json::from_str(text).map_err(|e| Error::MalformedArchive(e.to_string()))?;
        if archive.format_version != ARCHIVE_FORMAT_VERSION {
            return Err(Error::MalformedArchive(format!(
                "unsupported format version {}",
                archive.format_version
            )));
        }
        Ok(archive)
    }

    pub fn params(&self) -> Result<OrderedLogitParams> {
        OrderedLogitParams::new(self.beta.clone(), self.cutoffs.clone())
    }

    /// Rejects archives whose schema fingerprint does not match.
    pub fn check_schema(&self, schema: &CategoricalSchema) -> Result<()> {
        let hash = schema.fingerprint();
        if self.schema_hash != hash {
            return Err(Error::SchemaHashMismatch { archive: self.schema_hash.clone(), schema: hash });
        }
        Ok(())
    }
}

/// Sidecar written next to simulated record files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationProvenance {
    pub seed: u64,
    pub n: usize,
    pub spec_hash: String,
    pub generator: String,
}

impl SimulationProvenance {
    pub fn new(seed: u64, n: usize, spec_text: &str) -> Self {
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(spec_text.as_bytes());
        Self {
            seed,
            n,
            spec_hash: digest.iter().map(|b| format!("{b:02x}")).collect(),
            generator: "splitmix64".to_string(),
        }
    }
}
