//! Categorical data model: ordered outcome classes plus categorical
//! covariates, each with a base category and a subset of categories that
//! enter the model as dummies. Categories that are neither the base nor
//! selected fold into the reference group during encoding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One categorical covariate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSpec {
    name: String,
    categories: Vec<String>,
    base: usize,
    selected: Vec<usize>,
}

impl VariableSpec {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn n_categories(&self) -> usize {
        self.categories.len()
    }

    pub fn base_index(&self) -> usize {
        self.base
    }

    pub fn base(&self) -> &str {
        &self.categories[self.base]
    }

    /// Indices of the categories that enter the model, in declaration order.
    pub fn selected_indices(&self) -> &[usize] {
        &self.selected
    }

    pub fn category_index(&self, label: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == label)
    }
}

/// Validated schema: outcome classes ordered lowest to highest severity and
/// the covariate list in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalSchema {
    outcome_name: String,
    outcome_classes: Vec<String>,
    variables: Vec<VariableSpec>,
}

/// Raw, unvalidated variable description used to build a schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariableDef {
    pub name: String,
    pub categories: Vec<String>,
    pub base: String,
    pub selected: Vec<String>,
    /// Category weights for synthetic generation; ignored outside generator
    /// specs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct SchemaFile {
    #[serde(default = "default_outcome_name")]
    pub outcome_name: String,
    pub outcome: Vec<String>,
    pub variables: Vec<VariableDef>,
    // generator extensions; ignored by plain schema parsing
    #[serde(default)]
    pub beta: Option<Vec<f64>>,
    #[serde(default)]
    pub cutoffs: Option<Vec<f64>>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_outcome_name() -> String {
    "severity".to_string()
}

impl CategoricalSchema {
    pub fn new(
        outcome_name: impl Into<String>,
        outcome_classes: Vec<String>,
        variables: Vec<VariableDef>,
    ) -> Result<Self> {
        let outcome_name = outcome_name.into();
        if outcome_classes.len() < 2 {
            return Err(Error::TooFewOutcomeClasses);
        }
        if outcome_classes.len() > u8::MAX as usize {
            return Err(Error::InvalidArgument("more than 255 outcome classes".into()));
        }
        if let Some(dup) = first_duplicate(&outcome_classes) {
            return Err(Error::DuplicateOutcomeClass(dup.to_string()));
        }

        let mut specs = Vec::with_capacity(variables.len());
        for def in variables {
            if specs.iter().any(|v: &VariableSpec| v.name == def.name) || def.name == outcome_name {
                return Err(Error::DuplicateVariable(def.name));
            }
            if def.categories.len() > u16::MAX as usize {
                return Err(Error::InvalidArgument(format!(
                    "variable `{}` has more than {} categories",
                    def.name,
                    u16::MAX
                )));
            }
            if let Some(dup) = first_duplicate(&def.categories) {
                return Err(Error::DuplicateCategory {
                    variable: def.name,
                    category: dup.to_string(),
                });
            }
            let base = def.categories.iter().position(|c| *c == def.base).ok_or_else(|| {
                Error::BaseNotInCategories { variable: def.name.clone(), base: def.base.clone() }
            })?;
            let mut selected = Vec::with_capacity(def.selected.len());
            for label in &def.selected {
                let idx = def.categories.iter().position(|c| c == label);
                match idx {
                    Some(i) if i != base && !selected.contains(&i) => selected.push(i),
                    _ => {
                        return Err(Error::InvalidSelection {
                            variable: def.name,
                            category: label.clone(),
                        })
                    }
                }
            }
            specs.push(VariableSpec { name: def.name, categories: def.categories, base, selected });
        }

        Ok(Self { outcome_name, outcome_classes, variables: specs })
    }

    pub fn outcome_name(&self) -> &str {
        &self.outcome_name
    }

    /// Class labels, lowest to highest severity.
    pub fn class_labels(&self) -> &[String] {
        &self.outcome_classes
    }

    pub fn n_classes(&self) -> usize {
        self.outcome_classes.len()
    }

    pub fn class_index(&self, label: &str) -> Option<u8> {
        self.outcome_classes.iter().position(|c| c == label).map(|i| i as u8)
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn n_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn variable(&self, name: &str) -> Option<(usize, &VariableSpec)> {
        self.variables.iter().enumerate().find(|(_, v)| v.name == name)
    }

    /// Total number of selected dummies across variables (the design width).
    pub fn n_selected(&self) -> usize {
        self.variables.iter().map(|v| v.selected.len()).sum()
    }

    /// Stable fingerprint binding fit archives to the schema they came from.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        let mut feed = |s: &str| {
            hasher.update(s.as_bytes());
            hasher.update([0x1f]);
        };
        feed(&self.outcome_name);
        for c in &self.outcome_classes {
            feed(c);
        }
        for v in &self.variables {
            feed(&v.name);
            for c in &v.categories {
                feed(c);
            }
            feed(v.base());
            for &s in &v.selected {
                feed(&v.categories[s]);
            }
        }
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn first_duplicate(items: &[String]) -> Option<&str> {
    for (i, a) in items.iter().enumerate() {
        if items[..i].contains(a) {
            return Some(a);
        }
    }
    None
}

/// Parses a schema from its TOML text form.
///
/// Keys: `outcome` (class labels, lowest first), `variables` (array of
/// tables with `name`, `categories`, `base`, `selected`), and an optional
/// `outcome_name` naming the outcome column in record files (default
/// `severity`).
pub fn parse_schema(text: &str) -> Result<CategoricalSchema> {
    let file: SchemaFile = toml::from_str(text).map_err(|e| Error::MalformedSchema(e.to_string()))?;
    CategoricalSchema::new(file.outcome_name, file.outcome, file.variables)
}

pub(crate) fn parse_schema_file(text: &str) -> Result<SchemaFile> {
    toml::from_str(text).map_err(|e| Error::MalformedSchema(e.to_string()))
}
