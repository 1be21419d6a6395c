//! Bundled schema and generator spec, usable by name from the CLI and
//! directly from tests.

use crate::dgp::GeneratorSpec;
use crate::schema::{parse_schema, CategoricalSchema};

/// Three-class severity schema with 14 selected dummies.
pub const TABLE4_SCHEMA_TOML: &str = include_str!("../assets/table4_schema.toml");

/// Generator spec pairing the schema with published coefficient values and
/// marginal category frequencies.
pub const TABLE4_DGP_TOML: &str = include_str!("../assets/table4_dgp.toml");

pub fn table4_schema() -> CategoricalSchema {
    parse_schema(TABLE4_SCHEMA_TOML).expect("bundled schema is valid")
}

pub fn table4_dgp() -> GeneratorSpec {
    GeneratorSpec::parse(TABLE4_DGP_TOML).expect("bundled generator spec is valid")
}

/// Looks up a bundled asset by CLI name.
pub fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "table4" => Some(TABLE4_SCHEMA_TOML),
        "table4_dgp" => Some(TABLE4_DGP_TOML),
        _ => None,
    }
}
