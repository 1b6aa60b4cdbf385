//! Scenario documents: the authoring language, validation, shipped fixtures,
//! variant generation and feature extraction.

mod doc;
pub mod features;
pub mod fixtures;
mod parse;
pub mod variant;

pub use doc::{DocItem, ErrorKind, ScenarioDoc, UnitPlacement, ValidationError};
pub use features::{extract_features, FeatureVector};
pub use parse::{parse_scenario, serialize_scenario, ParseError};
pub use variant::{generate_variant, Perturbation, VariantError};
