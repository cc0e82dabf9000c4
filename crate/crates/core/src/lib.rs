//! Schema-driven metadata for energy research software.
//!
//! The [`schema`] module loads the element registry every other module is
//! driven by. [`record`] holds the record model with its JSON and Turtle
//! serializations, [`validate`] checks and scores records, [`crosswalk`]
//! converts them to CodeMeta and CFF, and [`forge`] extracts candidate records
//! from GitHub and GitLab.

pub mod bundled;
pub mod crosswalk;
pub mod forge;
pub mod record;
pub mod sample;
pub mod schema;
pub mod validate;

pub use record::{MetadataRecord, Value};
pub use schema::{SchemaDefinition, Tier};
