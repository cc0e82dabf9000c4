//! Schema definition: loading, consistency checking, lookup and statistics.

mod load;
mod model;
mod stats;

use std::collections::BTreeMap;
use std::sync::Arc;

pub use load::{
    check_consistency, load_schema, load_schema_file, load_schema_with, serialize_schema, serialize_vocabulary,
    ConsistencyIssue, SchemaError,
};
pub use model::{
    ElementDefinition, Provenance, SchemaDefinition, SubSchema, Term, ThematicArea, Tier,
    ValueType, Vocabulary, VocabularyKind,
};
pub use stats::{schema_stats, SchemaManifest, SchemaStats};

pub fn element_by_id<'a>(schema: &'a SchemaDefinition, id: &str) -> Option<&'a ElementDefinition> {
    schema.element(id)
}

/// Exact, case-sensitive lookup by label or by declared IRI.
pub fn resolve_term<'a>(vocab: &'a Vocabulary, value: &str) -> Option<&'a Term> {
    vocab
        .terms
        .iter()
        .find(|t| t.label == value)
        .or_else(|| vocab.terms.iter().find(|t| t.iri.as_deref() == Some(value)))
}

/// Schemas addressable by id, used where two schemas meet (crosswalks).
#[derive(Debug, Clone, Default)]
pub struct SchemaSet {
    schemas: BTreeMap<String, Arc<SchemaDefinition>>,
}

impl SchemaSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, schema: Arc<SchemaDefinition>) {
        self.schemas.insert(schema.id.clone(), schema);
    }

    pub fn with(mut self, schema: Arc<SchemaDefinition>) -> Self {
        self.insert(schema);
        self
    }

    pub fn get(&self, id: &str) -> Option<&Arc<SchemaDefinition>> {
        self.schemas.get(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.schemas.keys().map(String::as_str)
    }
}
