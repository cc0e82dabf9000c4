use std::collections::BTreeMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::model::{ElementDefinition, SchemaDefinition, Tier, ValueType};

/// Structural counts of a schema.
///
/// `perTier` counts the elements a user is presented with: an element whose
/// value is shaped by a sub-schema is replaced by that sub-schema's leaf
/// fields, each at the weakest tier along its path. `declaredPerTier` counts
/// every declared element once (top-level plus sub-schema fields) and
/// `topLevelPerTier` only the top level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SchemaStats {
    pub area_count: usize,
    pub top_level_count: usize,
    pub sub_schema_count: usize,
    pub sub_schema_field_count: usize,
    pub per_tier: IndexMap<Tier, usize>,
    pub top_level_per_tier: IndexMap<Tier, usize>,
    pub declared_per_tier: IndexMap<Tier, usize>,
    pub per_area: IndexMap<String, usize>,
    pub per_provenance: BTreeMap<String, usize>,
}

/// Expected counts shipped next to a bundled schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SchemaManifest {
    pub schema_id: String,
    #[serde(flatten)]
    pub stats: SchemaStats,
}

fn tier_map() -> IndexMap<Tier, usize> {
    Tier::ALL.iter().map(|t| (*t, 0)).collect()
}

pub fn schema_stats(schema: &SchemaDefinition) -> SchemaStats {
    let mut per_tier = tier_map();
    let mut top_level_per_tier = tier_map();
    let mut declared_per_tier = tier_map();
    let mut per_area: IndexMap<String, usize> =
        schema.areas.iter().map(|a| (a.id.clone(), 0)).collect();
    let mut per_provenance = BTreeMap::new();

    for e in &schema.elements {
        *top_level_per_tier.entry(e.tier).or_default() += 1;
        *declared_per_tier.entry(e.tier).or_default() += 1;
        *per_provenance.entry(e.provenance.as_str().to_string()).or_default() += 1;
        if let Some(area) = &e.area {
            *per_area.entry(area.clone()).or_default() += 1;
        }
        let budget = schema.sub_schemas.len() + 1;
        presented_leaves(schema, e, e.tier, budget, &mut per_tier);
    }
    let mut field_count = 0;
    for s in &schema.sub_schemas {
        for f in &s.fields {
            field_count += 1;
            *declared_per_tier.entry(f.tier).or_default() += 1;
            *per_provenance.entry(f.provenance.as_str().to_string()).or_default() += 1;
        }
    }

    SchemaStats {
        area_count: schema.areas.len(),
        top_level_count: schema.elements.len(),
        sub_schema_count: schema.sub_schemas.len(),
        sub_schema_field_count: field_count,
        per_tier,
        top_level_per_tier,
        declared_per_tier,
        per_area,
        per_provenance,
    }
}

// `depth` bounds recursion for schemas that were never consistency-checked.
fn presented_leaves(
    schema: &SchemaDefinition,
    element: &ElementDefinition,
    tier: Tier,
    depth: usize,
    out: &mut IndexMap<Tier, usize>,
) {
    let sub = match &element.value_type {
        ValueType::SubSchemaRef(id) if depth > 0 => schema.sub_schema(id),
        _ => None,
    };
    match sub {
        Some(sub) => {
            for f in &sub.fields {
                presented_leaves(schema, f, tier.weakest(f.tier), depth - 1, out);
            }
        }
        None => *out.entry(tier).or_default() += 1,
    }
}
