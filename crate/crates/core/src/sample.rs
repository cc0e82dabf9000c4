//! Schema-valid sample records, for demos, fixtures and randomized tests.

use chrono::NaiveDate;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::record::{MetadataRecord, Nested, Value, ValueMap};
use crate::schema::{ElementDefinition, SchemaDefinition, Tier, ValueType};

/// Nested values stop at this depth; deeper optional fields stay empty.
const MAX_DEPTH: usize = 3;

/// The smallest conformant record: every mandatory element, and every
/// mandatory field of the nested values they hold, filled with one value.
pub fn conformant_record(schema: &SchemaDefinition) -> MetadataRecord {
    let mut record = MetadataRecord::new(&schema.id);
    record.values = minimal_map(schema, &schema.elements, 0);
    record
}

fn minimal_map(schema: &SchemaDefinition, defs: &[ElementDefinition], depth: usize) -> ValueMap {
    defs.iter()
        .filter(|d| d.tier == Tier::Mandatory)
        .filter_map(|d| Some((d.id.clone(), vec![minimal_value(schema, d, depth)?])))
        .collect()
}

fn minimal_value(schema: &SchemaDefinition, def: &ElementDefinition, depth: usize) -> Option<Value> {
    Some(match &def.value_type {
        ValueType::Text => Value::text(format!("Example {}", def.label)),
        ValueType::Iri => Value::iri(format!("https://example.org/{}", def.id)),
        ValueType::Date => Value::Date(NaiveDate::from_ymd_opt(2024, 1, 1)?),
        ValueType::Integer => Value::Integer(1),
        ValueType::Number => Value::Number(1.5),
        ValueType::Boolean => Value::Boolean(true),
        ValueType::VocabularyTerm => {
            let term = schema.vocabulary(def.vocabulary_ref.as_deref()?)?.terms.first()?;
            Value::Term {
                label: term.label.clone(),
                iri: term.iri.clone(),
            }
        }
        ValueType::SubSchemaRef(id) => {
            let sub = schema.sub_schema(id)?;
            if depth >= MAX_DEPTH {
                return None;
            }
            Value::Nested(Nested {
                schema: sub.id.clone(),
                fields: minimal_map(schema, &sub.fields, depth + 1),
            })
        }
    })
}

/// Random records whose values all match their declared types, vocabularies
/// and nested shapes. Each element is present with probability `fill`;
/// nested values always carry their mandatory fields.
pub struct RecordGenerator<'a> {
    schema: &'a SchemaDefinition,
    fill: f64,
    rng: ChaCha8Rng,
}

impl<'a> RecordGenerator<'a> {
    pub fn new(schema: &'a SchemaDefinition, seed: u64) -> Self {
        RecordGenerator {
            schema,
            fill: 0.5,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn with_fill(mut self, fill: f64) -> Self {
        self.fill = fill.clamp(0.0, 1.0);
        self
    }

    pub fn record(&mut self) -> MetadataRecord {
        let schema = self.schema;
        let mut record = MetadataRecord::new(&schema.id);
        record.values = self.map(&schema.elements, 0, false);
        record
    }

    /// A record holding only the given elements, each filled.
    pub fn record_with(&mut self, ids: &[&str]) -> MetadataRecord {
        let schema = self.schema;
        let mut record = MetadataRecord::new(&schema.id);
        for def in schema.elements.iter().filter(|d| ids.contains(&d.id.as_str())) {
            let values = self.values(def, 0);
            record.values.insert(def.id.clone(), values);
        }
        record
    }

    fn map(&mut self, defs: &[ElementDefinition], depth: usize, nested: bool) -> ValueMap {
        let mut map = ValueMap::new();
        for def in defs {
            let required = nested && def.tier == Tier::Mandatory;
            if required || self.rng.random_bool(self.fill) {
                let values = self.values(def, depth);
                map.insert(def.id.clone(), values);
            }
        }
        map
    }

    fn values(&mut self, def: &ElementDefinition, depth: usize) -> Vec<Value> {
        let n = if def.multi_valued {
            self.rng.random_range(1..=3)
        } else {
            1
        };
        (0..n).filter_map(|_| self.value(def, depth)).collect()
    }

    fn value(&mut self, def: &ElementDefinition, depth: usize) -> Option<Value> {
        let schema = self.schema;
        let rng = &mut self.rng;
        Some(match &def.value_type {
            ValueType::Text => Value::Text(random_text(rng)),
            ValueType::Iri => Value::Iri(random_iri(rng)),
            ValueType::Date => {
                let day = rng.random_range(0..73_000);
                Value::Date(NaiveDate::from_ymd_opt(1900, 1, 1)? + chrono::Days::new(day))
            }
            ValueType::Integer => Value::Integer(match rng.random_range(0..4) {
                0 => rng.random(),
                _ => rng.random_range(-1000..1000),
            }),
            ValueType::Number => Value::Number(match rng.random_range(0..3) {
                0 => f64::from(rng.random_range(-50..50)),
                1 => rng.random_range(-1.0e6..1.0e6),
                _ => rng.random::<f64>() * 10f64.powi(rng.random_range(-300..300)),
            }),
            ValueType::Boolean => Value::Boolean(rng.random()),
            ValueType::VocabularyTerm => {
                let vocab = schema.vocabulary(def.vocabulary_ref.as_deref()?)?;
                let term = vocab.terms.choose(rng)?;
                Value::Term {
                    label: term.label.clone(),
                    iri: term.iri.clone(),
                }
            }
            ValueType::SubSchemaRef(id) => {
                if depth >= MAX_DEPTH {
                    return None;
                }
                let sub = schema.sub_schema(id)?;
                Value::Nested(Nested {
                    schema: sub.id.clone(),
                    fields: self.map(&sub.fields, depth + 1, true),
                })
            }
        })
    }
}

const TEXT_PIECES: &[&str] = &[
    "grid", "Energie", "load flow", "PV", "\"quoted\"", "back\\slash", "line\nbreak", "tab\there", "Zürich",
    "Ωmega", "日本", "🔋", "a'b", "#hash", "x: y", "{brace}", "50 %", "true", "-", "''' \"\"\"",
];

fn random_text(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(1..=4);
    (0..n)
        .map(|_| *TEXT_PIECES.choose(rng).expect("non-empty"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn random_iri(rng: &mut ChaCha8Rng) -> String {
    const HOSTS: &[&str] = &["https://example.org", "http://w3id.org/x", "https://doi.org"];
    const SEGMENTS: &[&str] = &["a", "grid-sim", "10.5281", "zenodo.123", "v1_2", "%C3%BC"];
    let mut iri = HOSTS.choose(rng).expect("non-empty").to_string();
    for _ in 0..rng.random_range(0..=3) {
        iri.push('/');
        iri.push_str(SEGMENTS.choose(rng).expect("non-empty"));
    }
    match rng.random_range(0..4) {
        0 => iri.push_str("#frag"),
        1 => iri.push_str("?q=1&r=2"),
        _ => {}
    }
    iri
}
