//! Metadata records and their JSON and Turtle serializations.

mod json;
mod rdf;
pub mod turtle;

use chrono::NaiveDate;
use indexmap::IndexMap;

pub use json::{from_json, from_json_with, parse_date, to_json};
pub use rdf::{from_turtle, from_turtle_with, subject_iri, to_turtle};
pub use turtle::{parse_turtle, write_turtle, Literal, Node, Triple, TripleDocument, TurtleError};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Text(String),
    Iri(String),
    Date(NaiveDate),
    Integer(i64),
    Number(f64),
    Boolean(bool),
    Term { label: String, iri: Option<String> },
    Nested(Nested),
}

impl Value {
    pub fn text(s: impl Into<String>) -> Self {
        Value::Text(s.into())
    }

    pub fn iri(s: impl Into<String>) -> Self {
        Value::Iri(s.into())
    }

    pub fn term(label: impl Into<String>) -> Self {
        Value::Term {
            label: label.into(),
            iri: None,
        }
    }

    pub fn term_with_iri(label: impl Into<String>, iri: impl Into<String>) -> Self {
        Value::Term {
            label: label.into(),
            iri: Some(iri.into()),
        }
    }

    /// Short name of the variant, used in messages.
    pub fn kind(&self) -> &'static str {
        match self {
            Value::Text(_) => "text",
            Value::Iri(_) => "iri",
            Value::Date(_) => "date",
            Value::Integer(_) => "integer",
            Value::Number(_) => "number",
            Value::Boolean(_) => "boolean",
            Value::Term { .. } => "vocabularyTerm",
            Value::Nested(_) => "nested",
        }
    }

    /// Plain string content for text-like values.
    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Text(s) | Value::Iri(s) => Some(s),
            Value::Term { label, .. } => Some(label),
            _ => None,
        }
    }
}

/// A value shaped by a sub-schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Nested {
    pub schema: String,
    pub fields: ValueMap,
}

impl Nested {
    pub fn new(schema: impl Into<String>) -> Self {
        Nested {
            schema: schema.into(),
            fields: ValueMap::new(),
        }
    }

    pub fn with(mut self, field: impl Into<String>, value: Value) -> Self {
        self.fields.push(field, value);
        self
    }
}

/// Element id to non-empty value list, in insertion order.
///
/// Equality ignores key order but not the order of values within a list.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValueMap(IndexMap<String, Vec<Value>>);

impl ValueMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replaces the values of `key`. An empty list removes the key.
    pub fn insert(&mut self, key: impl Into<String>, values: Vec<Value>) {
        let key = key.into();
        if values.is_empty() {
            self.0.shift_remove(&key);
        } else {
            self.0.insert(key, values);
        }
    }

    pub fn push(&mut self, key: impl Into<String>, value: Value) {
        self.0.entry(key.into()).or_default().push(value);
    }

    pub fn get(&self, key: &str) -> Option<&[Value]> {
        self.0.get(key).map(Vec::as_slice)
    }

    pub fn remove(&mut self, key: &str) -> Option<Vec<Value>> {
        self.0.shift_remove(key)
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Value])> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<K: Into<String>> FromIterator<(K, Vec<Value>)> for ValueMap {
    fn from_iter<T: IntoIterator<Item = (K, Vec<Value>)>>(iter: T) -> Self {
        let mut map = ValueMap::new();
        for (k, v) in iter {
            map.insert(k, v);
        }
        map
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetadataRecord {
    pub schema_id: String,
    pub values: ValueMap,
}

impl MetadataRecord {
    pub fn new(schema_id: impl Into<String>) -> Self {
        MetadataRecord {
            schema_id: schema_id.into(),
            values: ValueMap::new(),
        }
    }

    pub fn with(mut self, element: impl Into<String>, value: Value) -> Self {
        self.values.push(element, value);
        self
    }

    pub fn get(&self, element: &str) -> Option<&[Value]> {
        self.values.get(element)
    }

    /// First plain string of an element, if any.
    pub fn first_str(&self, element: &str) -> Option<&str> {
        self.get(element).and_then(|v| v.first()).and_then(Value::as_str)
    }
}

/// How keys or predicates the schema does not declare are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    #[default]
    Strict,
    Lax,
}

/// An input field the schema does not declare, kept in lax mode.
#[derive(Debug, Clone, PartialEq)]
pub struct UnknownField {
    pub path: String,
    pub value: serde_json::Value,
}

/// A record read in lax mode together with the fields it could not place.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub record: MetadataRecord,
    pub unknowns: Vec<UnknownField>,
}

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("malformed JSON record: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed record: {0}")]
    Malformed(String),
    #[error("`{0}` is not declared by the schema")]
    UnknownElement(String),
    #[error("`{path}` expects {expected}, found {found}")]
    TypeMismatch {
        path: String,
        expected: String,
        found: String,
    },
    #[error("`{path}` holds a {found} value but the schema expects sub-schema `{expected}`")]
    ShapeMismatch {
        path: String,
        expected: String,
        found: String,
    },
    #[error("`{0}` holds a number that is not finite")]
    NonFinite(String),
    #[error(transparent)]
    Turtle(#[from] TurtleError),
    #[error("expected exactly one non-blank subject, found {0}")]
    SubjectCount(usize),
}

/// Path segment for one value: `[i]` is added when the element can hold
/// several values or currently does.
pub fn value_path(parent: &str, id: &str, index: usize, indexed: bool) -> String {
    let mut p = if parent.is_empty() {
        id.to_string()
    } else {
        format!("{parent}.{id}")
    };
    if indexed {
        p.push_str(&format!("[{index}]"));
    }
    p
}

/// Element keys of a record in schema order, without a context.
pub(crate) fn render_body(
    schema: &crate::schema::SchemaDefinition,
    values: &ValueMap,
    typed: bool,
) -> Result<serde_json::Map<String, serde_json::Value>, RecordError> {
    json::render_map(schema, &schema.elements, values, "", typed)
}

pub(crate) fn element_path(parent: &str, id: &str) -> String {
    if parent.is_empty() {
        id.to_string()
    } else {
        format!("{parent}.{id}")
    }
}
