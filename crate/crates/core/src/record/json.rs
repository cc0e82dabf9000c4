//! JSON record layout with a linked-data `@context`.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde_json::{Map, Value as Json};

use super::{
    element_path, value_path, MetadataRecord, Nested, Parsed, RecordError, Strictness,
    UnknownField, Value, ValueMap,
};
use crate::schema::{ElementDefinition, SchemaDefinition, ValueType};

pub(crate) const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub(crate) const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";

/// Renders the canonical JSON document: `@context` first, then elements in
/// schema order, two-space indentation and a trailing newline.
pub fn to_json(record: &MetadataRecord, schema: &SchemaDefinition) -> Result<String, RecordError> {
    let body = render_map(schema, &schema.elements, &record.values, "", false)?;

    let mut ctx = Context {
        schema,
        prefixes: BTreeSet::new(),
        scoped: false,
    };
    let mut terms = Map::new();
    for def in &schema.elements {
        if let Some(values) = record.values.get(&def.id) {
            let refs: Vec<&Value> = values.iter().collect();
            terms.insert(def.id.clone(), ctx.term(def, &refs));
        }
    }

    let mut context = Map::new();
    if ctx.scoped {
        context.insert("@version".into(), Json::from(1.1));
    }
    for prefix in &ctx.prefixes {
        context.insert(prefix.clone(), Json::String(ctx.namespace(prefix).to_string()));
    }
    context.extend(terms);

    let mut doc = Map::new();
    doc.insert("@context".into(), Json::Object(context));
    doc.extend(body);
    let mut out = serde_json::to_string_pretty(&Json::Object(doc))?;
    out.push('\n');
    Ok(out)
}

struct Context<'a> {
    schema: &'a SchemaDefinition,
    prefixes: BTreeSet<String>,
    scoped: bool,
}

impl Context<'_> {
    fn namespace(&self, prefix: &str) -> &str {
        match self.schema.namespaces.get(prefix) {
            Some(ns) => ns,
            None if prefix == "xsd" => XSD,
            None => RDFS,
        }
    }

    fn builtin(&mut self, prefix: &str, local: &str) -> String {
        self.prefixes.insert(prefix.to_string());
        format!("{prefix}:{local}")
    }

    fn compact(&mut self, iri: &str) -> String {
        match self.schema.compact_iri(iri) {
            Some((prefix, local)) if is_safe_local(&local) => {
                let out = format!("{prefix}:{local}");
                self.prefixes.insert(prefix);
                out
            }
            _ => iri.to_string(),
        }
    }

    /// Term definition for an element, given every value it holds in the
    /// document. Nested field terms go into a property-scoped context.
    fn term(&mut self, def: &ElementDefinition, values: &[&Value]) -> Json {
        let id = self.compact(&self.schema.element_iri(def));
        let mut obj = Map::new();
        obj.insert("@id".into(), Json::String(id));
        match &def.value_type {
            ValueType::Iri => {
                obj.insert("@type".into(), Json::from("@id"));
            }
            ValueType::Date => {
                let t = self.builtin("xsd", "date");
                obj.insert("@type".into(), Json::String(t));
            }
            ValueType::VocabularyTerm => {
                let with_iri = values
                    .iter()
                    .any(|v| matches!(v, Value::Term { iri: Some(_), .. }));
                if with_iri {
                    let label = self.builtin("rdfs", "label");
                    let mut inner = Map::new();
                    inner.insert("label".into(), Json::String(label));
                    obj.insert("@context".into(), Json::Object(inner));
                    self.scoped = true;
                }
            }
            ValueType::SubSchemaRef(sub) => {
                if let Some(sub) = self.schema.sub_schema(sub) {
                    let mut inner = Map::new();
                    for field in &sub.fields {
                        let nested: Vec<&Value> = values
                            .iter()
                            .filter_map(|v| match v {
                                Value::Nested(n) => n.fields.get(&field.id),
                                _ => None,
                            })
                            .flatten()
                            .collect();
                        if !nested.is_empty() {
                            let t = self.term(field, &nested);
                            inner.insert(field.id.clone(), t);
                        }
                    }
                    if !inner.is_empty() {
                        obj.insert("@context".into(), Json::Object(inner));
                        self.scoped = true;
                    }
                }
            }
            _ => {}
        }
        if obj.len() == 1 {
            obj.remove("@id").unwrap_or_default()
        } else {
            Json::Object(obj)
        }
    }
}

/// Local parts written as `prefix:local`. Anything else stays a full IRI.
pub(crate) fn is_safe_local(local: &str) -> bool {
    let mut chars = local.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphanumeric() || c == '_')
        && local
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Element keys of a document body. `typed` adds an `@type` naming the
/// sub-schema to every nested object.
pub(crate) fn render_map(
    schema: &SchemaDefinition,
    defs: &[ElementDefinition],
    map: &ValueMap,
    parent: &str,
    typed: bool,
) -> Result<Map<String, Json>, RecordError> {
    if let Some(unknown) = map.keys().find(|k| !defs.iter().any(|d| d.id == *k)) {
        return Err(RecordError::UnknownElement(element_path(parent, unknown)));
    }
    let mut out = Map::new();
    for def in defs {
        let Some(values) = map.get(&def.id) else {
            continue;
        };
        let indexed = def.multi_valued || values.len() > 1;
        let mut rendered = Vec::with_capacity(values.len());
        for (i, v) in values.iter().enumerate() {
            let path = value_path(parent, &def.id, i, indexed);
            rendered.push(render_value(schema, def, v, &path, typed)?);
        }
        let json = if indexed {
            Json::Array(rendered)
        } else {
            rendered.pop().unwrap_or_default()
        };
        out.insert(def.id.clone(), json);
    }
    Ok(out)
}

fn render_value(
    schema: &SchemaDefinition,
    def: &ElementDefinition,
    value: &Value,
    path: &str,
    typed: bool,
) -> Result<Json, RecordError> {
    Ok(match value {
        Value::Text(s) | Value::Iri(s) => Json::String(s.clone()),
        Value::Date(d) => Json::String(d.format("%Y-%m-%d").to_string()),
        Value::Integer(i) => Json::from(*i),
        Value::Number(n) => match serde_json::Number::from_f64(*n) {
            Some(n) => Json::Number(n),
            None => return Err(RecordError::NonFinite(path.to_string())),
        },
        Value::Boolean(b) => Json::Bool(*b),
        Value::Term { label, iri: None } => Json::String(label.clone()),
        Value::Term {
            label,
            iri: Some(iri),
        } => {
            let mut obj = Map::new();
            obj.insert("@id".into(), Json::String(iri.clone()));
            obj.insert("label".into(), Json::String(label.clone()));
            Json::Object(obj)
        }
        Value::Nested(nested) => {
            let sub = nested_shape(schema, def, nested, path)?;
            let mut obj = Map::new();
            if typed {
                obj.insert("@type".into(), Json::String(upper_camel(&sub.id)));
            }
            obj.extend(render_map(schema, &sub.fields, &nested.fields, path, typed)?);
            Json::Object(obj)
        }
    })
}

pub(crate) fn nested_shape<'a>(
    schema: &'a SchemaDefinition,
    def: &ElementDefinition,
    nested: &Nested,
    path: &str,
) -> Result<&'a crate::schema::SubSchema, RecordError> {
    let expected = def.value_type.sub_schema();
    match expected.and_then(|id| schema.sub_schema(id)) {
        Some(sub) if sub.id == nested.schema => Ok(sub),
        _ => Err(RecordError::ShapeMismatch {
            path: path.to_string(),
            expected: expected.unwrap_or(def.value_type.to_string().as_str()).to_string(),
            found: format!("nested `{}`", nested.schema),
        }),
    }
}

/// `softwareApplication` becomes `SoftwareApplication`.
pub(crate) fn upper_camel(id: &str) -> String {
    let mut chars = id.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Reads a record, rejecting keys the schema does not declare.
pub fn from_json(text: &str, schema: &SchemaDefinition) -> Result<MetadataRecord, RecordError> {
    from_json_with(text, schema, Strictness::Strict).map(|p| p.record)
}

/// Reads a record. `@`-keywords are skipped, a single value may stand in for
/// a one-element array, and `null` counts as absent.
pub fn from_json_with(
    text: &str,
    schema: &SchemaDefinition,
    strictness: Strictness,
) -> Result<Parsed, RecordError> {
    let doc: Json = serde_json::from_str(text)?;
    let Json::Object(obj) = doc else {
        return Err(RecordError::Malformed(format!(
            "expected a JSON object, found {}",
            json_kind(&doc)
        )));
    };
    let mut reader = Reader {
        schema,
        strictness,
        unknowns: Vec::new(),
    };
    let values = reader.read_map(&schema.elements, &obj, "")?;
    Ok(Parsed {
        record: MetadataRecord {
            schema_id: schema.id.clone(),
            values,
        },
        unknowns: reader.unknowns,
    })
}

struct Reader<'a> {
    schema: &'a SchemaDefinition,
    strictness: Strictness,
    unknowns: Vec<UnknownField>,
}

impl Reader<'_> {
    fn read_map(
        &mut self,
        defs: &[ElementDefinition],
        obj: &Map<String, Json>,
        parent: &str,
    ) -> Result<ValueMap, RecordError> {
        let mut map = ValueMap::new();
        for (key, raw) in obj {
            if key.starts_with('@') {
                continue;
            }
            let Some(def) = defs.iter().find(|d| d.id == *key) else {
                let path = element_path(parent, key);
                match self.strictness {
                    Strictness::Strict => return Err(RecordError::UnknownElement(path)),
                    Strictness::Lax => {
                        self.unknowns.push(UnknownField {
                            path,
                            value: raw.clone(),
                        });
                        continue;
                    }
                }
            };
            let items: Vec<&Json> = match raw {
                Json::Array(items) => items.iter().filter(|v| !v.is_null()).collect(),
                Json::Null => Vec::new(),
                other => vec![other],
            };
            let indexed = def.multi_valued || items.len() > 1;
            let mut values = Vec::with_capacity(items.len());
            for (i, item) in items.into_iter().enumerate() {
                let path = value_path(parent, key, i, indexed);
                values.push(self.read_value(def, item, &path)?);
            }
            map.insert(key.clone(), values);
        }
        Ok(map)
    }

    fn read_value(
        &mut self,
        def: &ElementDefinition,
        raw: &Json,
        path: &str,
    ) -> Result<Value, RecordError> {
        let mismatch = || RecordError::TypeMismatch {
            path: path.to_string(),
            expected: def.value_type.to_string(),
            found: describe(raw),
        };
        Ok(match (&def.value_type, raw) {
            (ValueType::Text, Json::String(s)) => Value::Text(s.clone()),
            (ValueType::Iri, Json::String(s)) => Value::Iri(s.clone()),
            (ValueType::Date, Json::String(s)) => Value::Date(parse_date(s).ok_or_else(mismatch)?),
            (ValueType::Integer, Json::Number(n)) => Value::Integer(n.as_i64().ok_or_else(mismatch)?),
            (ValueType::Number, Json::Number(n)) => Value::Number(n.as_f64().ok_or_else(mismatch)?),
            (ValueType::Boolean, Json::Bool(b)) => Value::Boolean(*b),
            (ValueType::VocabularyTerm, Json::String(s)) => Value::Term {
                label: s.clone(),
                iri: None,
            },
            (ValueType::VocabularyTerm, Json::Object(obj)) => {
                let iri = obj.get("@id").and_then(Json::as_str).ok_or_else(mismatch)?;
                let label = obj.get("label").and_then(Json::as_str).ok_or_else(mismatch)?;
                Value::Term {
                    label: label.to_string(),
                    iri: Some(iri.to_string()),
                }
            }
            (ValueType::SubSchemaRef(id), Json::Object(obj)) => {
                let sub = self.schema.sub_schema(id).ok_or_else(mismatch)?;
                Value::Nested(Nested {
                    schema: sub.id.clone(),
                    fields: self.read_map(&sub.fields, obj, path)?,
                })
            }
            _ => return Err(mismatch()),
        })
    }
}

/// Strict `YYYY-MM-DD` calendar date.
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let b = s.as_bytes();
    if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
        return None;
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()
}

fn json_kind(v: &Json) -> &'static str {
    match v {
        Json::Null => "null",
        Json::Bool(_) => "boolean",
        Json::Number(_) => "number",
        Json::String(_) => "string",
        Json::Array(_) => "array",
        Json::Object(_) => "object",
    }
}

fn describe(v: &Json) -> String {
    match v {
        Json::String(s) if s.chars().count() <= 40 => format!("string {s:?}"),
        Json::Number(n) => format!("number {n}"),
        other => json_kind(other).to_string(),
    }
}
