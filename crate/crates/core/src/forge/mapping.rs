use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use super::fetch::RawForgeData;
use super::url::Forge;
use crate::record::{parse_date, MetadataRecord, Nested, Value};
use crate::schema::{resolve_term, ElementDefinition, SchemaDefinition, ValueType};
use crate::validate::is_absolute_iri;

/// Which API fields feed which schema element, per forge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForgeMapping {
    pub github: Vec<MappingEntry>,
    pub gitlab: Vec<MappingEntry>,
}

impl ForgeMapping {
    pub fn entries(&self, forge: Forge) -> &[MappingEntry] {
        match forge {
            Forge::Github => &self.github,
            Forge::Gitlab => &self.gitlab,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MappingEntry {
    pub element: String,
    /// Dotted paths into the raw data; the first one present wins.
    pub from: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ignore: Vec<String>,
    /// For person elements: the full-name field first, then fallbacks.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub name_fields: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclude: Option<Exclude>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exclude {
    pub field: String,
    pub equals: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SkippedField {
    pub api_field: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtractionReport {
    /// Element id to the API field it was taken from.
    pub extracted: IndexMap<String, String>,
    pub skipped: Vec<SkippedField>,
    pub notes: Vec<String>,
}

impl ExtractionReport {
    pub fn to_json_string(&self) -> String {
        crate::validate::pretty(self)
    }
}

/// Maps raw API data with the bundled field mapping.
pub fn map_to_record(raw: &RawForgeData, schema: &SchemaDefinition) -> (MetadataRecord, ExtractionReport) {
    map_to_record_with(raw, schema, &crate::bundled::forge_mapping())
}

pub fn map_to_record_with(
    raw: &RawForgeData,
    schema: &SchemaDefinition,
    mapping: &ForgeMapping,
) -> (MetadataRecord, ExtractionReport) {
    let root = serde_json::to_value(raw).expect("raw forge data serializes");
    let mut record = MetadataRecord::new(&schema.id);
    let mut report = ExtractionReport {
        notes: raw.notes.clone(),
        ..Default::default()
    };
    for entry in mapping.entries(raw.forge) {
        let Some(def) = schema.element(&entry.element) else {
            report
                .notes
                .push(format!("mapping targets `{}`, which the schema does not declare", entry.element));
            continue;
        };
        let mut first_problem: Option<SkippedField> = None;
        let mut chosen = None;
        for path in &entry.from {
            match lookup(&root, path) {
                Lookup::Found(v) => {
                    let (values, problem) = convert(v, def, entry, schema);
                    if !values.is_empty() {
                        chosen = Some((path, values));
                        break;
                    }
                    first_problem.get_or_insert(SkippedField {
                        api_field: path.clone(),
                        reason: problem.unwrap_or_else(|| "empty".to_string()),
                    });
                }
                Lookup::Missing(at, reason) => {
                    first_problem.get_or_insert(SkippedField {
                        api_field: at,
                        reason: reason.to_string(),
                    });
                }
            }
        }
        match chosen {
            Some((path, mut values)) => {
                if !def.multi_valued {
                    values.truncate(1);
                }
                record.values.insert(def.id.clone(), values);
                report.extracted.insert(def.id.clone(), path.clone());
            }
            None => {
                if let Some(p) = first_problem {
                    if !report.skipped.contains(&p) {
                        report.skipped.push(p);
                    }
                }
            }
        }
    }
    (record, report)
}

enum Lookup<'a> {
    Found(&'a Json),
    /// The deepest path prefix that was absent, and why.
    Missing(String, &'static str),
}

fn lookup<'a>(root: &'a Json, path: &str) -> Lookup<'a> {
    let mut cur = root;
    let mut seen = Vec::new();
    for (i, seg) in path.split('.').enumerate() {
        seen.push(seg);
        match cur.get(seg) {
            Some(Json::Null) | None if i == 0 => return Lookup::Missing(seg.to_string(), "absent"),
            Some(Json::Null) => return Lookup::Missing(seen.join("."), "null"),
            None => return Lookup::Missing(seen.join("."), "absent"),
            Some(v) => cur = v,
        }
    }
    Lookup::Found(cur)
}

fn convert(
    v: &Json,
    def: &ElementDefinition,
    entry: &MappingEntry,
    schema: &SchemaDefinition,
) -> (Vec<Value>, Option<String>) {
    let items: Vec<&Json> = match v {
        Json::Array(a) => a.iter().collect(),
        other => vec![other],
    };
    let mut out = Vec::new();
    let mut problem = None;
    for item in items {
        match convert_one(item, def, entry, schema) {
            Ok(Some(value)) => out.push(value),
            Ok(None) => {}
            Err(p) => {
                problem.get_or_insert(p);
            }
        }
    }
    (out, problem)
}

fn convert_one(
    item: &Json,
    def: &ElementDefinition,
    entry: &MappingEntry,
    schema: &SchemaDefinition,
) -> Result<Option<Value>, String> {
    if let ValueType::SubSchemaRef(sub) = &def.value_type {
        return person(item, sub, entry);
    }
    let s = match item {
        Json::String(s) => s.trim().to_string(),
        Json::Number(n) => n.to_string(),
        Json::Bool(b) => b.to_string(),
        Json::Null => return Ok(None),
        _ => return Err("not a scalar".to_string()),
    };
    if s.is_empty() || entry.ignore.contains(&s) {
        return Ok(None);
    }
    match &def.value_type {
        ValueType::Text => Ok(Some(Value::Text(s))),
        ValueType::Iri if is_absolute_iri(&s) => Ok(Some(Value::Iri(s))),
        ValueType::Iri => Err(format!("`{s}` is not an absolute IRI")),
        ValueType::Date => s
            .get(..10)
            .and_then(parse_date)
            .map(|d| Some(Value::Date(d)))
            .ok_or_else(|| format!("`{s}` is not a date")),
        ValueType::Integer => s
            .parse()
            .map(|i| Some(Value::Integer(i)))
            .map_err(|_| format!("`{s}` is not an integer")),
        ValueType::Number => s
            .parse::<f64>()
            .ok()
            .filter(|n| n.is_finite())
            .map(|n| Some(Value::Number(n)))
            .ok_or_else(|| format!("`{s}` is not a number")),
        ValueType::Boolean => s
            .parse()
            .map(|b| Some(Value::Boolean(b)))
            .map_err(|_| format!("`{s}` is not a boolean")),
        ValueType::VocabularyTerm => {
            let vocab = def
                .vocabulary_ref
                .as_deref()
                .and_then(|r| schema.vocabulary(r))
                .ok_or_else(|| "element has no vocabulary".to_string())?;
            resolve_term(vocab, &s)
                .map(|t| {
                    Some(Value::Term {
                        label: t.label.clone(),
                        iri: t.iri.clone(),
                    })
                })
                .ok_or_else(|| format!("`{s}` is not in vocabulary `{}`", vocab.id))
        }
        ValueType::SubSchemaRef(_) => unreachable!("handled above"),
    }
}

fn person(item: &Json, sub: &str, entry: &MappingEntry) -> Result<Option<Value>, String> {
    let Json::Object(obj) = item else {
        return Err("not an object".to_string());
    };
    if let Some(ex) = &entry.exclude {
        if obj.get(&ex.field).and_then(Json::as_str) == Some(ex.equals.as_str()) {
            return Ok(None);
        }
    }
    let named = entry.name_fields.iter().enumerate().find_map(|(i, f)| {
        let s = obj.get(f)?.as_str()?.trim();
        (!s.is_empty()).then_some((i, s))
    });
    let Some((i, name)) = named else {
        return Err("no name".to_string());
    };
    let mut nested = Nested::new(sub);
    if i == 0 {
        match name.rsplit_once(char::is_whitespace) {
            Some((given, family)) => {
                nested.fields.push("givenName", Value::text(given.trim()));
                nested.fields.push("familyName", Value::text(family));
            }
            None => nested.fields.push("familyName", Value::text(name)),
        }
    } else {
        nested.fields.push("familyName", Value::text(name));
    }
    Ok(Some(Value::Nested(nested)))
}
