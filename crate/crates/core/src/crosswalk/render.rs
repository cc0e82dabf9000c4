use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{Map, Value as Json};

use crate::record::{to_json, MetadataRecord, RecordError, Value, ValueMap};
use crate::schema::{ElementDefinition, SchemaDefinition};

pub const CODEMETA_CONTEXT: &str = "https://w3id.org/codemeta/3.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetFormat {
    CodemetaJson,
    CffYamlLike,
    /// The canonical JSON record layout of the crosswalk's target schema.
    Ersmeta,
}

impl TargetFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetFormat::CodemetaJson => "codemeta-json",
            TargetFormat::CffYamlLike => "cff-yaml-like",
            TargetFormat::Ersmeta => "ersmeta",
        }
    }

    pub(crate) fn accepts(self, target_schema: &str) -> bool {
        match self {
            TargetFormat::CodemetaJson => target_schema == "codemeta",
            TargetFormat::CffYamlLike => target_schema == "cff",
            TargetFormat::Ersmeta => true,
        }
    }

    pub(crate) fn render(
        self,
        record: &MetadataRecord,
        schema: &SchemaDefinition,
    ) -> Result<String, RecordError> {
        match self {
            TargetFormat::CodemetaJson => render_codemeta(record, schema),
            TargetFormat::CffYamlLike => render_cff(record, schema),
            TargetFormat::Ersmeta => to_json(record, schema),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown target format `{0}`")]
pub struct UnknownFormat(pub String);

impl FromStr for TargetFormat {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "codemeta-json" | "codemeta" => Ok(TargetFormat::CodemetaJson),
            "cff-yaml-like" | "cff" => Ok(TargetFormat::CffYamlLike),
            "ersmeta" => Ok(TargetFormat::Ersmeta),
            other => Err(UnknownFormat(other.to_string())),
        }
    }
}

/// CodeMeta 3 JSON-LD: the published context by URL, a `SoftwareSourceCode`
/// type, and `@type` on every nested object.
pub fn render_codemeta(record: &MetadataRecord, schema: &SchemaDefinition) -> Result<String, RecordError> {
    let body = crate::record::render_body(schema, &record.values, true)?;
    let mut doc = Map::new();
    doc.insert("@context".into(), Json::from(CODEMETA_CONTEXT));
    doc.insert("@type".into(), Json::from("SoftwareSourceCode"));
    doc.extend(body);
    let mut out = serde_json::to_string_pretty(&Json::Object(doc))?;
    out.push('\n');
    Ok(out)
}

/// CITATION.cff layout: keys in schema order, two-space indents, block
/// sequences, and double quotes wherever a plain scalar would be misread.
pub fn render_cff(record: &MetadataRecord, schema: &SchemaDefinition) -> Result<String, RecordError> {
    if let Some(k) = record.values.keys().find(|k| schema.element(k).is_none()) {
        return Err(RecordError::UnknownElement(k.to_string()));
    }
    let mut out = String::new();
    write_map(&mut out, schema, &schema.elements, &record.values, 0, None)?;
    Ok(out)
}

fn write_map(
    out: &mut String,
    schema: &SchemaDefinition,
    defs: &[ElementDefinition],
    map: &ValueMap,
    indent: usize,
    first_prefix: Option<&str>,
) -> Result<(), RecordError> {
    let pad = " ".repeat(indent);
    let mut first = true;
    for def in defs {
        let Some(values) = map.get(&def.id) else {
            continue;
        };
        let lead = match (first, first_prefix) {
            (true, Some(p)) => p.to_string(),
            _ => pad.clone(),
        };
        first = false;
        let list = def.multi_valued || values.len() > 1;
        if list {
            let _ = writeln!(out, "{lead}{}:", def.id);
            for v in values {
                write_item(out, schema, def, v, indent + 2)?;
            }
        } else {
            match &values[0] {
                Value::Nested(n) => {
                    if n.fields.is_empty() {
                        let _ = writeln!(out, "{lead}{}: {{}}", def.id);
                    } else {
                        let _ = writeln!(out, "{lead}{}:", def.id);
                        let sub = nested_defs(schema, def, &n.schema, &def.id)?;
                        write_map(out, schema, sub, &n.fields, indent + 2, None)?;
                    }
                }
                v => {
                    let _ = writeln!(out, "{lead}{}: {}", def.id, scalar(v, &def.id)?);
                }
            }
        }
    }
    Ok(())
}

fn write_item(
    out: &mut String,
    schema: &SchemaDefinition,
    def: &ElementDefinition,
    value: &Value,
    indent: usize,
) -> Result<(), RecordError> {
    let pad = " ".repeat(indent);
    match value {
        Value::Nested(n) if n.fields.is_empty() => {
            let _ = writeln!(out, "{pad}- {{}}");
        }
        Value::Nested(n) => {
            let sub = nested_defs(schema, def, &n.schema, &def.id)?;
            write_map(out, schema, sub, &n.fields, indent + 2, Some(&format!("{pad}- ")))?;
        }
        v => {
            let _ = writeln!(out, "{pad}- {}", scalar(v, &def.id)?);
        }
    }
    Ok(())
}

fn nested_defs<'a>(
    schema: &'a SchemaDefinition,
    def: &ElementDefinition,
    found: &str,
    path: &str,
) -> Result<&'a [ElementDefinition], RecordError> {
    let expected = def.value_type.sub_schema().unwrap_or_default();
    match schema.sub_schema(expected) {
        Some(sub) if sub.id == found => Ok(&sub.fields),
        _ => Err(RecordError::ShapeMismatch {
            path: path.to_string(),
            expected: expected.to_string(),
            found: format!("nested `{found}`"),
        }),
    }
}

fn scalar(v: &Value, path: &str) -> Result<String, RecordError> {
    Ok(match v {
        Value::Text(s) | Value::Iri(s) => yaml_string(s),
        Value::Term { label, .. } => yaml_string(label),
        Value::Date(d) => d.format("%Y-%m-%d").to_string(),
        Value::Integer(i) => i.to_string(),
        Value::Number(n) if n.is_finite() => format!("{n:?}"),
        Value::Number(_) => return Err(RecordError::NonFinite(path.to_string())),
        Value::Boolean(b) => b.to_string(),
        Value::Nested(_) => unreachable!("nested values are written as maps"),
    })
}

/// Plain when unambiguous, otherwise a double-quoted scalar with escapes.
pub(crate) fn yaml_string(s: &str) -> String {
    let reserved = matches!(
        s.to_ascii_lowercase().as_str(),
        "true" | "false" | "yes" | "no" | "on" | "off" | "null" | "~" | "y" | "n"
    );
    let numeric = s.parse::<f64>().is_ok() || crate::record::parse_date(s).is_some();
    let plain = !s.is_empty()
        && !reserved
        && !numeric
        && s.chars().next().is_some_and(|c| c.is_alphanumeric() || c == '/' || c == '_')
        && !s.ends_with(' ')
        && !s.contains(": ")
        && !s.contains(" #")
        && !s.ends_with(':')
        && s.chars().all(|c| {
            !c.is_control() && !matches!(c, '"' | '\'' | '{' | '}' | '[' | ']' | ',' | '`' | '\\')
        });
    if plain {
        s.to_string()
    } else {
        serde_json::to_string(s).expect("string serializes")
    }
}
