use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::render::TargetFormat;
use super::{same_id_map, Compiled, Crosswalk};
use crate::record::{value_path, MetadataRecord, Nested, RecordError, Value, ValueMap};
use crate::schema::{resolve_term, ElementDefinition, SchemaDefinition, ValueType};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MappedPair {
    pub source_path: String,
    pub target_path: String,
}

/// A source value that did not make it into the target unchanged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LossyValue {
    pub path: String,
    pub reason: String,
}

/// Every filled source element is either in `mapped` or in `dropped`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConversionReport {
    pub mapped: Vec<MappedPair>,
    pub dropped: Vec<String>,
    pub synthesized: Vec<String>,
    pub lossy: Vec<LossyValue>,
}

impl ConversionReport {
    pub fn to_json_string(&self) -> String {
        crate::validate::pretty(self)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConvertError {
    #[error("record belongs to schema `{found}`, the crosswalk reads `{expected}`")]
    SchemaMismatch { expected: String, found: String },
    #[error("format `{format}` cannot hold `{target}` records")]
    FormatMismatch { format: String, target: String },
    #[error(transparent)]
    Record(#[from] RecordError),
}

/// Converts and renders in one step.
pub fn convert(
    record: &MetadataRecord,
    crosswalk: &Crosswalk,
    format: TargetFormat,
) -> Result<(String, ConversionReport), ConvertError> {
    if !format.accepts(crosswalk.target_schema_id()) {
        return Err(ConvertError::FormatMismatch {
            format: format.as_str().to_string(),
            target: crosswalk.target_schema_id().to_string(),
        });
    }
    let (converted, report) = convert_record(record, crosswalk)?;
    let text = format.render(&converted, crosswalk.target())?;
    Ok((text, report))
}

/// Applies the crosswalk rules, producing a record of the target schema.
pub fn convert_record(
    record: &MetadataRecord,
    crosswalk: &Crosswalk,
) -> Result<(MetadataRecord, ConversionReport), ConvertError> {
    if record.schema_id != crosswalk.source_schema_id() {
        return Err(ConvertError::SchemaMismatch {
            expected: crosswalk.source_schema_id().to_string(),
            found: record.schema_id.clone(),
        });
    }
    let source = crosswalk.source();
    let mut out = MetadataRecord::new(crosswalk.target_schema_id());
    let mut report = ConversionReport::default();
    let mut c = Converter {
        crosswalk,
        lossy: Vec::new(),
    };

    let declared = source.elements.iter().map(|e| e.id.as_str());
    let extra = record.values.keys().filter(|k| source.element(k).is_none());
    for id in declared.chain(extra) {
        let Some(values) = record.values.get(id) else {
            continue;
        };
        let applied = match (crosswalk.rule_for_source(id), source.element(id)) {
            (Some((rule, compiled)), Some(def)) => {
                let t = crosswalk
                    .target()
                    .element(&rule.target_path)
                    .expect("target checked at load");
                let produced = c.apply(compiled, def, t, values);
                (!produced.is_empty()).then(|| (rule.target_path.clone(), produced))
            }
            _ => None,
        };
        match applied {
            Some((target, values)) => {
                report.mapped.push(MappedPair {
                    source_path: id.to_string(),
                    target_path: target.clone(),
                });
                out.values.insert(target, values);
            }
            None => report.dropped.push(id.to_string()),
        }
    }
    for (rule, compiled) in crosswalk.compiled() {
        if let Compiled::Constant(value) = compiled {
            out.values.insert(rule.target_path.clone(), vec![value.clone()]);
            report.synthesized.push(rule.target_path.clone());
        }
    }
    report.lossy = c.lossy;
    Ok((out, report))
}

struct Converter<'a> {
    crosswalk: &'a Crosswalk,
    lossy: Vec<LossyValue>,
}

impl Converter<'_> {
    fn lose(&mut self, path: String, reason: impl Into<String>) {
        self.lossy.push(LossyValue {
            path,
            reason: reason.into(),
        });
    }

    fn apply(
        &mut self,
        compiled: &Compiled,
        s: &ElementDefinition,
        t: &ElementDefinition,
        values: &[Value],
    ) -> Vec<Value> {
        let indexed = s.multi_valued || values.len() > 1;
        let paths: Vec<String> = (0..values.len())
            .map(|i| value_path("", &s.id, i, indexed))
            .collect();
        let produced: Vec<(String, Value)> = match compiled {
            Compiled::Direct { fields } => values
                .iter()
                .zip(&paths)
                .filter_map(|(v, p)| {
                    let out = self.direct(s, t, Some(fields), v, p, 0);
                    out.map(|o| (p.clone(), o))
                })
                .collect(),
            Compiled::PersonSplit { given, family } => values
                .iter()
                .zip(&paths)
                .filter_map(|(v, p)| {
                    let out = self.person_split(t, given, family, v, p);
                    out.map(|o| (p.clone(), o))
                })
                .collect(),
            Compiled::PersonJoin { given, family } => values
                .iter()
                .zip(&paths)
                .filter_map(|(v, p)| {
                    let out = self.person_join(given, family, v, p);
                    out.map(|o| (p.clone(), o))
                })
                .collect(),
            Compiled::ListJoin { separator } => {
                let mut parts = Vec::new();
                for (v, p) in values.iter().zip(&paths) {
                    match as_text(v) {
                        Some(s) => parts.push(s),
                        None => self.lose(p.clone(), format!("a {} value cannot be joined as text", v.kind())),
                    }
                }
                if parts.is_empty() {
                    Vec::new()
                } else {
                    vec![(paths[0].clone(), Value::Text(parts.join(separator)))]
                }
            }
            Compiled::Constant(_) => Vec::new(),
        };
        self.cardinality(t, produced)
    }

    fn cardinality(&mut self, t: &ElementDefinition, produced: Vec<(String, Value)>) -> Vec<Value> {
        let mut out = Vec::with_capacity(produced.len());
        for (path, v) in produced {
            if !t.multi_valued && !out.is_empty() {
                self.lose(path, format!("`{}` takes a single value", t.id));
            } else {
                out.push(v);
            }
        }
        out
    }

    fn direct(
        &mut self,
        s: &ElementDefinition,
        t: &ElementDefinition,
        fields: Option<&BTreeMap<String, String>>,
        value: &Value,
        path: &str,
        depth: usize,
    ) -> Option<Value> {
        let source = self.crosswalk.source();
        let target = self.crosswalk.target();
        if let ValueType::SubSchemaRef(tid) = &t.value_type {
            let (Value::Nested(n), Some(ss), Some(ts)) = (
                value,
                s.value_type.sub_schema().and_then(|id| source.sub_schema(id)),
                target.sub_schema(tid),
            ) else {
                self.lose(path.to_string(), format!("a {} value has no `{tid}` shape", value.kind()));
                return None;
            };
            if n.schema != ss.id || depth > source.sub_schemas.len() {
                self.lose(path.to_string(), format!("nested `{}` does not match `{}`", n.schema, ss.id));
                return None;
            }
            let identity;
            let map = match fields {
                Some(f) => f,
                None => {
                    identity = same_id_map(ss, ts);
                    &identity
                }
            };
            let mut out = ValueMap::new();
            for (sf, vals) in n.fields.iter() {
                let indexed_s = ss.field(sf).is_some_and(|d| d.multi_valued) || vals.len() > 1;
                let sub_paths: Vec<String> = (0..vals.len())
                    .map(|i| value_path(path, sf, i, indexed_s))
                    .collect();
                let (Some(sdef), Some(tdef)) = (
                    ss.field(sf),
                    map.get(sf).and_then(|tf| ts.field(tf)),
                ) else {
                    for p in sub_paths {
                        self.lose(p, format!("`{}` has no counterpart for `{sf}`", ts.id));
                    }
                    continue;
                };
                let produced: Vec<(String, Value)> = vals
                    .iter()
                    .zip(&sub_paths)
                    .filter_map(|(v, p)| {
                        self.direct(sdef, tdef, None, v, p, depth + 1)
                            .map(|o| (p.clone(), o))
                    })
                    .collect();
                let kept = self.cardinality(tdef, produced);
                out.insert(tdef.id.clone(), kept);
            }
            if out.is_empty() && !n.fields.is_empty() {
                return None;
            }
            return Some(Value::Nested(Nested {
                schema: ts.id.clone(),
                fields: out,
            }));
        }
        match coerce_scalar(target, t, value) {
            Some(v) => Some(v),
            None => {
                self.lose(
                    path.to_string(),
                    format!("a {} value cannot be represented as {}", value.kind(), t.value_type),
                );
                None
            }
        }
    }

    fn person_split(
        &mut self,
        t: &ElementDefinition,
        given: &str,
        family: &str,
        value: &Value,
        path: &str,
    ) -> Option<Value> {
        let sub = t.value_type.sub_schema().unwrap_or_default();
        let name = as_text(value).map(|s| s.trim().to_string()).unwrap_or_default();
        if name.is_empty() {
            self.lose(path.to_string(), "no name to split");
            return None;
        }
        let mut nested = Nested::new(sub);
        match name.rsplit_once(char::is_whitespace) {
            Some((g, f)) => {
                nested.fields.push(given, Value::Text(g.trim_end().to_string()));
                nested.fields.push(family, Value::Text(f.to_string()));
            }
            None => nested.fields.push(family, Value::Text(name)),
        }
        Some(Value::Nested(nested))
    }

    fn person_join(&mut self, given: &str, family: &str, value: &Value, path: &str) -> Option<Value> {
        let Value::Nested(n) = value else {
            self.lose(path.to_string(), format!("a {} value is not a person", value.kind()));
            return None;
        };
        for (f, _) in n.fields.iter() {
            if f != given && f != family {
                self.lose(format!("{path}.{f}"), "only the name is kept");
            }
        }
        let first = |f: &str| n.fields.get(f).and_then(|v| v.first()).and_then(as_text);
        let parts: Vec<String> = [first(given), first(family)].into_iter().flatten().collect();
        if parts.is_empty() {
            self.lose(path.to_string(), "person has no name");
            return None;
        }
        Some(Value::Text(parts.join(" ")))
    }
}

/// String form of a scalar value.
fn as_text(v: &Value) -> Option<String> {
    Some(match v {
        Value::Text(s) | Value::Iri(s) => s.clone(),
        Value::Term { label, .. } => label.clone(),
        Value::Date(d) => d.format("%Y-%m-%d").to_string(),
        Value::Integer(i) => i.to_string(),
        Value::Number(n) => n.to_string(),
        Value::Boolean(b) => b.to_string(),
        Value::Nested(_) => return None,
    })
}

/// Converts a scalar to the type of `t`, or `None` when it has no faithful
/// representation there.
pub(crate) fn coerce_scalar(
    schema: &SchemaDefinition,
    t: &ElementDefinition,
    v: &Value,
) -> Option<Value> {
    use crate::validate::is_absolute_iri;
    Some(match (&t.value_type, v) {
        (ValueType::Text, v) => Value::Text(as_text(v)?),
        (ValueType::Iri, Value::Iri(s) | Value::Text(s)) if is_absolute_iri(s) => Value::Iri(s.clone()),
        (ValueType::Iri, Value::Term { iri: Some(iri), .. }) => Value::Iri(iri.clone()),
        (ValueType::Date, Value::Date(d)) => Value::Date(*d),
        (ValueType::Date, Value::Text(s)) => Value::Date(crate::record::parse_date(s)?),
        (ValueType::Integer, Value::Integer(i)) => Value::Integer(*i),
        (ValueType::Integer, Value::Text(s)) => Value::Integer(s.trim().parse().ok()?),
        (ValueType::Number, Value::Number(n)) => Value::Number(*n),
        (ValueType::Number, Value::Integer(i)) => Value::Number(*i as f64),
        (ValueType::Number, Value::Text(s)) => {
            Value::Number(s.trim().parse().ok().filter(|n: &f64| n.is_finite())?)
        }
        (ValueType::Boolean, Value::Boolean(b)) => Value::Boolean(*b),
        (ValueType::Boolean, Value::Text(s)) => Value::Boolean(s.trim().parse().ok()?),
        (ValueType::VocabularyTerm, v) => {
            let vocab = schema.vocabulary(t.vocabulary_ref.as_deref()?)?;
            let (term, keep_iri) = match v {
                Value::Term { iri: Some(iri), .. } => (resolve_term(vocab, iri)?, true),
                Value::Term { label, iri: None } => (resolve_term(vocab, label)?, false),
                Value::Text(s) => (resolve_term(vocab, s)?, false),
                Value::Iri(s) => (resolve_term(vocab, s)?, true),
                _ => return None,
            };
            Value::Term {
                label: term.label.clone(),
                iri: if keep_iri { term.iri.clone() } else { None },
            }
        }
        _ => return None,
    })
}
