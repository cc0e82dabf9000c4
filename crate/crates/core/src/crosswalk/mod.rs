//! Declarative conversion of records between schemas.

mod convert;
mod render;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::record::Value;
use crate::schema::{ElementDefinition, SchemaDefinition, SchemaSet, ValueType};

pub use convert::{convert, convert_record, ConversionReport, ConvertError, LossyValue, MappedPair};
pub use render::{render_cff, render_codemeta, TargetFormat, UnknownFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Transform {
    Identity,
    Rename,
    PersonSplit,
    PersonJoin,
    ListJoin,
    Constant,
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Transform::Identity => "identity",
            Transform::Rename => "rename",
            Transform::PersonSplit => "personSplit",
            Transform::PersonJoin => "personJoin",
            Transform::ListJoin => "listJoin",
            Transform::Constant => "constant",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MappingRule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_path: Option<String>,
    pub target_path: String,
    pub transform: Transform,
    /// identity/rename: nested field map; personSplit/personJoin: the given
    /// and family field names; listJoin: separator; constant: the value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arg: Option<serde_json::Value>,
}

impl MappingRule {
    fn describe(&self) -> String {
        match &self.source_path {
            Some(s) => format!("{s} -> {} ({})", self.target_path, self.transform),
            None => format!("-> {} ({})", self.target_path, self.transform),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CrosswalkDocument {
    source: String,
    target: String,
    #[serde(default)]
    rules: Vec<MappingRule>,
}

#[derive(Debug, thiserror::Error)]
pub enum CrosswalkError {
    #[error("malformed crosswalk document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("crosswalk refers to unknown schema `{0}`")]
    UnknownSchema(String),
    #[error("invalid crosswalk: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<RuleIssue>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleIssue {
    pub rule: usize,
    pub description: String,
    pub problem: String,
}

impl fmt::Display for RuleIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {} [{}]: {}", self.rule, self.description, self.problem)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Compiled {
    /// Copy values, coercing to the target type. `fields` maps nested
    /// source fields to target fields when both sides are sub-schemas.
    Direct { fields: BTreeMap<String, String> },
    PersonSplit { given: String, family: String },
    PersonJoin { given: String, family: String },
    ListJoin { separator: String },
    Constant(Value),
}

#[derive(Debug, Clone)]
pub struct Crosswalk {
    source: Arc<SchemaDefinition>,
    target: Arc<SchemaDefinition>,
    rules: Vec<MappingRule>,
    compiled: Vec<Compiled>,
}

/// Loads a mapping file, resolving both schemas from `schemas` and checking
/// every rule against them.
pub fn load_crosswalk(document: &str, schemas: &SchemaSet) -> Result<Crosswalk, CrosswalkError> {
    let doc: CrosswalkDocument = serde_json::from_str(document)?;
    let source = schemas
        .get(&doc.source)
        .cloned()
        .ok_or_else(|| CrosswalkError::UnknownSchema(doc.source.clone()))?;
    let target = schemas
        .get(&doc.target)
        .cloned()
        .ok_or_else(|| CrosswalkError::UnknownSchema(doc.target.clone()))?;
    Crosswalk::new(source, target, doc.rules)
}

impl Crosswalk {
    pub fn new(
        source: Arc<SchemaDefinition>,
        target: Arc<SchemaDefinition>,
        rules: Vec<MappingRule>,
    ) -> Result<Self, CrosswalkError> {
        let mut issues = Vec::new();
        let mut compiled = Vec::with_capacity(rules.len());
        let mut sources = HashSet::new();
        let mut targets = HashSet::new();
        for (i, rule) in rules.iter().enumerate() {
            let mut problems = Vec::new();
            if let Some(s) = &rule.source_path {
                if !sources.insert(s.as_str()) {
                    problems.push(format!("source `{s}` already has a rule"));
                }
            }
            if !targets.insert(rule.target_path.as_str()) {
                problems.push(format!("target `{}` already has a rule", rule.target_path));
            }
            match compile(&source, &target, rule) {
                Ok(c) if problems.is_empty() => compiled.push(c),
                Ok(_) => {}
                Err(p) => problems.push(p),
            }
            issues.extend(problems.into_iter().map(|problem| RuleIssue {
                rule: i,
                description: rule.describe(),
                problem,
            }));
        }
        if !issues.is_empty() {
            return Err(CrosswalkError::Invalid(issues));
        }
        Ok(Crosswalk {
            source,
            target,
            rules,
            compiled,
        })
    }

    pub fn source(&self) -> &Arc<SchemaDefinition> {
        &self.source
    }

    pub fn target(&self) -> &Arc<SchemaDefinition> {
        &self.target
    }

    pub fn source_schema_id(&self) -> &str {
        &self.source.id
    }

    pub fn target_schema_id(&self) -> &str {
        &self.target.id
    }

    pub fn rules(&self) -> &[MappingRule] {
        &self.rules
    }

    pub(crate) fn compiled(&self) -> impl Iterator<Item = (&MappingRule, &Compiled)> {
        self.rules.iter().zip(&self.compiled)
    }

    pub(crate) fn rule_for_source(&self, id: &str) -> Option<(&MappingRule, &Compiled)> {
        self.compiled()
            .find(|(r, _)| r.source_path.as_deref() == Some(id))
    }

    /// The reverse direction of every invertible rule. Constants and list
    /// joins have no inverse and are left out.
    pub fn inverse(&self) -> Crosswalk {
        let mut rules = Vec::new();
        for (rule, compiled) in self.compiled() {
            let Some(source) = &rule.source_path else {
                continue;
            };
            let (transform, arg) = match compiled {
                Compiled::Direct { fields } => {
                    let arg = rule.arg.as_ref().map(|_| {
                        serde_json::Value::Object(
                            fields
                                .iter()
                                .map(|(s, t)| (t.clone(), serde_json::Value::String(s.clone())))
                                .collect(),
                        )
                    });
                    (rule.transform, arg)
                }
                Compiled::PersonSplit { .. } => (Transform::PersonJoin, rule.arg.clone()),
                Compiled::PersonJoin { .. } => (Transform::PersonSplit, rule.arg.clone()),
                Compiled::ListJoin { .. } | Compiled::Constant(_) => continue,
            };
            rules.push(MappingRule {
                source_path: Some(rule.target_path.clone()),
                target_path: source.clone(),
                transform,
                arg,
            });
        }
        Crosswalk::new(self.target.clone(), self.source.clone(), rules)
            .expect("inverse of a valid crosswalk is valid")
    }

    /// Source elements whose rule converts values without loss in both
    /// directions: identity or rename between identically typed elements of
    /// equal cardinality, with nested fields mapped one-to-one.
    pub fn bidirectional_core(&self) -> Vec<&str> {
        self.compiled()
            .filter_map(|(rule, compiled)| {
                let Compiled::Direct { fields } = compiled else {
                    return None;
                };
                let s = self.source.element(rule.source_path.as_deref()?)?;
                let t = self.target.element(&rule.target_path)?;
                equivalent(&self.source, s, &self.target, t, Some(fields), 0)
                    .then_some(s.id.as_str())
            })
            .collect()
    }
}

fn equivalent(
    ss: &SchemaDefinition,
    s: &ElementDefinition,
    ts: &SchemaDefinition,
    t: &ElementDefinition,
    fields: Option<&BTreeMap<String, String>>,
    depth: usize,
) -> bool {
    if s.multi_valued != t.multi_valued || depth > ss.sub_schemas.len() {
        return false;
    }
    match (&s.value_type, &t.value_type) {
        (ValueType::SubSchemaRef(a), ValueType::SubSchemaRef(b)) => {
            let (Some(a), Some(b)) = (ss.sub_schema(a), ts.sub_schema(b)) else {
                return false;
            };
            let identity = same_id_map(a, b);
            let map = fields.unwrap_or(&identity);
            let covered: HashSet<&str> = map.values().map(String::as_str).collect();
            map.len() == a.fields.len()
                && covered.len() == b.fields.len()
                && map.iter().all(|(sf, tf)| match (a.field(sf), b.field(tf)) {
                    (Some(x), Some(y)) => equivalent(ss, x, ts, y, None, depth + 1),
                    _ => false,
                })
        }
        (ValueType::VocabularyTerm, ValueType::VocabularyTerm) => {
            let a = s.vocabulary_ref.as_deref().and_then(|v| ss.vocabulary(v));
            let b = t.vocabulary_ref.as_deref().and_then(|v| ts.vocabulary(v));
            a.is_some() && a.map(|v| &v.terms) == b.map(|v| &v.terms)
        }
        (a, b) => a == b,
    }
}

pub(crate) fn same_id_map(
    a: &crate::schema::SubSchema,
    b: &crate::schema::SubSchema,
) -> BTreeMap<String, String> {
    a.fields
        .iter()
        .filter(|f| b.field(&f.id).is_some())
        .map(|f| (f.id.clone(), f.id.clone()))
        .collect()
}

fn compile(
    source: &SchemaDefinition,
    target: &SchemaDefinition,
    rule: &MappingRule,
) -> Result<Compiled, String> {
    let t = target.element(&rule.target_path).ok_or_else(|| {
        format!(
            "target path `{}` is not an element of schema `{}`",
            rule.target_path, target.id
        )
    })?;
    let s = match (&rule.source_path, rule.transform) {
        (Some(_), Transform::Constant) => {
            return Err("constant rules take no source path".to_string())
        }
        (None, Transform::Constant) => None,
        (None, _) => return Err(format!("{} rules need a source path", rule.transform)),
        (Some(path), _) => Some(source.element(path).ok_or_else(|| {
            format!("source path `{path}` is not an element of schema `{}`", source.id)
        })?),
    };
    let text_like = |e: &ElementDefinition| {
        matches!(e.value_type, ValueType::Text | ValueType::VocabularyTerm | ValueType::Iri)
    };
    let arg_str = |key: &str, default: &str| -> Result<String, String> {
        match rule.arg.as_ref().map(|a| a.get(key)) {
            None | Some(None) => Ok(default.to_string()),
            Some(Some(serde_json::Value::String(s))) => Ok(s.clone()),
            Some(Some(_)) => Err(format!("arg `{key}` must be a string")),
        }
    };

    match rule.transform {
        Transform::Identity | Transform::Rename => {
            let s = s.expect("checked above");
            if rule.transform == Transform::Identity && s.id != t.id {
                return Err("identity rules map an element to the same path".to_string());
            }
            match (&s.value_type, &t.value_type) {
                (ValueType::SubSchemaRef(a), ValueType::SubSchemaRef(b)) => {
                    let a = source.sub_schema(a).ok_or("unknown source sub-schema")?;
                    let b = target.sub_schema(b).ok_or("unknown target sub-schema")?;
                    let fields = match &rule.arg {
                        None => same_id_map(a, b),
                        Some(serde_json::Value::Object(map)) => {
                            let mut fields = BTreeMap::new();
                            let mut seen = HashSet::new();
                            for (sf, tf) in map {
                                let tf = tf.as_str().ok_or("nested field map values must be strings")?;
                                if a.field(sf).is_none() {
                                    return Err(format!("`{sf}` is not a field of `{}`", a.id));
                                }
                                if b.field(tf).is_none() {
                                    return Err(format!("`{tf}` is not a field of `{}`", b.id));
                                }
                                if !seen.insert(tf) {
                                    return Err(format!("nested target `{tf}` is mapped twice"));
                                }
                                fields.insert(sf.clone(), tf.to_string());
                            }
                            fields
                        }
                        Some(_) => return Err("arg must be an object of nested field names".to_string()),
                    };
                    Ok(Compiled::Direct { fields })
                }
                (ValueType::SubSchemaRef(_), _) | (_, ValueType::SubSchemaRef(_)) => Err(format!(
                    "cannot copy {} values into {}",
                    s.value_type, t.value_type
                )),
                _ if rule.arg.is_some() => Err("arg is only used between sub-schemas".to_string()),
                _ => Ok(Compiled::Direct {
                    fields: BTreeMap::new(),
                }),
            }
        }
        Transform::PersonSplit | Transform::PersonJoin => {
            let s = s.expect("checked above");
            let given = arg_str("given", "givenName")?;
            let family = arg_str("family", "familyName")?;
            let (name, person, schema) = if rule.transform == Transform::PersonSplit {
                (s, t, target)
            } else {
                (t, s, source)
            };
            if !text_like(name) {
                return Err(format!("`{}` must hold a name string", name.id));
            }
            let sub = person
                .value_type
                .sub_schema()
                .and_then(|id| schema.sub_schema(id))
                .ok_or_else(|| format!("`{}` must be person-typed", person.id))?;
            for f in [&given, &family] {
                match sub.field(f) {
                    Some(fd) if fd.value_type == ValueType::Text => {}
                    _ => return Err(format!("`{}` has no text field `{f}`", sub.id)),
                }
            }
            Ok(if rule.transform == Transform::PersonSplit {
                Compiled::PersonSplit { given, family }
            } else {
                Compiled::PersonJoin { given, family }
            })
        }
        Transform::ListJoin => {
            if t.multi_valued || t.value_type != ValueType::Text {
                return Err(format!("listJoin needs a single-valued text target, `{}` is not", t.id));
            }
            let separator = match &rule.arg {
                None => ", ".to_string(),
                Some(serde_json::Value::String(s)) => s.clone(),
                Some(_) => return Err("listJoin arg must be the separator string".to_string()),
            };
            Ok(Compiled::ListJoin { separator })
        }
        Transform::Constant => {
            let raw = match &rule.arg {
                Some(serde_json::Value::String(s)) => Value::Text(s.clone()),
                Some(serde_json::Value::Bool(b)) => Value::Boolean(*b),
                Some(serde_json::Value::Number(n)) => match n.as_i64() {
                    Some(i) => Value::Integer(i),
                    None => Value::Number(n.as_f64().unwrap_or_default()),
                },
                _ => return Err("constant rules need a scalar arg".to_string()),
            };
            convert::coerce_scalar(target, t, &raw)
                .map(Compiled::Constant)
                .ok_or_else(|| format!("constant does not fit {} element `{}`", t.value_type, t.id))
        }
    }
}
