//! Constraint checking and completeness scoring of records.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::record::{value_path, MetadataRecord, UnknownField, Value, ValueMap, Strictness};
use crate::record::element_path;
use crate::schema::{resolve_term, ElementDefinition, SchemaDefinition, Tier, ValueType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Constraint {
    MissingMandatory,
    MissingRecommended,
    DatatypeMismatch,
    NotInVocabulary,
    NestedShapeViolation,
    UnknownElement,
    CardinalityExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Severity {
    Violation,
    Warning,
    Info,
}

/// Severity of a finding. Only unknown elements depend on the mode; every
/// value problem is a violation whatever the element's tier.
pub fn severity(constraint: Constraint, strictness: Strictness) -> Severity {
    match constraint {
        Constraint::MissingMandatory => Severity::Violation,
        Constraint::MissingRecommended => Severity::Warning,
        Constraint::UnknownElement => match strictness {
            Strictness::Strict => Severity::Violation,
            Strictness::Lax => Severity::Warning,
        },
        Constraint::DatatypeMismatch
        | Constraint::NotInVocabulary
        | Constraint::NestedShapeViolation
        | Constraint::CardinalityExceeded => Severity::Violation,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Finding {
    pub element_path: String,
    pub constraint: Constraint,
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
    pub conformant: bool,
}

impl ValidationReport {
    pub fn violations(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Violation)
    }

    /// Canonical JSON rendering shared by the CLI and the HTTP service.
    pub fn to_json_string(&self) -> String {
        pretty(self)
    }
}

pub(crate) fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Validates in strict mode.
pub fn validate(record: &MetadataRecord, schema: &SchemaDefinition) -> ValidationReport {
    validate_with(record, schema, Strictness::Strict, &[])
}

/// Validates a record. `unknowns` are fields a lax reader set aside; they are
/// reported after every schema-driven finding.
pub fn validate_with(
    record: &MetadataRecord,
    schema: &SchemaDefinition,
    strictness: Strictness,
    unknowns: &[UnknownField],
) -> ValidationReport {
    let mut v = Validator {
        schema,
        strictness,
        findings: Vec::new(),
    };
    v.check_map(&schema.elements, &record.values, "", Constraint::UnknownElement);
    for u in unknowns {
        v.report(
            &u.path,
            Constraint::UnknownElement,
            format!("`{}` is not declared by the schema", u.path),
        );
    }
    let conformant = !v.findings.iter().any(|f| f.severity == Severity::Violation);
    ValidationReport {
        findings: v.findings,
        conformant,
    }
}

struct Validator<'a> {
    schema: &'a SchemaDefinition,
    strictness: Strictness,
    findings: Vec<Finding>,
}

impl Validator<'_> {
    fn report(&mut self, path: &str, constraint: Constraint, message: String) {
        self.findings.push(Finding {
            element_path: path.to_string(),
            constraint,
            severity: severity(constraint, self.strictness),
            message,
        });
    }

    fn check_map(
        &mut self,
        defs: &[ElementDefinition],
        map: &ValueMap,
        parent: &str,
        undeclared: Constraint,
    ) {
        for def in defs {
            let path = element_path(parent, &def.id);
            let Some(values) = map.get(&def.id) else {
                match def.tier {
                    Tier::Mandatory => self.report(
                        &path,
                        Constraint::MissingMandatory,
                        format!("mandatory element `{path}` is missing"),
                    ),
                    Tier::Recommended => self.report(
                        &path,
                        Constraint::MissingRecommended,
                        format!("recommended element `{path}` is missing"),
                    ),
                    Tier::Optional => {}
                }
                continue;
            };
            if !def.multi_valued && values.len() > 1 {
                self.report(
                    &path,
                    Constraint::CardinalityExceeded,
                    format!("`{path}` takes a single value, found {}", values.len()),
                );
            }
            let indexed = def.multi_valued || values.len() > 1;
            for (i, value) in values.iter().enumerate() {
                let vpath = value_path(parent, &def.id, i, indexed);
                self.check_value(def, value, &vpath);
            }
        }
        for key in map.keys() {
            if !defs.iter().any(|d| d.id == key) {
                let path = element_path(parent, key);
                let message = if parent.is_empty() {
                    format!("`{path}` is not declared by the schema")
                } else {
                    format!("`{key}` is not a field of `{parent}`")
                };
                self.report(&path, undeclared, message);
            }
        }
    }

    fn check_value(&mut self, def: &ElementDefinition, value: &Value, path: &str) {
        let type_ok = match (&def.value_type, value) {
            (ValueType::Text, Value::Text(_))
            | (ValueType::Date, Value::Date(_))
            | (ValueType::Integer, Value::Integer(_))
            | (ValueType::Boolean, Value::Boolean(_)) => true,
            (ValueType::Number, Value::Number(n)) => n.is_finite(),
            (ValueType::Iri, Value::Iri(iri)) => is_absolute_iri(iri),
            (ValueType::VocabularyTerm, Value::Term { iri, .. }) => {
                iri.as_deref().is_none_or(is_absolute_iri)
            }
            (ValueType::SubSchemaRef(_), Value::Nested(_)) => true,
            _ => false,
        };
        if !type_ok {
            let found = match value {
                Value::Iri(iri) if def.value_type == ValueType::Iri => {
                    format!("`{iri}`, which is not an absolute IRI")
                }
                Value::Term { iri: Some(iri), .. } if def.value_type == ValueType::VocabularyTerm => {
                    format!("term IRI `{iri}`, which is not absolute")
                }
                other => format!("a {} value", other.kind()),
            };
            self.report(
                path,
                Constraint::DatatypeMismatch,
                format!("`{path}` expects {}, found {found}", def.value_type),
            );
            return;
        }
        match value {
            Value::Term { label, iri } => self.check_term(def, label, iri.as_deref(), path),
            Value::Nested(nested) => {
                let expected = def.value_type.sub_schema().unwrap_or_default();
                match self.schema.sub_schema(expected) {
                    Some(sub) if sub.id == nested.schema => {
                        self.check_map(
                            &sub.fields,
                            &nested.fields,
                            path,
                            Constraint::NestedShapeViolation,
                        );
                    }
                    _ => self.report(
                        path,
                        Constraint::NestedShapeViolation,
                        format!(
                            "`{path}` expects a `{expected}` value, found `{}`",
                            nested.schema
                        ),
                    ),
                }
            }
            _ => {}
        }
    }

    fn check_term(&mut self, def: &ElementDefinition, label: &str, iri: Option<&str>, path: &str) {
        let Some(vocab) = def.vocabulary_ref.as_deref().and_then(|v| self.schema.vocabulary(v))
        else {
            return;
        };
        let ok = match iri {
            Some(iri) => resolve_term(vocab, iri)
                .is_some_and(|t| t.iri.as_deref() == Some(iri) && t.label == label),
            None => resolve_term(vocab, label).is_some(),
        };
        if !ok {
            let shown = match iri {
                Some(iri) => format!("`{label}` <{iri}>"),
                None => format!("`{label}`"),
            };
            self.report(
                path,
                Constraint::NotInVocabulary,
                format!("{shown} is not a term of vocabulary `{}`", vocab.id),
            );
        }
    }
}

/// Absolute-IRI syntax check: a scheme followed by `:`.
pub fn is_absolute_iri(iri: &str) -> bool {
    url::Url::parse(iri).is_ok() && !iri.chars().any(char::is_whitespace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fill {
    pub filled: usize,
    pub total: usize,
}

impl Fill {
    pub fn ratio(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.filled as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CompletenessReport {
    pub per_tier: IndexMap<Tier, Fill>,
    pub per_area: IndexMap<String, Fill>,
    pub mandatory_complete: bool,
}

impl CompletenessReport {
    pub fn to_json_string(&self) -> String {
        pretty(self)
    }
}

/// Fill counts over top-level elements. Totals come from the schema; an
/// element counts as filled when the record holds at least one value for it.
pub fn completeness(record: &MetadataRecord, schema: &SchemaDefinition) -> CompletenessReport {
    let zero = Fill {
        filled: 0,
        total: 0,
    };
    let mut per_tier: IndexMap<Tier, Fill> = Tier::ALL.iter().map(|t| (*t, zero)).collect();
    let mut per_area: IndexMap<String, Fill> =
        schema.areas.iter().map(|a| (a.id.clone(), zero)).collect();
    for def in &schema.elements {
        let filled = usize::from(record.values.contains_key(&def.id));
        let t = per_tier.entry(def.tier).or_insert(zero);
        t.total += 1;
        t.filled += filled;
        if let Some(area) = &def.area {
            let a = per_area.entry(area.clone()).or_insert(zero);
            a.total += 1;
            a.filled += filled;
        }
    }
    let m = per_tier[&Tier::Mandatory];
    CompletenessReport {
        per_tier,
        per_area,
        mandatory_complete: m.filled == m.total,
    }
}

pub fn quality_gate(report: &CompletenessReport) -> bool {
    report.mandatory_complete
}
