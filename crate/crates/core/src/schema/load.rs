use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::Deserialize;

use super::model::{
    ElementDefinition, Provenance, SchemaDefinition, SubSchema, ThematicArea, ValueType,
    Vocabulary, VocabularyKind,
};

#[derive(Debug, thiserror::Error)]
pub enum SchemaError {
    #[error("malformed schema document: {0}")]
    Parse(#[source] serde_json::Error),
    #[error("malformed vocabulary file {path}: {source}")]
    VocabularyParse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema is inconsistent ({} problem(s)): {}", .0.len(), join_issues(.0))]
    Consistency(Vec<ConsistencyIssue>),
}

fn join_issues(issues: &[ConsistencyIssue]) -> String {
    issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// One violated schema invariant. `element` values are top-level ids or
/// `subSchema.field` for sub-schema fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConsistencyIssue {
    DuplicateArea(String),
    DuplicateElement(String),
    DuplicateSubSchema(String),
    DuplicateField { sub_schema: String, field: String },
    DuplicateVocabulary(String),
    DuplicateTerm { vocabulary: String, label: String },
    MissingTermIri { vocabulary: String, label: String },
    MissingArea(String),
    DanglingArea { element: String, area: String },
    DanglingSubSchema { element: String, sub_schema: String },
    DanglingVocabulary { element: String, vocabulary: String },
    VocabularyRefMismatch(String),
    MissingSourceIri(String),
    MissingOwnNamespace(String),
    DuplicateIri { scope: String, iri: String },
    SubSchemaCycle(Vec<String>),
}

impl fmt::Display for ConsistencyIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ConsistencyIssue::*;
        match self {
            DuplicateArea(id) => write!(f, "duplicate area id `{id}`"),
            DuplicateElement(id) => write!(f, "duplicate element id `{id}`"),
            DuplicateSubSchema(id) => write!(f, "duplicate sub-schema id `{id}`"),
            DuplicateField { sub_schema, field } => {
                write!(f, "duplicate field `{field}` in sub-schema `{sub_schema}`")
            }
            DuplicateVocabulary(id) => write!(f, "duplicate vocabulary id `{id}`"),
            DuplicateTerm { vocabulary, label } => {
                write!(f, "vocabulary `{vocabulary}` lists term `{label}` twice")
            }
            MissingTermIri { vocabulary, label } => write!(
                f,
                "ontology-class vocabulary `{vocabulary}` has no IRI for term `{label}`"
            ),
            MissingArea(e) => write!(f, "element `{e}` has no area"),
            DanglingArea { element, area } => {
                write!(f, "element `{element}` references unknown area `{area}`")
            }
            DanglingSubSchema { element, sub_schema } => {
                write!(f, "element `{element}` references unknown sub-schema `{sub_schema}`")
            }
            DanglingVocabulary { element, vocabulary } => {
                write!(f, "element `{element}` references unknown vocabulary `{vocabulary}`")
            }
            VocabularyRefMismatch(e) => write!(
                f,
                "element `{e}` must have a vocabularyRef exactly when its valueType is vocabularyTerm"
            ),
            MissingSourceIri(e) => write!(f, "reused element `{e}` has no sourceIri"),
            MissingOwnNamespace(id) => write!(
                f,
                "schema declares new elements but no namespace under its own id `{id}`"
            ),
            DuplicateIri { scope, iri } => write!(f, "IRI <{iri}> is used twice in `{scope}`"),
            SubSchemaCycle(path) => write!(f, "sub-schema cycle {}", path.join(" -> ")),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum VocabularyEntry {
    Inline(Vocabulary),
    Path(String),
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct SchemaDocument {
    id: String,
    version: String,
    areas: Vec<ThematicArea>,
    elements: Vec<ElementDefinition>,
    #[serde(default)]
    sub_schemas: Vec<SubSchema>,
    #[serde(default)]
    vocabularies: Vec<VocabularyEntry>,
    #[serde(default)]
    namespaces: BTreeMap<String, String>,
}

/// Loads a schema whose vocabularies are all inlined.
pub fn load_schema(document: &str) -> Result<SchemaDefinition, SchemaError> {
    load_schema_with(document, |path| {
        Err(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("no resolver for vocabulary reference `{path}`"),
        ))
    })
}

/// Loads a schema file, resolving vocabulary paths relative to its directory.
pub fn load_schema_file(path: impl AsRef<Path>) -> Result<SchemaDefinition, SchemaError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| SchemaError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    load_schema_with(&text, |rel| std::fs::read_to_string(base.join(rel)))
}

/// Loads a schema, fetching referenced vocabulary files through `resolve`.
pub fn load_schema_with<F>(document: &str, resolve: F) -> Result<SchemaDefinition, SchemaError>
where
    F: Fn(&str) -> std::io::Result<String>,
{
    let doc: SchemaDocument = serde_json::from_str(document).map_err(SchemaError::Parse)?;
    let mut vocabularies = Vec::with_capacity(doc.vocabularies.len());
    for entry in doc.vocabularies {
        match entry {
            VocabularyEntry::Inline(v) => vocabularies.push(v),
            VocabularyEntry::Path(path) => {
                let text = resolve(&path).map_err(|source| SchemaError::Io {
                    path: path.clone(),
                    source,
                })?;
                let v = serde_json::from_str(&text)
                    .map_err(|source| SchemaError::VocabularyParse { path, source })?;
                vocabularies.push(v);
            }
        }
    }
    let schema = SchemaDefinition {
        id: doc.id,
        version: doc.version,
        areas: doc.areas,
        elements: doc.elements,
        sub_schemas: doc.sub_schemas,
        vocabularies,
        namespaces: doc.namespaces,
    };
    let issues = check_consistency(&schema);
    if issues.is_empty() {
        Ok(schema)
    } else {
        Err(SchemaError::Consistency(issues))
    }
}

/// Writes the canonical document with every vocabulary inlined.
pub fn serialize_schema(schema: &SchemaDefinition) -> String {
    let mut out = serde_json::to_string_pretty(schema).expect("schema serializes");
    out.push('\n');
    out
}

/// Writes one vocabulary as served next to the schema.
pub fn serialize_vocabulary(vocabulary: &Vocabulary) -> String {
    let mut out = serde_json::to_string_pretty(vocabulary).expect("vocabulary serializes");
    out.push('\n');
    out
}

/// Every violated invariant, in document order. Empty means consistent.
pub fn check_consistency(schema: &SchemaDefinition) -> Vec<ConsistencyIssue> {
    let mut issues = Vec::new();

    let mut seen = HashSet::new();
    for a in &schema.areas {
        if !seen.insert(a.id.as_str()) {
            issues.push(ConsistencyIssue::DuplicateArea(a.id.clone()));
        }
    }

    let mut vocabs = HashSet::new();
    for v in &schema.vocabularies {
        if !vocabs.insert(v.id.as_str()) {
            issues.push(ConsistencyIssue::DuplicateVocabulary(v.id.clone()));
        }
        let mut labels = HashSet::new();
        for t in &v.terms {
            if !labels.insert(t.label.as_str()) {
                issues.push(ConsistencyIssue::DuplicateTerm {
                    vocabulary: v.id.clone(),
                    label: t.label.clone(),
                });
            }
            if v.kind == VocabularyKind::OntologyClass && t.iri.is_none() {
                issues.push(ConsistencyIssue::MissingTermIri {
                    vocabulary: v.id.clone(),
                    label: t.label.clone(),
                });
            }
        }
    }

    let mut subs = HashSet::new();
    for s in &schema.sub_schemas {
        if !subs.insert(s.id.as_str()) {
            issues.push(ConsistencyIssue::DuplicateSubSchema(s.id.clone()));
        }
    }

    let mut ids = HashSet::new();
    for e in &schema.elements {
        if !ids.insert(e.id.as_str()) {
            issues.push(ConsistencyIssue::DuplicateElement(e.id.clone()));
        }
        match &e.area {
            None => issues.push(ConsistencyIssue::MissingArea(e.id.clone())),
            Some(area) if schema.area(area).is_none() => {
                issues.push(ConsistencyIssue::DanglingArea {
                    element: e.id.clone(),
                    area: area.clone(),
                })
            }
            Some(_) => {}
        }
        check_element(e, &e.id, &subs, &vocabs, &mut issues);
    }
    check_iris(schema, "elements", &schema.elements, &mut issues);

    for s in &schema.sub_schemas {
        let mut fields = HashSet::new();
        for f in &s.fields {
            if !fields.insert(f.id.as_str()) {
                issues.push(ConsistencyIssue::DuplicateField {
                    sub_schema: s.id.clone(),
                    field: f.id.clone(),
                });
            }
            let path = format!("{}.{}", s.id, f.id);
            check_element(f, &path, &subs, &vocabs, &mut issues);
        }
        check_iris(schema, &s.id, &s.fields, &mut issues);
    }

    let uses_new = schema
        .elements
        .iter()
        .chain(schema.sub_schemas.iter().flat_map(|s| &s.fields))
        .any(|e| e.provenance == Provenance::New);
    if uses_new && schema.own_namespace().is_none() {
        issues.push(ConsistencyIssue::MissingOwnNamespace(schema.id.clone()));
    }

    if let Some(cycle) = find_cycle(schema) {
        issues.push(ConsistencyIssue::SubSchemaCycle(cycle));
    }
    issues
}

fn check_element(
    e: &ElementDefinition,
    path: &str,
    subs: &HashSet<&str>,
    vocabs: &HashSet<&str>,
    issues: &mut Vec<ConsistencyIssue>,
) {
    if let ValueType::SubSchemaRef(sub) = &e.value_type {
        if !subs.contains(sub.as_str()) {
            issues.push(ConsistencyIssue::DanglingSubSchema {
                element: path.to_string(),
                sub_schema: sub.clone(),
            });
        }
    }
    let is_vocab = e.value_type == ValueType::VocabularyTerm;
    match &e.vocabulary_ref {
        Some(v) if !vocabs.contains(v.as_str()) => {
            issues.push(ConsistencyIssue::DanglingVocabulary {
                element: path.to_string(),
                vocabulary: v.clone(),
            })
        }
        _ => {}
    }
    if is_vocab != e.vocabulary_ref.is_some() {
        issues.push(ConsistencyIssue::VocabularyRefMismatch(path.to_string()));
    }
    if e.provenance != Provenance::New && e.source_iri.is_none() {
        issues.push(ConsistencyIssue::MissingSourceIri(path.to_string()));
    }
}

// Turtle maps predicates back to elements, so IRIs must be unambiguous per scope.
fn check_iris(
    schema: &SchemaDefinition,
    scope: &str,
    elements: &[ElementDefinition],
    issues: &mut Vec<ConsistencyIssue>,
) {
    let mut seen = HashSet::new();
    for e in elements {
        let iri = schema.element_iri(e);
        if !seen.insert(iri.clone()) {
            issues.push(ConsistencyIssue::DuplicateIri {
                scope: scope.to_string(),
                iri,
            });
        }
    }
}

fn find_cycle(schema: &SchemaDefinition) -> Option<Vec<String>> {
    let edges: HashMap<&str, Vec<&str>> = schema
        .sub_schemas
        .iter()
        .map(|s| {
            let targets = s.fields.iter().filter_map(|f| f.value_type.sub_schema()).collect();
            (s.id.as_str(), targets)
        })
        .collect();

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    fn visit<'a>(
        node: &'a str,
        edges: &HashMap<&'a str, Vec<&'a str>>,
        marks: &mut HashMap<&'a str, Mark>,
        stack: &mut Vec<&'a str>,
    ) -> Option<Vec<String>> {
        match marks.get(node) {
            Some(Mark::Done) => return None,
            Some(Mark::Active) => {
                let start = stack.iter().position(|n| *n == node).unwrap_or(0);
                let mut cycle: Vec<String> = stack[start..].iter().map(|s| s.to_string()).collect();
                cycle.push(node.to_string());
                return Some(cycle);
            }
            None => {}
        }
        marks.insert(node, Mark::Active);
        stack.push(node);
        for next in edges.get(node).into_iter().flatten() {
            if let Some(c) = visit(next, edges, marks, stack) {
                return Some(c);
            }
        }
        stack.pop();
        marks.insert(node, Mark::Done);
        None
    }

    let mut marks = HashMap::new();
    for s in &schema.sub_schemas {
        let mut stack = Vec::new();
        if let Some(c) = visit(&s.id, &edges, &mut marks, &mut stack) {
            return Some(c);
        }
    }
    None
}
