//! Record ⇄ Turtle mapping: one subject per record, one predicate group per
//! element, nested values as blank nodes.

use std::collections::{BTreeSet, HashMap};

use sha2::{Digest, Sha256};

use super::json::{is_safe_local, nested_shape, parse_date, RDFS, XSD};
use super::turtle::{
    iri_ref, parse_turtle, quote_string, write_node, Node, Triple, RDF_TYPE, XSD_BOOLEAN,
    XSD_DATE, XSD_DECIMAL, XSD_DOUBLE, XSD_INTEGER, XSD_STRING,
};
use super::{
    element_path, value_path, MetadataRecord, Nested, Parsed, RecordError, Strictness,
    UnknownField, Value, ValueMap,
};
use crate::schema::{ElementDefinition, SchemaDefinition, ValueType};

const OWL: &str = "http://www.w3.org/2002/07/owl#";
const SOFTWARE_SOURCE_CODE: &str = "http://schema.org/SoftwareSourceCode";

/// Subject IRI for a record: its `identifier` IRI when present, otherwise a
/// URN derived from the schema id and a hash of the first name value.
pub fn subject_iri(record: &MetadataRecord, schema: &SchemaDefinition) -> String {
    if schema.element("identifier").is_some() {
        if let Some(Value::Iri(iri)) = record.get("identifier").and_then(|v| v.first()) {
            if url::Url::parse(iri).is_ok() {
                return iri.clone();
            }
        }
    }
    let name = record.first_str("name").unwrap_or_default();
    let digest = Sha256::digest(name.as_bytes());
    let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
    format!("urn:ersmeta:record:{}:{hex}", schema.id)
}

pub fn to_turtle(record: &MetadataRecord, schema: &SchemaDefinition) -> Result<String, RecordError> {
    let mut w = Writer {
        schema,
        prefixes: BTreeSet::new(),
    };
    let class = w.name(SOFTWARE_SOURCE_CODE);
    let groups = w.groups(&schema.elements, &record.values, "", 1)?;

    let mut out = String::new();
    for prefix in &w.prefixes {
        out.push_str(&format!("@prefix {prefix}: {} .\n", iri_ref(w.namespace(prefix))));
    }
    if !w.prefixes.is_empty() {
        out.push('\n');
    }
    out.push_str(&iri_ref(&subject_iri(record, schema)));
    out.push_str(" a ");
    out.push_str(&class);
    for g in groups {
        out.push_str(" ;\n    ");
        out.push_str(&g);
    }
    out.push_str(" .\n");
    Ok(out)
}

struct Writer<'a> {
    schema: &'a SchemaDefinition,
    prefixes: BTreeSet<String>,
}

impl Writer<'_> {
    fn namespace(&self, prefix: &str) -> &str {
        match self.schema.namespaces.get(prefix) {
            Some(ns) => ns,
            None => match prefix {
                "xsd" => XSD,
                "rdfs" => RDFS,
                _ => OWL,
            },
        }
    }

    /// Compacted form of an IRI when a declared namespace fits.
    fn name(&mut self, iri: &str) -> String {
        if let Some((prefix, local)) = self.schema.compact_iri(iri) {
            if is_safe_local(&local) {
                self.prefixes.insert(prefix.clone());
                return format!("{prefix}:{local}");
            }
        }
        for (prefix, ns) in [("xsd", XSD), ("rdfs", RDFS), ("owl", OWL)] {
            let free = self.schema.namespaces.get(prefix).is_none_or(|n| n == ns);
            if let Some(local) = iri.strip_prefix(ns) {
                if free && is_safe_local(local) {
                    self.prefixes.insert(prefix.to_string());
                    return format!("{prefix}:{local}");
                }
            }
        }
        iri_ref(iri)
    }

    fn groups(
        &mut self,
        defs: &[ElementDefinition],
        map: &ValueMap,
        parent: &str,
        depth: usize,
    ) -> Result<Vec<String>, RecordError> {
        if let Some(unknown) = map.keys().find(|k| !defs.iter().any(|d| d.id == *k)) {
            return Err(RecordError::UnknownElement(element_path(parent, unknown)));
        }
        let mut out = Vec::new();
        for def in defs {
            let Some(values) = map.get(&def.id) else {
                continue;
            };
            let predicate = self.name(&self.schema.element_iri(def));
            let indexed = def.multi_valued || values.len() > 1;
            let mut objects = Vec::with_capacity(values.len());
            for (i, v) in values.iter().enumerate() {
                let path = value_path(parent, &def.id, i, indexed);
                objects.push(self.object(def, v, &path, depth)?);
            }
            out.push(format!("{predicate} {}", objects.join(", ")));
        }
        Ok(out)
    }

    fn object(
        &mut self,
        def: &ElementDefinition,
        value: &Value,
        path: &str,
        depth: usize,
    ) -> Result<String, RecordError> {
        Ok(match value {
            Value::Text(s) => quote_string(s),
            Value::Iri(iri) => iri_ref(iri),
            Value::Date(d) => format!("\"{}\"^^{}", d.format("%Y-%m-%d"), self.name(XSD_DATE)),
            Value::Integer(i) => i.to_string(),
            Value::Number(n) if n.is_finite() => format!("\"{n:?}\"^^{}", self.name(XSD_DOUBLE)),
            Value::Number(_) => return Err(RecordError::NonFinite(path.to_string())),
            Value::Boolean(b) => b.to_string(),
            Value::Term { label, iri: None } => quote_string(label),
            Value::Term {
                label,
                iri: Some(iri),
            } => {
                let label_p = self.name(&format!("{RDFS}label"));
                let same_p = self.name(&format!("{OWL}sameAs"));
                format!("[ {label_p} {} ; {same_p} {} ]", quote_string(label), iri_ref(iri))
            }
            Value::Nested(nested) => {
                let sub = nested_shape(self.schema, def, nested, path)?;
                let groups = self.groups(&sub.fields, &nested.fields, path, depth + 1)?;
                if groups.is_empty() {
                    "[]".to_string()
                } else {
                    let inner = "    ".repeat(depth + 1);
                    let outer = "    ".repeat(depth);
                    format!("[\n{inner}{}\n{outer}]", groups.join(&format!(" ;\n{inner}")))
                }
            }
        })
    }
}

pub fn from_turtle(text: &str, schema: &SchemaDefinition) -> Result<MetadataRecord, RecordError> {
    from_turtle_with(text, schema, Strictness::Strict).map(|p| p.record)
}

/// Reads the single non-blank subject of a Turtle document as a record.
/// `rdf:type` statements on the subject are skipped.
pub fn from_turtle_with(
    text: &str,
    schema: &SchemaDefinition,
    strictness: Strictness,
) -> Result<Parsed, RecordError> {
    let doc = parse_turtle(text)?;
    let subjects: BTreeSet<&str> = doc
        .triples
        .iter()
        .filter_map(|t| match &t.subject {
            Node::Iri(iri) => Some(iri.as_str()),
            _ => None,
        })
        .collect();
    if subjects.len() != 1 {
        return Err(RecordError::SubjectCount(subjects.len()));
    }
    let subject = Node::Iri(subjects.into_iter().next().unwrap_or_default().to_string());

    let mut by_subject: HashMap<&Node, Vec<&Triple>> = HashMap::new();
    for t in &doc.triples {
        by_subject.entry(&t.subject).or_default().push(t);
    }
    let mut reader = Reader {
        schema,
        strictness,
        by_subject,
        unknowns: Vec::new(),
    };
    let values = reader.read_node(&schema.elements, &subject, "", true)?;
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
    by_subject: HashMap<&'a Node, Vec<&'a Triple>>,
    unknowns: Vec<UnknownField>,
}

impl<'a> Reader<'a> {
    fn read_node(
        &mut self,
        defs: &[ElementDefinition],
        node: &Node,
        parent: &str,
        top: bool,
    ) -> Result<ValueMap, RecordError> {
        let triples = self.by_subject.get(node).cloned().unwrap_or_default();
        let mut map = ValueMap::new();
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for t in triples {
            if top && t.predicate == RDF_TYPE {
                continue;
            }
            let Some(def) = defs.iter().find(|d| self.schema.element_iri(d) == t.predicate) else {
                let path = element_path(parent, &t.predicate);
                match self.strictness {
                    Strictness::Strict => return Err(RecordError::UnknownElement(path)),
                    Strictness::Lax => {
                        self.unknowns.push(UnknownField {
                            path,
                            value: serde_json::Value::String(write_node(&t.object)),
                        });
                        continue;
                    }
                }
            };
            let n = counts.entry(def.id.as_str()).or_default();
            let path = value_path(parent, &def.id, *n, def.multi_valued);
            *n += 1;
            let value = self.read_object(def, &t.object, &path)?;
            map.push(def.id.clone(), value);
        }
        Ok(map)
    }

    fn read_object(
        &mut self,
        def: &ElementDefinition,
        node: &Node,
        path: &str,
    ) -> Result<Value, RecordError> {
        let mismatch = || RecordError::TypeMismatch {
            path: path.to_string(),
            expected: def.value_type.to_string(),
            found: describe(node),
        };
        let literal = |accepted: &[&str]| match node {
            Node::Literal(l)
                if l.language.is_none()
                    && l.datatype.as_deref().is_none_or(|dt| accepted.contains(&dt)) =>
            {
                Some(l.lexical.as_str())
            }
            _ => None,
        };
        Ok(match &def.value_type {
            ValueType::Text => match node {
                Node::Literal(l) if l.datatype.as_deref().is_none_or(|d| d == XSD_STRING) => {
                    Value::Text(l.lexical.clone())
                }
                _ => return Err(mismatch()),
            },
            ValueType::Iri => match node {
                Node::Iri(iri) => Value::Iri(iri.clone()),
                _ => return Err(mismatch()),
            },
            ValueType::Date => {
                let lex = literal(&[XSD_DATE]).ok_or_else(mismatch)?;
                Value::Date(parse_date(lex).ok_or_else(mismatch)?)
            }
            ValueType::Integer => {
                let lex = literal(&[XSD_INTEGER]).ok_or_else(mismatch)?;
                Value::Integer(lex.parse().map_err(|_| mismatch())?)
            }
            ValueType::Number => {
                let lex = literal(&[XSD_DOUBLE, XSD_DECIMAL, XSD_INTEGER]).ok_or_else(mismatch)?;
                let n: f64 = lex.parse().map_err(|_| mismatch())?;
                if !n.is_finite() {
                    return Err(mismatch());
                }
                Value::Number(n)
            }
            ValueType::Boolean => match literal(&[XSD_BOOLEAN]) {
                Some("true") => Value::Boolean(true),
                Some("false") => Value::Boolean(false),
                _ => return Err(mismatch()),
            },
            ValueType::VocabularyTerm => match node {
                Node::Literal(l) if l.datatype.as_deref().is_none_or(|d| d == XSD_STRING) => {
                    Value::Term {
                        label: l.lexical.clone(),
                        iri: None,
                    }
                }
                Node::Blank(_) => {
                    let triples = self.by_subject.get(node).cloned().unwrap_or_default();
                    let mut label = None;
                    let mut iri = None;
                    for t in triples {
                        match (t.predicate.as_str(), &t.object) {
                            (p, Node::Literal(l)) if p == format!("{RDFS}label") => {
                                label = Some(l.lexical.clone())
                            }
                            (p, Node::Iri(i)) if p == format!("{OWL}sameAs") => {
                                iri = Some(i.clone())
                            }
                            _ => return Err(mismatch()),
                        }
                    }
                    match (label, iri) {
                        (Some(label), Some(iri)) => Value::Term {
                            label,
                            iri: Some(iri),
                        },
                        _ => return Err(mismatch()),
                    }
                }
                _ => return Err(mismatch()),
            },
            ValueType::SubSchemaRef(id) => {
                let sub = self.schema.sub_schema(id).ok_or_else(mismatch)?;
                match node {
                    Node::Blank(_) => Value::Nested(Nested {
                        schema: sub.id.clone(),
                        fields: self.read_node(&sub.fields, node, path, false)?,
                    }),
                    _ => return Err(mismatch()),
                }
            }
        })
    }
}

fn describe(node: &Node) -> String {
    match node {
        Node::Iri(iri) => format!("IRI <{iri}>"),
        Node::Blank(_) => "blank node".to_string(),
        Node::Literal(l) => match &l.datatype {
            Some(dt) => format!("literal {:?}^^<{dt}>", l.lexical),
            None => format!("literal {:?}", l.lexical),
        },
    }
}
