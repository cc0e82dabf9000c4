use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Importance class of an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Tier {
    Mandatory,
    Recommended,
    Optional,
}

impl Tier {
    pub const ALL: [Tier; 3] = [Tier::Mandatory, Tier::Recommended, Tier::Optional];

    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Mandatory => "mandatory",
            Tier::Recommended => "recommended",
            Tier::Optional => "optional",
        }
    }

    /// The less strict of two tiers. A mandatory field inside an optional
    /// element is only presented as optional.
    pub fn weakest(self, other: Tier) -> Tier {
        self.max(other)
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ValueType {
    Text,
    Iri,
    Date,
    Integer,
    Number,
    Boolean,
    VocabularyTerm,
    SubSchemaRef(String),
}

impl ValueType {
    pub fn sub_schema(&self) -> Option<&str> {
        match self {
            ValueType::SubSchemaRef(id) => Some(id),
            _ => None,
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueType::Text => f.write_str("text"),
            ValueType::Iri => f.write_str("iri"),
            ValueType::Date => f.write_str("date"),
            ValueType::Integer => f.write_str("integer"),
            ValueType::Number => f.write_str("number"),
            ValueType::Boolean => f.write_str("boolean"),
            ValueType::VocabularyTerm => f.write_str("vocabularyTerm"),
            ValueType::SubSchemaRef(id) => write!(f, "subSchemaRef({id})"),
        }
    }
}

/// Where an element was taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Provenance {
    #[serde(rename = "schema.org")]
    SchemaOrg,
    #[serde(rename = "codemeta")]
    CodeMeta,
    #[serde(rename = "softwareDescriptionOntology")]
    SoftwareDescriptionOntology,
    #[serde(rename = "ontosoft")]
    OntoSoft,
    #[serde(rename = "oeo")]
    Oeo,
    #[serde(rename = "m4i")]
    M4i,
    #[serde(rename = "new")]
    New,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::SchemaOrg => "schema.org",
            Provenance::CodeMeta => "codemeta",
            Provenance::SoftwareDescriptionOntology => "softwareDescriptionOntology",
            Provenance::OntoSoft => "ontosoft",
            Provenance::Oeo => "oeo",
            Provenance::M4i => "m4i",
            Provenance::New => "new",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ThematicArea {
    pub id: String,
    pub label: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ElementDefinition {
    pub id: String,
    pub label: String,
    #[serde(default)]
    pub description: String,
    pub tier: Tier,
    /// Present on top-level elements, omitted on sub-schema fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<String>,
    pub value_type: ValueType,
    #[serde(default)]
    pub multi_valued: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocabulary_ref: Option<String>,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_iri: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SubSchema {
    pub id: String,
    pub fields: Vec<ElementDefinition>,
}

impl SubSchema {
    pub fn field(&self, id: &str) -> Option<&ElementDefinition> {
        self.fields.iter().find(|f| f.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum VocabularyKind {
    ClosedList,
    OntologyClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Term {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iri: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Vocabulary {
    pub id: String,
    pub kind: VocabularyKind,
    pub terms: Vec<Term>,
    #[serde(default)]
    pub source_note: String,
}

/// The element registry everything else is driven by.
///
/// Instances returned by [`load_schema`](super::load_schema) satisfy every
/// consistency rule; the fields stay public for read access and tests.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SchemaDefinition {
    pub id: String,
    pub version: String,
    pub areas: Vec<ThematicArea>,
    pub elements: Vec<ElementDefinition>,
    #[serde(default)]
    pub sub_schemas: Vec<SubSchema>,
    #[serde(default)]
    pub vocabularies: Vec<Vocabulary>,
    #[serde(default)]
    pub namespaces: BTreeMap<String, String>,
}

impl SchemaDefinition {
    pub fn element(&self, id: &str) -> Option<&ElementDefinition> {
        self.elements.iter().find(|e| e.id == id)
    }

    pub fn sub_schema(&self, id: &str) -> Option<&SubSchema> {
        self.sub_schemas.iter().find(|s| s.id == id)
    }

    pub fn vocabulary(&self, id: &str) -> Option<&Vocabulary> {
        self.vocabularies.iter().find(|v| v.id == id)
    }

    pub fn area(&self, id: &str) -> Option<&ThematicArea> {
        self.areas.iter().find(|a| a.id == id)
    }

    /// Namespace for elements the schema defines itself, keyed by the schema id.
    pub fn own_namespace(&self) -> Option<&str> {
        self.namespaces.get(&self.id).map(String::as_str)
    }

    /// IRI an element (or sub-schema field) is published under.
    pub fn element_iri(&self, element: &ElementDefinition) -> String {
        match &element.source_iri {
            Some(iri) => iri.clone(),
            None => format!("{}{}", self.own_namespace().unwrap_or_default(), element.id),
        }
    }

    /// Fields of the sub-schema an element's values are shaped by, if any.
    pub fn fields_of(&self, element: &ElementDefinition) -> Option<&SubSchema> {
        element.value_type.sub_schema().and_then(|id| self.sub_schema(id))
    }

    /// Compacts an IRI to `prefix:local` using the declared namespaces.
    /// The longest matching namespace wins; `None` when no namespace fits.
    pub fn compact_iri(&self, iri: &str) -> Option<(String, String)> {
        self.namespaces
            .iter()
            .filter(|(_, base)| iri.len() > base.len() && iri.starts_with(base.as_str()))
            .max_by_key(|(_, base)| base.len())
            .map(|(prefix, base)| (prefix.clone(), iri[base.len()..].to_string()))
    }
}
