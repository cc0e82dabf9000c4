//! Data files compiled into the library: the ERSmeta schema with its
//! vocabularies, the CodeMeta and CFF target schemas, the crosswalks and the
//! forge field mapping.

use std::sync::{Arc, OnceLock};

use crate::crosswalk::{load_crosswalk, Crosswalk};
use crate::forge::ForgeMapping;
use crate::schema::{load_schema, load_schema_with, SchemaDefinition, SchemaManifest, SchemaSet};

pub const ERSMETA_SCHEMA: &str = include_str!("../data/ersmeta/schema.json");
pub const ERSMETA_MANIFEST: &str = include_str!("../data/ersmeta/schema.manifest.json");
pub const CODEMETA_SCHEMA: &str = include_str!("../data/codemeta/schema.json");
pub const CFF_SCHEMA: &str = include_str!("../data/cff/schema.json");
pub const ERSMETA_CODEMETA: &str = include_str!("../data/crosswalks/ersmeta-codemeta.json");
pub const ERSMETA_CFF: &str = include_str!("../data/crosswalks/ersmeta-cff.json");
pub const FORGE_MAPPING: &str = include_str!("../data/forge-mapping.json");

const VOCABULARIES: &[(&str, &str)] = &[
    ("vocabularies/softwareType.json", include_str!("../data/ersmeta/vocabularies/softwareType.json")),
    ("vocabularies/coversSector.json", include_str!("../data/ersmeta/vocabularies/coversSector.json")),
    ("vocabularies/energyComponent.json", include_str!("../data/ersmeta/vocabularies/energyComponent.json")),
    ("vocabularies/supportedVoltageLevel.json", include_str!("../data/ersmeta/vocabularies/supportedVoltageLevel.json")),
    ("vocabularies/roleInResearch.json", include_str!("../data/ersmeta/vocabularies/roleInResearch.json")),
    ("vocabularies/realtimeCapability.json", include_str!("../data/ersmeta/vocabularies/realtimeCapability.json")),
    ("vocabularies/developerStructure.json", include_str!("../data/ersmeta/vocabularies/developerStructure.json")),
    ("vocabularies/developmentStatus.json", include_str!("../data/ersmeta/vocabularies/developmentStatus.json")),
    ("vocabularies/programmingLanguage.json", include_str!("../data/ersmeta/vocabularies/programmingLanguage.json")),
    ("vocabularies/operatingSystem.json", include_str!("../data/ersmeta/vocabularies/operatingSystem.json")),
];

fn bundled_vocabulary(path: &str) -> std::io::Result<String> {
    VOCABULARIES
        .iter()
        .find(|(p, _)| *p == path)
        .map(|(_, text)| text.to_string())
        .ok_or_else(|| {
            std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("no bundled vocabulary `{path}`"),
            )
        })
}

/// The bundled ERSmeta schema. Loaded once per process.
pub fn ersmeta() -> Arc<SchemaDefinition> {
    static CELL: OnceLock<Arc<SchemaDefinition>> = OnceLock::new();
    CELL.get_or_init(|| {
        Arc::new(load_schema_with(ERSMETA_SCHEMA, bundled_vocabulary).expect("bundled ersmeta schema"))
    })
    .clone()
}

pub fn codemeta() -> Arc<SchemaDefinition> {
    static CELL: OnceLock<Arc<SchemaDefinition>> = OnceLock::new();
    CELL.get_or_init(|| Arc::new(load_schema(CODEMETA_SCHEMA).expect("bundled codemeta schema")))
        .clone()
}

pub fn cff() -> Arc<SchemaDefinition> {
    static CELL: OnceLock<Arc<SchemaDefinition>> = OnceLock::new();
    CELL.get_or_init(|| Arc::new(load_schema(CFF_SCHEMA).expect("bundled cff schema")))
        .clone()
}

pub fn manifest() -> SchemaManifest {
    serde_json::from_str(ERSMETA_MANIFEST).expect("bundled manifest")
}

/// The two target schemas plus `source`, which replaces the bundled ERSmeta
/// schema when a custom one is in use.
pub fn schema_set(source: Arc<SchemaDefinition>) -> SchemaSet {
    SchemaSet::new().with(codemeta()).with(cff()).with(source)
}

pub fn crosswalk_codemeta(schemas: &SchemaSet) -> Result<Crosswalk, crate::crosswalk::CrosswalkError> {
    load_crosswalk(ERSMETA_CODEMETA, schemas)
}

pub fn crosswalk_cff(schemas: &SchemaSet) -> Result<Crosswalk, crate::crosswalk::CrosswalkError> {
    load_crosswalk(ERSMETA_CFF, schemas)
}

pub fn forge_mapping() -> ForgeMapping {
    serde_json::from_str(FORGE_MAPPING).expect("bundled forge mapping")
}
