use std::sync::Arc;

use ersmeta_core::crosswalk::{convert, load_crosswalk, Crosswalk, TargetFormat};
use ersmeta_core::forge::{extract, Transport};
use ersmeta_core::record::{from_json_with, to_json, Parsed, Strictness};
use ersmeta_core::schema::{serialize_schema, serialize_vocabulary, SchemaDefinition};
use ersmeta_core::validate::{completeness, validate_with};
use ersmeta_core::{bundled, MetadataRecord};
use serde_json::{json, Map, Value as Json};

use crate::error::ApiError;

/// Every endpoint as a plain function from request body to response body.
/// Holds only data loaded at startup; no call mutates it.
pub struct Api {
    schema: Arc<SchemaDefinition>,
    schema_document: String,
    crosswalks: Vec<(TargetFormat, Crosswalk)>,
    transport: Arc<dyn Transport>,
}

impl Api {
    /// Loads the bundled crosswalks that read `schema`; those that do not
    /// fit a custom schema are left out.
    pub fn new(schema: Arc<SchemaDefinition>, transport: Arc<dyn Transport>) -> Self {
        let set = bundled::schema_set(schema.clone());
        let crosswalks = [
            (TargetFormat::CodemetaJson, bundled::ERSMETA_CODEMETA),
            (TargetFormat::CffYamlLike, bundled::ERSMETA_CFF),
        ]
        .into_iter()
        .filter_map(|(format, doc)| match load_crosswalk(doc, &set) {
            Ok(cw) => Some((format, cw)),
            Err(err) => {
                tracing::warn!("{} conversion disabled: {err}", format.as_str());
                None
            }
        })
        .collect();
        Api {
            schema_document: serialize_schema(&schema),
            schema,
            crosswalks,
            transport,
        }
    }

    pub fn schema(&self) -> &SchemaDefinition {
        &self.schema
    }

    pub fn schema_document(&self) -> &str {
        &self.schema_document
    }

    pub fn targets(&self) -> Vec<&'static str> {
        self.crosswalks.iter().map(|(f, _)| f.as_str()).collect()
    }

    pub fn crosswalk(&self, format: TargetFormat) -> Option<&Crosswalk> {
        self.crosswalks.iter().find(|(f, _)| *f == format).map(|(_, cw)| cw)
    }

    pub fn vocabulary(&self, id: &str) -> Result<String, ApiError> {
        self.schema
            .vocabulary(id)
            .map(serialize_vocabulary)
            .ok_or_else(|| ApiError::not_found(format!("no vocabulary `{id}`")))
    }

    pub fn extract(&self, body: &[u8]) -> Result<String, ApiError> {
        let body = object(body)?;
        let url = string_field(&body, "url")?;
        let ex = extract(url, self.transport.as_ref(), &self.schema)?;
        let record = to_json(&ex.record, &self.schema).map_err(|e| ApiError::invalid_record(&e))?;
        Ok(pretty(&json!({
            "record": reparse(&record),
            "extractionReport": reparse(&ex.report.to_json_string()),
        })))
    }

    pub fn validate(&self, body: &[u8]) -> Result<String, ApiError> {
        let parsed = self.record(body)?;
        Ok(validate_with(&parsed.record, &self.schema, Strictness::Lax, &parsed.unknowns).to_json_string())
    }

    pub fn completeness(&self, body: &[u8]) -> Result<String, ApiError> {
        let parsed = self.record(body)?;
        Ok(completeness(&parsed.record, &self.schema).to_json_string())
    }

    pub fn convert(&self, body: &[u8]) -> Result<String, ApiError> {
        let obj = object(body)?;
        let target = string_field(&obj, "target")?;
        let unknown = || {
            ApiError::bad_request("unknown_target", format!("cannot convert to `{target}`"))
                .with_detail(json!({ "supported": self.targets() }))
        };
        let format: TargetFormat = target.parse().map_err(|_| unknown())?;
        let crosswalk = self.crosswalk(format).ok_or_else(unknown)?;
        let record = self.record_field(&obj)?.record;
        let (document, report) = convert(&record, crosswalk, format)?;
        Ok(pretty(&json!({
            "document": document,
            "conversionReport": reparse(&report.to_json_string()),
        })))
    }

    /// The canonical record document and the file name to save it under.
    pub fn export(&self, body: &[u8]) -> Result<(String, String), ApiError> {
        let record = self.record(body)?.record;
        let document = to_json(&record, &self.schema).map_err(|e| ApiError::invalid_record(&e))?;
        Ok((export_file_name(&record), document))
    }

    fn record(&self, body: &[u8]) -> Result<Parsed, ApiError> {
        self.record_field(&object(body)?)
    }

    fn record_field(&self, body: &Map<String, Json>) -> Result<Parsed, ApiError> {
        let record = match body.get("record") {
            None | Some(Json::Null) => return Err(ApiError::missing_field("record")),
            Some(r) => r,
        };
        let text = serde_json::to_string(record).expect("JSON value serializes");
        from_json_with(&text, &self.schema, Strictness::Lax).map_err(|e| ApiError::invalid_record(&e))
    }
}

/// `<name>.metadata.json`, with characters unsafe in file names replaced.
pub fn export_file_name(record: &MetadataRecord) -> String {
    let name: String = record
        .first_str("name")
        .unwrap_or("record")
        .trim()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect();
    let name = name.trim_start_matches('.');
    format!("{}.metadata.json", if name.is_empty() { "record" } else { name })
}

fn object(body: &[u8]) -> Result<Map<String, Json>, ApiError> {
    match serde_json::from_slice(body) {
        Ok(Json::Object(map)) => Ok(map),
        Ok(_) => Err(ApiError::bad_request("invalid_body", "request body must be a JSON object")),
        Err(e) => Err(ApiError::bad_request("invalid_body", format!("request body is not JSON: {e}"))),
    }
}

fn string_field<'a>(body: &'a Map<String, Json>, field: &str) -> Result<&'a str, ApiError> {
    match body.get(field) {
        None | Some(Json::Null) => Err(ApiError::missing_field(field)),
        Some(Json::String(s)) => Ok(s),
        Some(_) => Err(ApiError::bad_request("invalid_body", format!("`{field}` must be a string"))),
    }
}

fn reparse(text: &str) -> Json {
    serde_json::from_str(text).expect("library output is JSON")
}

fn pretty(value: &Json) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("JSON value serializes");
    out.push('\n');
    out
}
