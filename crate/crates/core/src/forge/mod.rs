//! Metadata extraction from GitHub and GitLab repositories.

mod fetch;
mod mapping;
mod transport;
mod url;

pub use fetch::{fetch_raw, RawForgeData};
pub use mapping::{
    map_to_record, map_to_record_with, Exclude, ExtractionReport, ForgeMapping, MappingEntry, SkippedField,
};
pub use transport::{FixtureTransport, HttpTransport, Response, RetryingTransport, Transport, TransportError};
pub use url::{parse_repo_url, Forge, ForgeRef};

use crate::record::MetadataRecord;
use crate::schema::SchemaDefinition;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ForgeError {
    #[error("malformed repository URL {0}")]
    MalformedUrl(String),
    #[error("unsupported forge host `{0}`")]
    UnsupportedHost(String),
    #[error("repository not found")]
    NotFound,
    #[error("forge rate limit reached{}", retry_after.map(|s| format!(", retry after {s} s")).unwrap_or_default())]
    RateLimited { retry_after: Option<u64> },
    #[error("forge refused access ({status})")]
    Unauthorized { status: u16 },
    #[error("forge answered {status} for {path}")]
    Upstream { status: u16, path: String },
    #[error("{0}")]
    Transport(String),
    #[error("malformed forge response: {0}")]
    MalformedResponse(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub repository: ForgeRef,
    pub record: MetadataRecord,
    pub report: ExtractionReport,
}

/// Resolves `url`, fetches its API data and maps it onto `schema`.
pub fn extract(url: &str, transport: &dyn Transport, schema: &SchemaDefinition) -> Result<Extraction, ForgeError> {
    let repository = parse_repo_url(url)?;
    let raw = fetch_raw(&repository, transport)?;
    let (record, report) = map_to_record(&raw, schema);
    Ok(Extraction {
        repository,
        record,
        report,
    })
}

#[cfg(test)]
mod tests;
