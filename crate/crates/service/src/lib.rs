//! HTTP backend exposing schema, extraction, validation, completeness,
//! conversion and export. Stateless: records live only in the client.

pub mod api;
pub mod error;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{Path, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use ersmeta_core::forge::{FixtureTransport, HttpTransport, RetryingTransport, Transport};
use ersmeta_core::SchemaDefinition;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use api::Api;
pub use error::ApiError;

#[derive(Debug, Clone)]
pub struct Config {
    pub addr: SocketAddr,
    pub schema: Arc<SchemaDefinition>,
    /// Serve recorded forge responses from this directory instead of the network.
    pub fixtures: Option<PathBuf>,
    /// Origins allowed by CORS; empty allows any origin.
    pub allow_origins: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("invalid origin `{0}`")]
    Origin(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn transport(fixtures: Option<PathBuf>) -> Arc<dyn Transport> {
    match fixtures {
        Some(dir) => Arc::new(FixtureTransport::new(dir)),
        None => Arc::new(RetryingTransport::new(HttpTransport::default())),
    }
}

pub fn cors(origins: &[String]) -> Result<CorsLayer, ServeError> {
    let allow = if origins.is_empty() {
        AllowOrigin::any()
    } else {
        let list = origins
            .iter()
            .map(|o| HeaderValue::from_str(o).map_err(|_| ServeError::Origin(o.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        AllowOrigin::list(list)
    };
    Ok(CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE])
        .expose_headers([header::CONTENT_DISPOSITION, header::RETRY_AFTER]))
}

pub fn router(api: Arc<Api>) -> Router {
    Router::new()
        .route("/api/schema", get(schema))
        .route("/api/vocabularies/{id}", get(vocabulary))
        .route("/api/extract", post(extract))
        .route("/api/validate", post(validate))
        .route("/api/completeness", post(completeness))
        .route("/api/convert", post(convert))
        .route("/api/export", post(export))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .method_not_allowed_fallback(|| async {
            ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed here")
        })
        .with_state(api)
}

/// Binds `config.addr` and serves until Ctrl-C.
pub async fn serve(config: Config) -> Result<(), ServeError> {
    let api = Arc::new(Api::new(config.schema, transport(config.fixtures)));
    let app = router(api).layer(cors(&config.allow_origins)?);
    let listener = tokio::net::TcpListener::bind(config.addr).await?;
    tracing::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

type Body = Result<Bytes, BytesRejection>;

fn json(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn bytes(body: Body) -> Result<Bytes, ApiError> {
    body.map_err(|e| ApiError::new(e.status(), "invalid_body", e.body_text()))
}

fn respond(result: Result<String, ApiError>) -> Response {
    match result {
        Ok(body) => json(body),
        Err(e) => e.into_response(),
    }
}

async fn schema(State(api): State<Arc<Api>>) -> Response {
    json(api.schema_document().to_string())
}

async fn vocabulary(State(api): State<Arc<Api>>, Path(id): Path<String>) -> Response {
    respond(api.vocabulary(&id))
}

async fn extract(State(api): State<Arc<Api>>, body: Body) -> Response {
    let body = match bytes(body) {
        Ok(b) => b,
        Err(e) => return e.into_response(),
    };
    let result = tokio::task::spawn_blocking(move || api.extract(&body))
        .await
        .unwrap_or_else(|e| Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())));
    respond(result)
}

async fn validate(State(api): State<Arc<Api>>, body: Body) -> Response {
    respond(bytes(body).and_then(|b| api.validate(&b)))
}

async fn completeness(State(api): State<Arc<Api>>, body: Body) -> Response {
    respond(bytes(body).and_then(|b| api.completeness(&b)))
}

async fn convert(State(api): State<Arc<Api>>, body: Body) -> Response {
    respond(bytes(body).and_then(|b| api.convert(&b)))
}

async fn export(State(api): State<Arc<Api>>, body: Body) -> Response {
    match bytes(body).and_then(|b| api.export(&b)) {
        Ok((file_name, document)) => {
            let disposition = format!("attachment; filename=\"{file_name}\"");
            let mut response = json(document);
            if let Ok(value) = HeaderValue::from_str(&disposition) {
                response.headers_mut().insert(header::CONTENT_DISPOSITION, value);
            }
            response
        }
        Err(e) => e.into_response(),
    }
}
