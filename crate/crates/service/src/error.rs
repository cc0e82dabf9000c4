use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use ersmeta_core::crosswalk::ConvertError;
use ersmeta_core::forge::ForgeError;
use ersmeta_core::record::RecordError;
use serde_json::{json, Map, Value as Json};

/// Body of every non-2xx response.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub detail: Option<Box<Json>>,
    pub retry_after: Option<u32>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            detail: None,
            retry_after: None,
        }
    }

    pub fn with_detail(mut self, detail: Json) -> Self {
        self.detail = Some(Box::new(detail));
        self
    }

    pub fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn missing_field(field: &str) -> Self {
        ApiError::bad_request("missing_field", format!("request body needs a `{field}` field"))
            .with_detail(json!({ "field": field }))
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn invalid_record(err: &RecordError) -> Self {
        ApiError::bad_request("invalid_record", err.to_string())
    }

    /// The JSON body, with keys in a fixed order.
    pub fn body(&self) -> String {
        let mut map = Map::new();
        map.insert("code".into(), Json::from(self.code));
        map.insert("message".into(), Json::from(self.message.clone()));
        if let Some(detail) = &self.detail {
            map.insert("detail".into(), (**detail).clone());
        }
        let mut out = serde_json::to_string_pretty(&map).expect("error serializes");
        out.push('\n');
        out
    }
}

impl From<ForgeError> for ApiError {
    fn from(err: ForgeError) -> Self {
        let message = err.to_string();
        match err {
            ForgeError::MalformedUrl(_) => ApiError::bad_request("malformed_url", message),
            ForgeError::UnsupportedHost(host) => {
                ApiError::bad_request("unsupported_forge", message).with_detail(json!({ "host": host }))
            }
            ForgeError::NotFound => ApiError::new(StatusCode::NOT_FOUND, "repository_not_found", message),
            ForgeError::RateLimited { retry_after } => ApiError {
                retry_after: retry_after.map(|s| u32::try_from(s).unwrap_or(u32::MAX)),
                ..ApiError::new(StatusCode::TOO_MANY_REQUESTS, "rate_limited", message)
            },
            ForgeError::Unauthorized { status } => ApiError::new(StatusCode::BAD_GATEWAY, "forge_unauthorized", message)
                .with_detail(json!({ "status": status })),
            ForgeError::Upstream { status, path } => ApiError::new(StatusCode::BAD_GATEWAY, "upstream_error", message)
                .with_detail(json!({ "status": status, "path": path })),
            ForgeError::Transport(_) => ApiError::new(StatusCode::BAD_GATEWAY, "transport_error", message),
            ForgeError::MalformedResponse(_) => ApiError::new(StatusCode::BAD_GATEWAY, "malformed_upstream", message),
        }
    }
}

impl From<ConvertError> for ApiError {
    fn from(err: ConvertError) -> Self {
        match &err {
            ConvertError::Record(e) => ApiError::invalid_record(e),
            _ => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", err.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut response = (
            self.status,
            [(header::CONTENT_TYPE, HeaderValue::from_static("application/json"))],
            self.body(),
        )
            .into_response();
        if let Some(secs) = self.retry_after {
            response.headers_mut().insert(header::RETRY_AFTER, HeaderValue::from(secs));
        }
        response
    }
}
