use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, HeaderMap, Request, StatusCode};
use axum::Router;
use ersmeta_core::bundled;
use ersmeta_core::record::to_json;
use ersmeta_core::sample::conformant_record;
use ersmeta_service::{router, transport, Api};
use http_body_util::BodyExt;
use serde_json::{json, Value as Json};
use tower::ServiceExt;

fn core_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core")
}

fn app() -> Router {
    let api = Api::new(bundled::ersmeta(), transport(Some(core_dir().join("fixtures/forge"))));
    router(Arc::new(api))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Json>) -> (StatusCode, HeaderMap, String) {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let headers = response.headers().clone();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, headers, String::from_utf8(bytes.to_vec()).unwrap())
}

fn parse(body: &str) -> Json {
    serde_json::from_str(body).unwrap()
}

fn conformant_json() -> Json {
    let schema = bundled::ersmeta();
    parse(&to_json(&conformant_record(&schema), &schema).unwrap())
}

#[tokio::test]
async fn schema_lists_ten_areas_and_is_stable() {
    let app = app();
    let (status, _, first) = call(&app, "GET", "/api/schema", None).await;
    assert_eq!(status, StatusCode::OK);
    let (_, _, second) = call(&app, "GET", "/api/schema", None).await;
    assert_eq!(first, second);
    let doc = parse(&first);
    assert_eq!(doc["areas"].as_array().unwrap().len(), 10);
    assert_eq!(doc["elements"].as_array().unwrap().len(), 86);
}

#[tokio::test]
async fn every_vocabulary_reference_resolves() {
    let app = app();
    let (_, _, body) = call(&app, "GET", "/api/schema", None).await;
    let doc = parse(&body);
    let mut refs: Vec<String> = Vec::new();
    let mut stack = vec![&doc];
    while let Some(v) = stack.pop() {
        match v {
            Json::Object(map) => {
                if let Some(Json::String(r)) = map.get("vocabularyRef") {
                    refs.push(r.clone());
                }
                stack.extend(map.values());
            }
            Json::Array(items) => stack.extend(items),
            _ => {}
        }
    }
    assert!(!refs.is_empty());
    for id in refs {
        let (status, _, body) = call(&app, "GET", &format!("/api/vocabularies/{id}"), None).await;
        assert_eq!(status, StatusCode::OK, "{id}");
        assert_eq!(parse(&body)["id"], id.as_str());
    }
    let (status, _, body) = call(&app, "GET", "/api/vocabularies/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(parse(&body)["code"], "not_found");
}

#[tokio::test]
async fn extraction_returns_the_golden_record() {
    let app = app();
    let body = json!({"url": "https://github.com/acme/grid-sim"});
    let (status, _, text) = call(&app, "POST", "/api/extract", Some(body)).await;
    assert_eq!(status, StatusCode::OK);
    let response = parse(&text);
    let golden = std::fs::read_to_string(core_dir().join("fixtures/golden/acme-grid-sim.metadata.json")).unwrap();
    assert_eq!(response["record"], parse(&golden));
    assert_eq!(response["extractionReport"]["extracted"].as_object().unwrap().len(), 12);
}

#[tokio::test]
async fn extraction_errors_carry_codes() {
    let app = app();
    let cases = [
        (json!({"url": "https://bitbucket.org/a/b"}), StatusCode::BAD_REQUEST, "unsupported_forge"),
        (json!({}), StatusCode::BAD_REQUEST, "missing_field"),
        (json!({"url": 5}), StatusCode::BAD_REQUEST, "invalid_body"),
        (json!({"url": "https://github.com/acme"}), StatusCode::BAD_REQUEST, "malformed_url"),
        (json!({"url": "https://github.com/acme/ghost"}), StatusCode::NOT_FOUND, "repository_not_found"),
        (json!({"url": "https://github.com/acme/throttled"}), StatusCode::TOO_MANY_REQUESTS, "rate_limited"),
    ];
    for (body, expected_status, code) in cases {
        let (status, headers, text) = call(&app, "POST", "/api/extract", Some(body.clone())).await;
        assert_eq!(status, expected_status, "{body}");
        let err = parse(&text);
        assert_eq!(err["code"], code, "{body}");
        assert!(err["message"].is_string());
        if code == "rate_limited" {
            assert_eq!(headers[header::RETRY_AFTER], "60");
        }
        if code == "missing_field" {
            assert_eq!(err["detail"]["field"], "url");
        }
    }
}

#[tokio::test]
async fn validate_reports_missing_name() {
    let app = app();
    let mut record = conformant_json();
    record.as_object_mut().unwrap().remove("name");
    let (status, _, text) = call(&app, "POST", "/api/validate", Some(json!({ "record": record }))).await;
    assert_eq!(status, StatusCode::OK);
    let report = parse(&text);
    assert_eq!(report["conformant"], false);
    let violations: Vec<&Json> = report["findings"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|f| f["severity"] == "violation")
        .collect();
    assert_eq!(violations.len(), 1);
    assert_eq!(violations[0]["elementPath"], "name");
}

#[tokio::test]
async fn unknown_fields_are_reported_not_rejected() {
    let app = app();
    let mut record = conformant_json();
    record["favouriteColour"] = json!("teal");
    let (status, _, text) = call(&app, "POST", "/api/validate", Some(json!({ "record": record }))).await;
    assert_eq!(status, StatusCode::OK);
    let findings = parse(&text)["findings"].as_array().unwrap().clone();
    let last = findings.last().unwrap();
    assert_eq!(last["elementPath"], "favouriteColour");
    assert_eq!(last["constraint"], "unknownElement");
    assert_eq!(last["severity"], "warning");
}

#[tokio::test]
async fn bad_records_and_bodies_are_rejected() {
    let app = app();
    let (status, _, text) = call(&app, "POST", "/api/validate", Some(json!({"record": {"name": 5}}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(parse(&text)["code"], "invalid_record");
    let (status, _, text) = call(&app, "POST", "/api/completeness", Some(json!({}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(parse(&text)["code"], "missing_field");
    let request = Request::builder()
        .method("POST")
        .uri("/api/validate")
        .body(Body::from("{not json"))
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    assert_eq!(response.status(), StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn every_error_is_an_api_error() {
    let app = app();
    for (method, uri) in [("GET", "/nowhere"), ("GET", "/api/validate"), ("POST", "/api/schema")] {
        let (status, _, text) = call(&app, method, uri, None).await;
        assert!(status.is_client_error(), "{method} {uri}");
        let err = parse(&text);
        assert!(err["code"].is_string() && err["message"].is_string(), "{method} {uri}: {text}");
    }
}

#[tokio::test]
async fn convert_to_codemeta_and_unknown_target() {
    let app = app();
    let body = json!({"record": {"name": "demo"}, "target": "codemeta-json"});
    let (status, _, text) = call(&app, "POST", "/api/convert", Some(body)).await;
    assert_eq!(status, StatusCode::OK);
    let response = parse(&text);
    assert!(response["document"].as_str().unwrap().contains("\"name\": \"demo\""));
    assert_eq!(response["conversionReport"]["mapped"][0]["sourcePath"], "name");

    let body = json!({"record": {"name": "demo"}, "target": "rdf-xml"});
    let (status, _, text) = call(&app, "POST", "/api/convert", Some(body)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let err = parse(&text);
    assert_eq!(err["code"], "unknown_target");
    assert_eq!(err["detail"]["supported"], json!(["codemeta-json", "cff-yaml-like"]));
}

#[tokio::test]
async fn export_names_the_file() {
    let app = app();
    let record = conformant_json();
    let (status, headers, text) = call(&app, "POST", "/api/export", Some(json!({ "record": record }))).await;
    assert_eq!(status, StatusCode::OK);
    let name = record["name"].as_str().unwrap().replace(' ', "_");
    assert_eq!(
        headers[header::CONTENT_DISPOSITION],
        format!("attachment; filename=\"{name}.metadata.json\"").as_str()
    );
    let schema = bundled::ersmeta();
    assert_eq!(text, to_json(&conformant_record(&schema), &schema).unwrap());
}

#[tokio::test]
async fn requests_replay_identically() {
    let app = app();
    let requests = [
        ("POST", "/api/extract", Some(json!({"url": "https://github.com/acme/no-release"}))),
        ("POST", "/api/validate", Some(json!({"record": {"name": "x"}}))),
        ("POST", "/api/completeness", Some(json!({"record": {"name": "x"}}))),
        ("GET", "/api/schema", None),
    ];
    let mut first = Vec::new();
    for (m, u, b) in &requests {
        first.push(call(&app, m, u, b.clone()).await.2);
    }
    for (i, (m, u, b)) in requests.iter().enumerate().rev() {
        assert_eq!(call(&app, m, u, b.clone()).await.2, first[i], "{u}");
    }
}

#[tokio::test]
async fn cors_allows_configured_origin() {
    let app = app().layer(ersmeta_service::cors(&["http://localhost:5173".to_string()]).unwrap());
    let request = Request::builder()
        .method("OPTIONS")
        .uri("/api/validate")
        .header(header::ORIGIN, "http://localhost:5173")
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
        .body(Body::empty())
        .unwrap();
    let response = app.oneshot(request).await.unwrap();
    assert_eq!(response.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN], "http://localhost:5173");
    assert!(ersmeta_service::cors(&["bad\norigin".to_string()]).is_err());
}
