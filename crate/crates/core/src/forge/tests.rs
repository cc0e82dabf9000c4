use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use super::*;
use crate::bundled;
use crate::record::Value;
use crate::validate::{validate, Constraint};

fn fixtures() -> FixtureTransport {
    FixtureTransport::new(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/forge"))
}

fn github(owner: &str, repo: &str) -> ForgeRef {
    ForgeRef {
        forge: Forge::Github,
        host: "github.com".into(),
        owner: owner.into(),
        repo: repo.into(),
    }
}

fn strs(values: &[Value]) -> Vec<&str> {
    values.iter().filter_map(Value::as_str).collect()
}

fn family_names(values: &[Value]) -> Vec<String> {
    values
        .iter()
        .map(|v| match v {
            Value::Nested(n) => n.fields.get("familyName").and_then(|f| f[0].as_str()).unwrap_or("").to_string(),
            other => panic!("expected a person, got {other:?}"),
        })
        .collect()
}

/// Answers from a script and counts calls.
struct Scripted {
    answers: Mutex<Vec<Result<Response, TransportError>>>,
    calls: AtomicUsize,
}

impl Scripted {
    fn new(mut answers: Vec<Result<Response, TransportError>>) -> Arc<Self> {
        answers.reverse();
        Arc::new(Scripted {
            answers: Mutex::new(answers),
            calls: AtomicUsize::new(0),
        })
    }

    fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Transport for Arc<Scripted> {
    fn get(&self, _repo: &ForgeRef, _path: &str) -> Result<Response, TransportError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.answers.lock().unwrap().pop().expect("no scripted answer left")
    }
}

fn status(code: u16, headers: &[(&str, &str)]) -> Result<Response, TransportError> {
    Ok(Response {
        status: code,
        headers: headers
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect::<BTreeMap<_, _>>(),
        body: "{}".into(),
    })
}

fn recorded_sleep() -> (Arc<Mutex<Vec<Duration>>>, impl Fn(Duration) + Send + Sync + 'static) {
    let log = Arc::new(Mutex::new(Vec::new()));
    let sink = log.clone();
    (log, move |d| sink.lock().unwrap().push(d))
}

#[test]
fn parses_github_urls() {
    for url in [
        "https://github.com/acme/grid-sim",
        "https://github.com/acme/grid-sim/",
        "https://github.com/acme/grid-sim.git",
        "github.com/acme/grid-sim",
        "https://www.github.com/acme/grid-sim/tree/main/src",
        "http://github.com/acme/grid-sim/issues?q=1",
    ] {
        assert_eq!(parse_repo_url(url).unwrap(), github("acme", "grid-sim"), "{url}");
    }
}

#[test]
fn parses_gitlab_urls_with_groups() {
    let r = parse_repo_url("https://gitlab.com/a/b/c").unwrap();
    assert_eq!((r.forge, r.host.as_str(), r.owner.as_str(), r.repo.as_str()), (Forge::Gitlab, "gitlab.com", "a/b", "c"));
    let r = parse_repo_url("https://gitlab.com/energy-lab/tools/pv-forecast/-/tree/main").unwrap();
    assert_eq!((r.owner.as_str(), r.repo.as_str()), ("energy-lab/tools", "pv-forecast"));
    let r = parse_repo_url("https://gitlab.example-uni.de/ees/model.git").unwrap();
    assert_eq!((r.forge, r.host.as_str(), r.repo.as_str()), (Forge::Gitlab, "gitlab.example-uni.de", "model"));
}

#[test]
fn rejects_unsupported_and_malformed_urls() {
    assert_eq!(
        parse_repo_url("https://bitbucket.org/acme/grid-sim"),
        Err(ForgeError::UnsupportedHost("bitbucket.org".into()))
    );
    for url in ["", "https://github.com/acme", "ftp://github.com/acme/x", "https://", "not a url at all"] {
        assert!(matches!(parse_repo_url(url), Err(ForgeError::MalformedUrl(_))), "{url}");
    }
}

#[test]
fn unsupported_hosts_never_reach_the_transport() {
    let transport = Scripted::new(vec![]);
    let err = extract("https://bitbucket.org/acme/grid-sim", &transport, &bundled::ersmeta()).unwrap_err();
    assert_eq!(err, ForgeError::UnsupportedHost("bitbucket.org".into()));
    assert_eq!(transport.calls(), 0);
}

#[test]
fn fetches_github_fixture() {
    let raw = fetch_raw(&github("acme", "grid-sim"), &fixtures()).unwrap();
    assert_eq!(raw.forge, Forge::Github);
    assert_eq!(raw.topics, ["energy", "simulation"]);
    assert_eq!(raw.contributors.len(), 3);
    assert!(raw.latest_release.is_some());
    assert!(raw.notes.is_empty());
}

#[test]
fn grid_sim_maps_every_entry() {
    let schema = bundled::ersmeta();
    let ex = extract("https://github.com/acme/grid-sim", &fixtures(), &schema).unwrap();
    let r = &ex.record;
    assert_eq!(r.first_str("name"), Some("grid-sim"));
    assert_eq!(
        r.first_str("description"),
        Some("Agent-based simulation of distribution grids with flexible loads.")
    );
    assert_eq!(strs(r.get("keywords").unwrap()), ["energy", "simulation"]);
    assert_eq!(r.first_str("version"), Some("v1.4.2"));
    assert_eq!(r.first_str("url"), Some("https://grid-sim.readthedocs.io"));
    assert_eq!(r.first_str("codeRepository"), Some("https://github.com/acme/grid-sim"));
    assert_eq!(r.first_str("releaseNotes"), Some("Fixes voltage band check for low voltage feeders."));
    assert_eq!(strs(r.get("programmingLanguage").unwrap()), ["Python"]);
    assert_eq!(strs(r.get("license").unwrap()), ["MIT"]);
    assert_eq!(r.get("dateCreated").unwrap()[0], Value::Date(chrono::NaiveDate::from_ymd_opt(2021, 3, 14).unwrap()));
    assert_eq!(r.get("dateModified").unwrap()[0], Value::Date(chrono::NaiveDate::from_ymd_opt(2024, 10, 28).unwrap()));
    assert_eq!(family_names(r.get("author").unwrap()), ["alovelace", "cbabbage"]);
    assert_eq!(ex.report.extracted.len(), 12);
    assert_eq!(ex.report.extracted["license"], "licenseInfo.license.spdx_id");
    assert!(ex.report.skipped.is_empty());
    let report = validate(r, &schema);
    assert!(
        report.findings.iter().all(|f| matches!(f.constraint, Constraint::MissingMandatory | Constraint::MissingRecommended)),
        "{:?}",
        report.findings
    );
}

#[test]
fn missing_data_is_reported_not_invented() {
    let ex = extract("https://github.com/acme/no-release", &fixtures(), &bundled::ersmeta()).unwrap();
    let skipped: Vec<(&str, &str)> = ex
        .report
        .skipped
        .iter()
        .map(|s| (s.api_field.as_str(), s.reason.as_str()))
        .collect();
    for expected in [
        ("repoInfo.description", "null"),
        ("topics", "empty"),
        ("licenseInfo", "absent"),
        ("latestRelease", "absent"),
        ("contributors", "empty"),
        ("repoInfo.homepage", "empty"),
        ("repoInfo.language", "null"),
    ] {
        assert!(skipped.contains(&expected), "{expected:?} not in {skipped:?}");
    }
    assert_eq!(ex.report.notes, ["license: not available", "latest release: not available"]);
    for element in ["description", "keywords", "license", "version", "author", "url"] {
        assert!(ex.record.get(element).is_none(), "{element}");
    }
}

#[test]
fn gitlab_fixture_maps_members_and_license() {
    let ex = extract(
        "https://gitlab.com/energy-lab/tools/pv-forecast/-/tree/main",
        &fixtures(),
        &bundled::ersmeta(),
    )
    .unwrap();
    let authors = ex.record.get("author").unwrap();
    let names: Vec<(String, String)> = authors
        .iter()
        .map(|v| match v {
            Value::Nested(n) => (
                n.fields.get("givenName").unwrap()[0].as_str().unwrap().to_string(),
                n.fields.get("familyName").unwrap()[0].as_str().unwrap().to_string(),
            ),
            other => panic!("{other:?}"),
        })
        .collect();
    assert_eq!(
        names,
        [("Marie".to_string(), "Curie".to_string()), ("Nikola".to_string(), "Tesla".to_string())]
    );
    assert_eq!(strs(ex.record.get("license").unwrap()), ["apache-2.0"]);
    assert_eq!(ex.record.first_str("version"), Some("v0.9.0"));
}

#[test]
fn attribution_is_complete() {
    let schema = bundled::ersmeta();
    let mapping = bundled::forge_mapping();
    for url in [
        "https://github.com/acme/grid-sim",
        "https://github.com/acme/no-release",
        "https://gitlab.com/energy-lab/tools/pv-forecast",
    ] {
        let ex = extract(url, &fixtures(), &schema).unwrap();
        let filled: Vec<&str> = ex.record.values.keys().collect();
        let attributed: Vec<&str> = ex.report.extracted.keys().map(String::as_str).collect();
        assert_eq!(filled, attributed, "{url}");
        for entry in mapping.entries(ex.repository.forge) {
            let extracted = ex.report.extracted.contains_key(&entry.element);
            let skipped = ex
                .report
                .skipped
                .iter()
                .any(|s| entry.from.iter().any(|f| s.api_field == *f || f.starts_with(&format!("{}.", s.api_field))));
            assert!(extracted || skipped, "{url}: {} is unaccounted for", entry.element);
        }
    }
}

#[test]
fn missing_repository_is_not_found() {
    let err = extract("https://github.com/acme/ghost", &fixtures(), &bundled::ersmeta()).unwrap_err();
    assert_eq!(err, ForgeError::NotFound);
}

#[test]
fn throttled_repository_is_rate_limited() {
    let err = extract("https://github.com/acme/throttled", &fixtures(), &bundled::ersmeta()).unwrap_err();
    assert_eq!(err, ForgeError::RateLimited { retry_after: Some(60) });
}

#[test]
fn status_codes_map_to_errors() {
    let schema = bundled::ersmeta();
    let cases = [
        (status(401, &[]), ForgeError::Unauthorized { status: 401 }),
        (
            status(403, &[("x-ratelimit-remaining", "0")]),
            ForgeError::RateLimited { retry_after: None },
        ),
        (status(403, &[]), ForgeError::Unauthorized { status: 403 }),
        (
            status(502, &[]),
            ForgeError::Upstream {
                status: 502,
                path: "/repos/acme/x".into(),
            },
        ),
    ];
    for (answer, expected) in cases {
        let transport = Scripted::new(vec![answer; 5]);
        assert_eq!(extract("https://github.com/acme/x", &transport, &schema).unwrap_err(), expected);
    }
    let transport = Scripted::new(vec![Err(TransportError::Fatal("tls".into())); 5]);
    assert!(matches!(
        extract("https://github.com/acme/x", &transport, &schema),
        Err(ForgeError::Transport(_))
    ));
    let transport = Scripted::new(vec![Ok(Response {
        status: 200,
        headers: BTreeMap::new(),
        body: "not json".into(),
    }); 5]);
    assert!(matches!(
        extract("https://github.com/acme/x", &transport, &schema),
        Err(ForgeError::MalformedResponse(_))
    ));
}

#[test]
fn retries_transient_failures_once() {
    let inner = Scripted::new(vec![Err(TransportError::Transient("reset".into())), status(200, &[])]);
    let (log, sleep) = recorded_sleep();
    let t = RetryingTransport::new(inner.clone()).with_sleep(sleep);
    assert_eq!(t.get(&github("a", "b"), "/x").unwrap().status, 200);
    assert_eq!(inner.calls(), 2);
    assert_eq!(*log.lock().unwrap(), [Duration::from_millis(500)]);

    let inner = Scripted::new(vec![status(503, &[]), status(503, &[])]);
    let (_, sleep) = recorded_sleep();
    let t = RetryingTransport::new(inner.clone()).with_sleep(sleep);
    assert_eq!(t.get(&github("a", "b"), "/x").unwrap().status, 503);
    assert_eq!(inner.calls(), 2);
}

#[test]
fn waits_out_short_rate_limits_only() {
    let inner = Scripted::new(vec![status(429, &[("retry-after", "2")]), status(200, &[])]);
    let (log, sleep) = recorded_sleep();
    let t = RetryingTransport::new(inner.clone()).with_sleep(sleep);
    assert_eq!(t.get(&github("a", "b"), "/x").unwrap().status, 200);
    assert_eq!(*log.lock().unwrap(), [Duration::from_secs(2)]);

    let inner = Scripted::new(vec![status(429, &[("retry-after", "60")])]);
    let (log, sleep) = recorded_sleep();
    let t = RetryingTransport::new(inner.clone()).with_sleep(sleep);
    assert_eq!(t.get(&github("a", "b"), "/x").unwrap().status, 429);
    assert_eq!(inner.calls(), 1);
    assert!(log.lock().unwrap().is_empty());

    let inner = Scripted::new(vec![status(404, &[])]);
    let t = RetryingTransport::new(inner.clone()).with_sleep(|_| {});
    assert_eq!(t.get(&github("a", "b"), "/x").unwrap().status, 404);
    assert_eq!(inner.calls(), 1);
}

#[test]
fn fixture_paths_cannot_escape() {
    let t = fixtures();
    assert!(matches!(t.get(&github("a", "b"), "/../secrets"), Err(TransportError::Fatal(_))));
    let r = t.get(&github("a", "b"), "/repos/nobody/nothing").unwrap();
    assert_eq!(r.status, 404);
}

#[test]
fn ignored_values_and_bad_terms_are_skipped() {
    let schema = bundled::ersmeta();
    let raw = RawForgeData {
        forge: Forge::Github,
        repo_info: serde_json::json!({
            "name": "x",
            "html_url": "not an iri",
            "clone_url": "https://github.com/a/x.git",
            "language": "Brainfuck",
            "created_at": "yesterday"
        }),
        license_info: Some(serde_json::json!({"license": {"spdx_id": "NOASSERTION"}})),
        topics: vec![],
        latest_release: None,
        contributors: vec![serde_json::json!({"login": "bot", "type": "Bot"})],
        notes: vec![],
    };
    let (record, report) = map_to_record(&raw, &schema);
    assert_eq!(record.first_str("name"), Some("x"));
    assert!(record.get("license").is_none());
    assert!(record.get("programmingLanguage").is_none());
    assert!(record.get("dateCreated").is_none());
    assert!(record.get("author").is_none());
    let reasons: BTreeMap<&str, &str> = report
        .skipped
        .iter()
        .map(|s| (s.api_field.as_str(), s.reason.as_str()))
        .collect();
    assert!(reasons["repoInfo.language"].contains("Brainfuck"), "{reasons:?}");
    assert!(reasons.contains_key("repoInfo.created_at"), "{reasons:?}");
    assert!(reasons.contains_key("licenseInfo.license.spdx_id"), "{reasons:?}");
    assert_eq!(report.extracted.get("codeRepository").map(String::as_str), Some("repoInfo.clone_url"));
}
