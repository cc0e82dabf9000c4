use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ersmeta_core::bundled;
use ersmeta_core::record::{from_json, to_json, to_turtle, MetadataRecord, Nested, Value};
use ersmeta_core::sample::conformant_record;
use ersmeta_core::validate::{completeness, validate};

fn core_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core")
}

fn ersmeta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ersmeta"))
        .args(args)
        .env_remove("ERSMETA_SCHEMA")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_record(dir: &Path, name: &str, record: &MetadataRecord) -> String {
    let schema = bundled::ersmeta();
    let path = dir.join(name);
    std::fs::write(&path, to_json(record, &schema).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn extract_writes_the_golden_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.json");
    let fixtures = core_dir().join("fixtures/forge");
    let o = ersmeta(&[
        "extract",
        "--url",
        "https://github.com/acme/grid-sim",
        "--fixtures",
        fixtures.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let golden = std::fs::read(core_dir().join("fixtures/golden/acme-grid-sim.metadata.json")).unwrap();
    assert_eq!(std::fs::read(&out).unwrap(), golden);
    assert!(String::from_utf8_lossy(&o.stderr).contains("12 elements extracted"));
}

#[test]
fn extract_exit_codes() {
    let o = ersmeta(&["extract"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));

    let fixtures = core_dir().join("fixtures/forge");
    let fixtures = fixtures.to_str().unwrap();
    let o = ersmeta(&["extract", "--url", "https://github.com/acme/ghost", "--fixtures", fixtures]);
    assert_eq!(o.status.code(), Some(3));
    let o = ersmeta(&["extract", "--url", "https://github.com/acme/throttled", "--fixtures", fixtures]);
    assert_eq!(o.status.code(), Some(3));

    let dir = tempfile::tempdir().unwrap();
    let blocked = dir.path().join("missing-dir").join("out.json");
    let o = ersmeta(&[
        "extract",
        "--url",
        "https://github.com/acme/grid-sim",
        "--fixtures",
        fixtures,
        "--out",
        blocked.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn validate_missing_name() {
    let schema = bundled::ersmeta();
    let dir = tempfile::tempdir().unwrap();
    let mut record = conformant_record(&schema);
    record.values.remove("name");
    let path = write_record(dir.path(), "r.json", &record);
    let o = ersmeta(&["validate", "--in", &path]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let violations: Vec<&str> = text.lines().filter(|l| l.starts_with("violation")).collect();
    assert_eq!(violations.len(), 1, "{text}");
    assert!(violations[0].contains("name"));

    let o = ersmeta(&["validate", "--in", &path, "--json"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), validate(&record, &schema).to_json_string());
}

#[test]
fn validate_conformant_turtle() {
    let schema = bundled::ersmeta();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.ttl");
    std::fs::write(&path, to_turtle(&conformant_record(&schema), &schema).unwrap()).unwrap();
    let o = ersmeta(&["validate", "--in", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().last().unwrap().starts_with("conformant:"));
}

#[test]
fn unknown_elements_depend_on_lax() {
    let schema = bundled::ersmeta();
    let dir = tempfile::tempdir().unwrap();
    let mut doc: serde_json::Value =
        serde_json::from_str(&to_json(&conformant_record(&schema), &schema).unwrap()).unwrap();
    doc["shoeSize"] = serde_json::json!(44);
    let path = dir.path().join("r.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    let path = path.to_str().unwrap();
    assert_eq!(ersmeta(&["validate", "--in", path]).status.code(), Some(1));
    let o = ersmeta(&["validate", "--in", path, "--lax"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l.starts_with("warning") && l.contains("shoeSize")));
}

#[test]
fn unreadable_input_exits_3() {
    let o = ersmeta(&["validate", "--in", "/nonexistent/record.json"]);
    assert_eq!(o.status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{").unwrap();
    assert_eq!(ersmeta(&["score", "--in", path.to_str().unwrap()]).status.code(), Some(3));
    let o = ersmeta(&["--schema", "/nonexistent/schema.json", "score", "--in", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn score_on_conformant_record() {
    let schema = bundled::ersmeta();
    let dir = tempfile::tempdir().unwrap();
    let record = conformant_record(&schema);
    let path = write_record(dir.path(), "r.json", &record);
    let o = ersmeta(&["score", "--in", &path]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row: Vec<&str> = text
        .lines()
        .find(|l| l.starts_with("mandatory "))
        .unwrap()
        .split_whitespace()
        .collect();
    assert_eq!(row[1], row[2], "{text}");
    assert_eq!(row[3], "100.0%");

    let o = ersmeta(&["score", "--in", &path, "--json"]);
    assert_eq!(stdout(&o), completeness(&record, &schema).to_json_string());
}

#[test]
fn convert_to_cff() {
    let dir = tempfile::tempdir().unwrap();
    let person = Nested::new("person")
        .with("givenName", Value::text("Ada"))
        .with("familyName", Value::text("Lovelace"));
    let record = MetadataRecord::new("ersmeta")
        .with("name", Value::text("engine"))
        .with("author", Value::Nested(person));
    let input = write_record(dir.path(), "r.json", &record);
    let out = dir.path().join("CITATION.cff");
    let o = ersmeta(&["convert", "--in", &input, "--to", "cff", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let cff = std::fs::read_to_string(&out).unwrap();
    assert!(cff.contains("family-names: Lovelace"), "{cff}");
    assert!(cff.contains("title: engine"));

    let o = ersmeta(&["convert", "--in", &input, "--to", "codemeta"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["name"], "engine");

    assert_eq!(ersmeta(&["convert", "--in", &input, "--to", "xml"]).status.code(), Some(2));
}

#[test]
fn schema_comes_from_flag_or_environment() {
    let dir = tempfile::tempdir().unwrap();
    let schema_path = dir.path().join("toy.json");
    std::fs::write(
        &schema_path,
        r#"{"id": "toy", "version": "1",
            "areas": [{"id": "a", "label": "A", "description": "."}],
            "elements": [
              {"id": "title", "label": "Title", "description": ".", "tier": "mandatory", "area": "a",
               "valueType": "text", "multiValued": false, "provenance": "new"},
              {"id": "note", "label": "Note", "description": ".", "tier": "optional", "area": "a",
               "valueType": "text", "multiValued": false, "provenance": "new"}],
            "namespaces": {"toy": "https://example.org/toy#"}}"#,
    )
    .unwrap();
    let record = dir.path().join("r.json");
    std::fs::write(&record, r#"{"note": "hi"}"#).unwrap();
    let schema = schema_path.to_str().unwrap();
    let record = record.to_str().unwrap();

    let o = ersmeta(&["--schema", schema, "validate", "--in", record]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).lines().any(|l| l.starts_with("violation") && l.contains("title")));

    let o = Command::new(env!("CARGO_BIN_EXE_ersmeta"))
        .args(["score", "--in", record])
        .env("ERSMETA_SCHEMA", schema)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l.starts_with("optional") && l.contains("1")));

    let o = ersmeta(&["--schema", schema, "convert", "--in", record, "--to", "cff"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_record_reads_back() {
    let schema = bundled::ersmeta();
    let fixtures = core_dir().join("fixtures/forge");
    let o = ersmeta(&[
        "extract",
        "--url",
        "gitlab.com/energy-lab/tools/pv-forecast",
        "--fixtures",
        fixtures.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let record = from_json(&stdout(&o), &schema).unwrap();
    assert_eq!(record.first_str("version"), Some("v0.9.0"));
}
