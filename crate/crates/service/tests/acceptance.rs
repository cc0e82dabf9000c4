//! One line per acceptance criterion, each checked at its stated tolerance
//! and time budget. Exits non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{header, Request};
use axum::Router;
use ersmeta_core::crosswalk::{convert, convert_record, Crosswalk, TargetFormat};
use ersmeta_core::forge::{extract, FixtureTransport};
use ersmeta_core::record::{from_json, from_json_with, from_turtle, to_json, to_turtle, Strictness};
use ersmeta_core::sample::{conformant_record, RecordGenerator};
use ersmeta_core::schema::{schema_stats, serialize_schema, serialize_vocabulary, Tier};
use ersmeta_core::validate::{completeness, validate, validate_with};
use ersmeta_core::{bundled, MetadataRecord, SchemaDefinition};
use ersmeta_service::{router, transport, Api};
use http_body_util::BodyExt;
use serde_json::{json, Value as Json};
use tower::ServiceExt;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn core_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core")
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn generated(schema: &SchemaDefinition, seed: u64) -> MetadataRecord {
    let fill = 0.05 + (seed % 10) as f64 / 10.0;
    RecordGenerator::new(schema, seed).with_fill(fill).record()
}

/// Top-level keys of the rendered document, read back as plain JSON.
fn document_keys(record: &MetadataRecord, schema: &SchemaDefinition) -> Vec<String> {
    let doc: Json = serde_json::from_str(&to_json(record, schema).unwrap()).unwrap();
    doc.as_object()
        .unwrap()
        .iter()
        .filter(|(k, v)| !k.starts_with('@') && !v.is_null())
        .map(|(k, _)| k.clone())
        .collect()
}

fn schema_structure() -> Outcome {
    let schema = bundled::ersmeta();
    let stats = schema_stats(&schema);
    let manifest = bundled::manifest();
    ensure(stats == manifest.stats, || format!("stats differ from manifest: {stats:?}"))?;
    let tiers: Vec<usize> = Tier::ALL.iter().map(|t| stats.per_tier[t]).collect();
    let observed = (
        stats.top_level_count,
        stats.sub_schema_count,
        stats.sub_schema_field_count,
        tiers.clone(),
        stats.area_count,
    );
    ensure(observed == (86, 16, 48, vec![19, 54, 85], 10), || format!("{observed:?}"))?;
    Ok(format!("86 elements, 16 sub-schemas / 48 fields, tiers {tiers:?}, 10 areas"))
}

fn single_removal() -> Outcome {
    let schema = bundled::ersmeta();
    let full = conformant_record(&schema);
    ensure(validate(&full, &schema).conformant, || "baseline record is not conformant".into())?;
    let mandatory: Vec<&str> = schema
        .elements
        .iter()
        .filter(|e| e.tier == Tier::Mandatory)
        .map(|e| e.id.as_str())
        .collect();
    for id in &mandatory {
        let mut record = full.clone();
        let removed = record.values.remove(id).ok_or_else(|| format!("{id} missing from baseline"))?;
        let report = validate(&record, &schema);
        let violations: Vec<_> = report.violations().collect();
        ensure(violations.len() == 1 && violations[0].element_path == *id && !report.conformant, || {
            format!("removing {id}: {violations:?}")
        })?;
        record.values.insert(*id, removed);
        ensure(validate(&record, &schema).conformant, || format!("restoring {id} did not restore conformance"))?;
    }
    Ok(format!("{} mandatory elements", mandatory.len()))
}

fn dual_format_round_trip() -> Outcome {
    let schema = bundled::ersmeta();
    for seed in 0..500 {
        let record = generated(&schema, seed);
        let json = to_json(&record, &schema).map_err(|e| e.to_string())?;
        let back = from_json(&json, &schema).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(back == record, || format!("seed {seed}: JSON round trip differs"))?;
        let ttl = to_turtle(&record, &schema).map_err(|e| e.to_string())?;
        let back = from_turtle(&ttl, &schema).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(back == record, || format!("seed {seed}: Turtle round trip differs"))?;
    }
    Ok("500 records".into())
}

fn crosswalk_accounting() -> Outcome {
    let schema = bundled::ersmeta();
    let set = bundled::schema_set(schema.clone());
    let crosswalks: Vec<Crosswalk> = vec![
        bundled::crosswalk_codemeta(&set).map_err(|e| e.to_string())?,
        bundled::crosswalk_cff(&set).map_err(|e| e.to_string())?,
    ];
    for seed in 0..200 {
        let cw = &crosswalks[(seed % 2) as usize];
        let record = generated(&schema, 10_000 + seed);
        let keys = document_keys(&record, &schema);
        let (_, report) = convert_record(&record, cw).map_err(|e| e.to_string())?;
        ensure(report.mapped.len() + report.dropped.len() == keys.len(), || {
            format!(
                "seed {seed}: mapped {} + dropped {} != filled {}",
                report.mapped.len(),
                report.dropped.len(),
                keys.len()
            )
        })?;
        let core = cw.bidirectional_core();
        let mut restricted = MetadataRecord::new(&record.schema_id);
        for (k, v) in record.values.iter().filter(|(k, _)| core.contains(k)) {
            restricted.values.insert(k, v.to_vec());
        }
        let (there, _) = convert_record(&restricted, cw).map_err(|e| e.to_string())?;
        let (back, _) = convert_record(&there, &cw.inverse()).map_err(|e| e.to_string())?;
        ensure(back == restricted, || format!("seed {seed}: core round trip differs"))?;
    }
    Ok("200 records over codemeta and cff".into())
}

fn extraction_golden() -> Outcome {
    let schema = bundled::ersmeta();
    let fixtures = FixtureTransport::new(core_dir().join("fixtures/forge"));
    let golden = std::fs::read_to_string(core_dir().join("fixtures/golden/acme-grid-sim.metadata.json"))
        .map_err(|e| e.to_string())?;
    let ex = extract("https://github.com/acme/grid-sim", &fixtures, &schema).map_err(|e| e.to_string())?;
    let produced = to_json(&ex.record, &schema).map_err(|e| e.to_string())?;
    ensure(produced == golden, || "record differs from golden file".into())?;
    let keys = document_keys(&ex.record, &schema);
    let unattributed: Vec<&String> = keys.iter().filter(|k| !ex.report.extracted.contains_key(*k)).collect();
    ensure(unattributed.is_empty(), || format!("unattributed: {unattributed:?}"))?;
    Ok(format!("{} bytes, {} attributed elements", golden.len(), keys.len()))
}

fn completeness_oracle() -> Outcome {
    let schema = bundled::ersmeta();
    let raw: Json = serde_json::from_str(bundled::ERSMETA_SCHEMA).map_err(|e| e.to_string())?;
    let tier_of: BTreeMap<String, String> = raw["elements"]
        .as_array()
        .ok_or("schema has no elements")?
        .iter()
        .map(|e| (e["id"].as_str().unwrap().to_string(), e["tier"].as_str().unwrap().to_string()))
        .collect();
    for seed in 0..100 {
        let record = generated(&schema, 20_000 + seed);
        let keys = document_keys(&record, &schema);
        let report = completeness(&record, &schema);
        for tier in Tier::ALL {
            let name = tier.as_str();
            let total = tier_of.values().filter(|t| *t == name).count();
            let filled = keys.iter().filter(|k| tier_of.get(*k).map(String::as_str) == Some(name)).count();
            let fill = report.per_tier[&tier];
            ensure(fill.filled == filled && fill.total == total, || {
                format!("seed {seed} {name}: {fill:?} vs {filled}/{total}")
            })?;
        }
    }
    Ok("100 records".into())
}

async fn body_of(app: &Router, method: &str, uri: &str, body: Option<&Json>) -> String {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    String::from_utf8(bytes.to_vec()).unwrap()
}

fn pretty(value: &Json) -> String {
    serde_json::to_string_pretty(value).unwrap() + "\n"
}

fn service_parity() -> Outcome {
    let schema = bundled::ersmeta();
    let fixtures = core_dir().join("fixtures/forge");
    let app = router(Arc::new(Api::new(schema.clone(), transport(Some(fixtures.clone())))));
    let set = bundled::schema_set(schema.clone());
    let codemeta = bundled::crosswalk_codemeta(&set).map_err(|e| e.to_string())?;
    let cff = bundled::crosswalk_cff(&set).map_err(|e| e.to_string())?;
    let transport = FixtureTransport::new(fixtures);

    let mut records: Vec<Json> = (0..20)
        .map(|seed| serde_json::from_str(&to_json(&generated(&schema, 30_000 + seed), &schema).unwrap()).unwrap())
        .collect();
    records.push(json!({"name": "demo"}));
    records.push(json!({"name": "demo", "somethingElse": [1, 2]}));

    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let mut checked = 0;
    let mut check = |endpoint: &str, served: String, expected: String| {
        checked += 1;
        ensure(served == expected, || format!("{endpoint} differs from the library output"))
    };

    check(
        "GET /api/schema",
        runtime.block_on(body_of(&app, "GET", "/api/schema", None)),
        serialize_schema(&schema),
    )?;
    for vocab in &schema.vocabularies {
        let uri = format!("/api/vocabularies/{}", vocab.id);
        check(&uri, runtime.block_on(body_of(&app, "GET", &uri, None)), serialize_vocabulary(vocab))?;
    }
    for url in [
        "https://github.com/acme/grid-sim",
        "https://github.com/acme/no-release",
        "https://gitlab.com/energy-lab/tools/pv-forecast",
    ] {
        let ex = extract(url, &transport, &schema).map_err(|e| e.to_string())?;
        let expected = pretty(&json!({
            "record": serde_json::from_str::<Json>(&to_json(&ex.record, &schema).unwrap()).unwrap(),
            "extractionReport": serde_json::from_str::<Json>(&ex.report.to_json_string()).unwrap(),
        }));
        let served = runtime.block_on(body_of(&app, "POST", "/api/extract", Some(&json!({ "url": url }))));
        check("POST /api/extract", served, expected)?;
    }
    for doc in &records {
        let text = doc.to_string();
        let parsed = from_json_with(&text, &schema, Strictness::Lax).map_err(|e| e.to_string())?;
        let body = json!({ "record": doc });

        let expected = validate_with(&parsed.record, &schema, Strictness::Lax, &parsed.unknowns).to_json_string();
        check("POST /api/validate", runtime.block_on(body_of(&app, "POST", "/api/validate", Some(&body))), expected)?;

        let expected = completeness(&parsed.record, &schema).to_json_string();
        let served = runtime.block_on(body_of(&app, "POST", "/api/completeness", Some(&body)));
        check("POST /api/completeness", served, expected)?;

        let expected = to_json(&parsed.record, &schema).map_err(|e| e.to_string())?;
        check("POST /api/export", runtime.block_on(body_of(&app, "POST", "/api/export", Some(&body))), expected)?;

        for (target, cw, format) in [
            ("codemeta-json", &codemeta, TargetFormat::CodemetaJson),
            ("cff", &cff, TargetFormat::CffYamlLike),
        ] {
            let (document, report) = convert(&parsed.record, cw, format).map_err(|e| e.to_string())?;
            let expected = pretty(&json!({
                "document": document,
                "conversionReport": serde_json::from_str::<Json>(&report.to_json_string()).unwrap(),
            }));
            let body = json!({ "record": doc, "target": target });
            let served = runtime.block_on(body_of(&app, "POST", "/api/convert", Some(&body)));
            check("POST /api/convert", served, expected)?;
        }
    }
    Ok(format!("{checked} responses"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("schema structure", Duration::from_secs(1), schema_structure),
        ("validator single-removal", Duration::from_secs(5), single_removal),
        ("dual-format round trip", Duration::from_secs(30), dual_format_round_trip),
        ("crosswalk accounting", Duration::from_secs(10), crosswalk_accounting),
        ("extraction golden", Duration::from_secs(1), extraction_golden),
        ("completeness oracle", Duration::from_secs(5), completeness_oracle),
        ("service parity", Duration::from_secs(10), service_parity),
    ];
    let mut failed = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over budget")),
            Err(e) => (false, e),
        };
        failed += usize::from(!ok);
        println!(
            "{} {name} [{:.3}s / {}s] {detail}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
