use std::fmt::Write as _;

use ersmeta_core::validate::{CompletenessReport, Fill, Severity, ValidationReport};
use ersmeta_core::SchemaDefinition;

/// Left-aligned columns separated by two spaces; numbers right-aligned.
fn render(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c > 0 {
                line.push_str("  ");
            }
            let pad = widths[c] - cell.chars().count();
            if cell.chars().next().is_some_and(|ch| ch.is_ascii_digit()) {
                line.push_str(&" ".repeat(pad));
                line.push_str(cell);
            } else if c + 1 < row.len() {
                line.push_str(cell);
                line.push_str(&" ".repeat(pad));
            } else {
                line.push_str(cell);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn severity(s: Severity) -> &'static str {
    match s {
        Severity::Violation => "violation",
        Severity::Warning => "warning",
        Severity::Info => "info",
    }
}

pub fn findings(report: &ValidationReport) -> String {
    let mut rows = vec![vec!["SEVERITY".to_string(), "ELEMENT".into(), "MESSAGE".into()]];
    for f in &report.findings {
        let message = f.message.replace('\n', " ");
        rows.push(vec![severity(f.severity).into(), f.element_path.clone(), message]);
    }
    let mut out = if report.findings.is_empty() { String::new() } else { render(&rows) };
    let count = |s| report.findings.iter().filter(|f| f.severity == s).count();
    let _ = writeln!(
        out,
        "{}: {} violations, {} warnings",
        if report.conformant { "conformant" } else { "not conformant" },
        count(Severity::Violation),
        count(Severity::Warning)
    );
    out
}

fn fill_row(name: &str, fill: &Fill) -> Vec<String> {
    vec![
        name.to_string(),
        fill.filled.to_string(),
        fill.total.to_string(),
        format!("{:.1}%", fill.ratio() * 100.0),
    ]
}

pub fn completeness(report: &CompletenessReport, schema: &SchemaDefinition) -> String {
    let header = |first: &str| vec![first.to_string(), "FILLED".into(), "TOTAL".into(), "RATIO".into()];
    let mut rows = vec![header("TIER")];
    rows.extend(report.per_tier.iter().map(|(t, f)| fill_row(t.as_str(), f)));
    let mut out = render(&rows);
    out.push('\n');
    let mut rows = vec![header("AREA")];
    for (id, fill) in &report.per_area {
        let label = schema.area(id).map_or(id.as_str(), |a| a.label.as_str());
        rows.push(fill_row(label, fill));
    }
    out.push_str(&render(&rows));
    let _ = writeln!(
        out,
        "\nmandatory elements {}",
        if report.mandatory_complete { "complete" } else { "incomplete" }
    );
    out
}
