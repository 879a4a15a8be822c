use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use super::{Finding, Report, RULE_SEMANTICS};
use crate::frontend::SourceLocation;
use crate::harness::MetricSet;
use crate::rules::WeaknessCategory;

pub const REPORT_VERSION: &str = "1.0";
const SARIF_SCHEMA: &str = "https://json.schemastore.org/sarif-2.1.0.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Text,
    Sarif,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("unknown output format `{0}` (expected json, text or sarif)")]
    UnknownFormat(String),
}

impl FromStr for OutputFormat {
    type Err = RenderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "text" => Ok(OutputFormat::Text),
            "sarif" => Ok(OutputFormat::Sarif),
            _ => Err(RenderError::UnknownFormat(s.to_string())),
        }
    }
}

pub fn render_report(report: &Report, format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Json => to_pretty(&report_json(report)),
        OutputFormat::Sarif => to_pretty(&sarif_json(report)),
        OutputFormat::Text => render_text(report).into_bytes(),
    }
}

/// Renders by format name, for callers holding a string.
pub fn render_report_named(report: &Report, format: &str) -> Result<Vec<u8>, RenderError> {
    Ok(render_report(report, format.parse()?))
}

fn to_pretty(value: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("json values serialize");
    out.push(b'\n');
    out
}

fn step_json(label: &str, location: &SourceLocation) -> Value {
    json!({ "node": label, "line": location.line, "column": location.column })
}

pub fn finding_json(f: &Finding) -> Value {
    json!({
        "category": f.category.as_str(),
        "manifest": &*f.manifest_path,
        "line": f.weakness_location.line,
        "column": f.weakness_location.column,
        "name": f.weakness_name,
        "sink": f.sink.as_ref().map(|s| json!({
            "resource_type": s.resource_type,
            "resource_title": s.resource_title,
            "attribute": s.attribute,
            "line": s.location.line,
        })),
        "path": f.path.iter().map(|p| step_json(&p.label, &p.location)).collect::<Vec<_>>(),
    })
}

fn metric_json(m: &MetricSet) -> Value {
    json!({
        "tp": m.tp,
        "fp": m.fp,
        "fn": m.fn_,
        "precision": m.precision,
        "recall": m.recall,
        "f_measure": m.f_measure,
    })
}

pub fn report_json(report: &Report) -> Value {
    let stats = &report.stats;
    let mut per_category = Map::new();
    for (name, c) in &stats.per_category {
        per_category.insert(
            name.clone(),
            json!({
                "total_resources": c.total_resources,
                "impacted_resources": c.impacted_resources,
                "impacted_pct": c.impacted_pct,
                "share_of_impacted_pct": c.share_of_impacted_pct,
            }),
        );
    }
    let mut root = Map::new();
    root.insert("version".into(), json!(REPORT_VERSION));
    root.insert("mode".into(), json!(report.mode.as_str()));
    root.insert("rule_semantics".into(), json!(RULE_SEMANTICS));
    root.insert("manifests_scanned".into(), json!(report.manifests_scanned));
    root.insert(
        "findings".into(),
        Value::Array(report.findings.iter().map(finding_json).collect()),
    );
    root.insert(
        "stats".into(),
        json!({
            "total_resources": stats.total_resources,
            "impacted_resources": stats.impacted_resources,
            "impacted_pct": stats.impacted_pct,
            "per_category": per_category,
            "per_weakness_stats": stats.per_weakness_stats,
        }),
    );
    if let Some(eval) = &report.evaluation {
        let mut per = Map::new();
        for (c, m) in &eval.per_category {
            per.insert(c.as_str().into(), metric_json(m));
        }
        root.insert(
            "evaluation".into(),
            json!({ "overall": metric_json(&eval.overall), "per_category": per }),
        );
    }
    if !report.skipped.is_empty() {
        root.insert(
            "skipped".into(),
            Value::Array(
                report
                    .skipped
                    .iter()
                    .map(|s| json!({ "path": s.path, "error": s.message }))
                    .collect(),
            ),
        );
    }
    Value::Object(root)
}

fn sarif_location(location: &SourceLocation) -> Value {
    json!({
        "physicalLocation": {
            "artifactLocation": { "uri": location.path.replace('\\', "/") },
            "region": { "startLine": location.line, "startColumn": location.column },
        }
    })
}

fn sarif_message(f: &Finding) -> String {
    match &f.sink {
        Some(s) => format!(
            "{}: {} flows into {}[{}].{}",
            f.category.description(),
            f.weakness_name,
            s.resource_type,
            s.resource_title,
            s.attribute
        ),
        None => format!("{}: {}", f.category.description(), f.weakness_name),
    }
}

pub fn sarif_json(report: &Report) -> Value {
    let rules: Vec<Value> = WeaknessCategory::ALL
        .iter()
        .map(|c| {
            json!({
                "id": c.as_str(),
                "name": c.as_str(),
                "shortDescription": { "text": c.description() },
            })
        })
        .collect();
    let results: Vec<Value> = report
        .findings
        .iter()
        .map(|f| {
            let related: Vec<Value> = f
                .path
                .iter()
                .enumerate()
                .map(|(i, step)| {
                    let mut loc = sarif_location(&step.location);
                    loc["id"] = json!(i);
                    loc["message"] = json!({ "text": step.label });
                    loc
                })
                .collect();
            json!({
                "ruleId": f.category.as_str(),
                "level": "warning",
                "message": { "text": sarif_message(f) },
                "locations": [sarif_location(&f.weakness_location)],
                "relatedLocations": related,
            })
        })
        .collect();
    json!({
        "$schema": SARIF_SCHEMA,
        "version": "2.1.0",
        "runs": [{
            "tool": {
                "driver": {
                    "name": "pupflow",
                    "version": env!("CARGO_PKG_VERSION"),
                    "rules": rules,
                }
            },
            "results": results,
            "properties": {
                "mode": report.mode.as_str(),
                "rule_semantics": RULE_SEMANTICS,
            },
        }]
    })
}

fn na(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| format!("{v:.3}"))
}

pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    for f in &report.findings {
        let _ = write!(out, "{}: {} {}", f.weakness_location, f.category, f.weakness_name);
        if let Some(s) = &f.sink {
            let _ = write!(
                out,
                " -> {}[{}].{} (line {})",
                s.resource_type, s.resource_title, s.attribute, s.location.line
            );
        }
        out.push('\n');
    }
    let stats = &report.stats;
    let _ = writeln!(
        out,
        "{} finding(s) in {} manifest(s), mode {}",
        report.findings.len(),
        report.manifests_scanned,
        report.mode
    );
    let _ = writeln!(
        out,
        "impacted resources: {} of {} ({})",
        stats.impacted_resources,
        stats.total_resources,
        stats
            .impacted_pct
            .map_or_else(|| "NA".to_string(), |p| format!("{p:.2}%"))
    );
    if let Some(s) = stats.per_weakness_stats {
        let _ = writeln!(
            out,
            "resources per weakness: min {}, median {}, max {}",
            s.min, s.median, s.max
        );
    }
    for (name, c) in stats.per_category.iter().filter(|(_, c)| c.impacted_resources > 0) {
        let _ = writeln!(out, "  {name}: {} of {}", c.impacted_resources, c.total_resources);
    }
    if let Some(eval) = &report.evaluation {
        let m = &eval.overall;
        let _ = writeln!(
            out,
            "evaluation: tp {} fp {} fn {}, precision {}, recall {}, F {}",
            m.tp,
            m.fp,
            m.fn_,
            na(m.precision),
            na(m.recall),
            na(m.f_measure)
        );
    }
    for s in &report.skipped {
        let _ = writeln!(out, "skipped {}: {}", s.path, s.message);
    }
    out
}
