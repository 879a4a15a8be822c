//! Findings, corpus statistics, resource categories and report rendering.

mod finding;
mod metrics;
mod render;
mod taxonomy;

pub use finding::{Finding, PathStep, SinkRef};
pub use metrics::{
    corpus_stats, impacted_resource_pct, resources_per_weakness_stats, sink_counts_per_weakness,
    CategoryStats, CorpusStats, MetricsError, SpreadStats,
};
pub use render::{
    finding_json, render_report, render_report_named, render_text, report_json, sarif_json,
    OutputFormat, RenderError, REPORT_VERSION,
};
pub use taxonomy::{categorize_resource, ResourceTaxonomy, TaxonomyError, UNKNOWN_CATEGORY};

use crate::harness::{EvalMetrics, ScanMode};

/// Marks that secret names are matched with any of the name predicates
/// rather than all of them.
pub const RULE_SEMANTICS: &str = "disjunctive-names";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedFile {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub mode: ScanMode,
    pub manifests_scanned: usize,
    /// Sorted by manifest, weakness location, category and sink.
    pub findings: Vec<Finding>,
    pub stats: CorpusStats,
    pub evaluation: Option<EvalMetrics>,
    pub skipped: Vec<SkippedFile>,
}
