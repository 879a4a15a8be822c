//! Batch scanning of manifest trees and evaluation against labels.

mod config;
mod eval;
mod scan;

pub use config::{ParseErrorPolicy, RunConfig, ScanMode};
pub use eval::{
    evaluate, evaluate_findings, load_ground_truth, parse_ground_truth, same_manifest,
    EvalMetrics, GroundTruthEntry, MetricSet,
};
pub use scan::{
    analyze_manifest, analyze_source, collect_manifest_paths, scan, scan_with, ManifestAnalysis,
};

use crate::frontend::FrontendError;
use crate::report::{RenderError, TaxonomyError};
use crate::rules::RulesError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("input path does not exist: {0}")]
    MissingInput(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Parse(#[from] FrontendError),
    #[error(transparent)]
    Rules(#[from] RulesError),
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("malformed ground truth {path}: {message}")]
    GroundTruth { path: String, message: String },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}
