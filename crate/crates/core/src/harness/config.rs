use std::fmt;
use std::path::PathBuf;

use serde::Serialize;

use crate::report::OutputFormat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScanMode {
    /// Report only weaknesses that flow into a resource attribute.
    #[default]
    Taint,
    /// Report every rule match.
    Pattern,
}

impl ScanMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ScanMode::Taint => "taint",
            ScanMode::Pattern => "pattern",
        }
    }
}

impl fmt::Display for ScanMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum ParseErrorPolicy {
    /// Record the file as skipped and continue.
    #[default]
    Skip,
    /// Stop the run.
    Abort,
}

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub paths: Vec<PathBuf>,
    pub mode: ScanMode,
    pub format: OutputFormat,
    pub taxonomy: Option<PathBuf>,
    pub patterns: Option<PathBuf>,
    pub ground_truth: Option<PathBuf>,
    pub fail_on_findings: bool,
    /// Worker count; 0 picks one per core.
    pub jobs: usize,
    pub on_parse_error: ParseErrorPolicy,
}
