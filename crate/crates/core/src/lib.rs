//! Security weakness detection for Puppet manifests.
//!
//! The pipeline parses a manifest, classifies its assignments, attributes
//! and parameters, matches the weakness rules, and in taint mode keeps only
//! the matches whose values reach a resource attribute through def-use
//! chains.
//!
//! ```
//! use pupflow::{analyze_source, PatternSet, ScanMode};
//!
//! let src = "$pw = sha1($x)\nfile_line { 'htpasswd': line => \"admin:${pw}\" }";
//! let a = analyze_source(src, "site.pp", ScanMode::Taint, &PatternSet::default()).unwrap();
//! assert_eq!(a.findings.len(), 1);
//! ```

pub mod frontend;
pub mod harness;
pub mod report;
pub mod rules;
pub mod syntax;
pub mod taint;

pub use frontend::{parse_manifest, FrontendError, Manifest, SourceLocation};
pub use harness::{
    analyze_source, evaluate, scan, HarnessError, ParseErrorPolicy, RunConfig, ScanMode,
};
pub use report::{
    categorize_resource, impacted_resource_pct, render_report, Finding, OutputFormat, Report,
    ResourceTaxonomy,
};
pub use rules::{evaluate_predicate, PatternSet, WeaknessCategory};
