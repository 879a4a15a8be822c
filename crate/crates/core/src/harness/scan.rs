use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use walkdir::WalkDir;

use super::config::{ParseErrorPolicy, RunConfig, ScanMode};
use super::eval::{evaluate_findings, load_ground_truth};
use super::HarnessError;
use crate::frontend::{parse_manifest, FrontendError, Manifest, SourceLocation};
use crate::report::{corpus_stats, Finding, PathStep, Report, ResourceTaxonomy, SkippedFile};
use crate::rules::{detect_candidates, PatternSet, WeaknessCandidate};
use crate::syntax::{
    build_membership_index, classify_expressions, collect_function_calls, ResourceId,
};
use crate::taint::{build_ddg_with, collect_propagations, confirm_findings, DefUseChains};

/// Result of running the pipeline on one manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestAnalysis {
    pub path: Arc<str>,
    pub resources: Vec<ResourceId>,
    pub candidates: Vec<WeaknessCandidate>,
    pub findings: Vec<Finding>,
}

pub fn analyze_manifest(manifest: &Manifest, mode: ScanMode, patterns: &PatternSet) -> ManifestAnalysis {
    let classified = classify_expressions(manifest);
    let calls = collect_function_calls(manifest);
    let candidates = detect_candidates(&classified, &calls, patterns);
    let index = build_membership_index(manifest);
    let findings = match mode {
        ScanMode::Pattern => candidates.iter().map(|c| pattern_finding(manifest, c)).collect(),
        ScanMode::Taint => {
            let chains = DefUseChains::compute_with(manifest, patterns.sanitizers());
            build_ddg_with(manifest, &chains, &candidates, &index)
                .map(|g| confirm_findings(&candidates, &collect_propagations(&g), &index))
                .unwrap_or_default()
        }
    };
    ManifestAnalysis {
        path: manifest.path.clone(),
        resources: index.resource_list.into_iter().map(|r| r.id).collect(),
        candidates,
        findings,
    }
}

pub fn analyze_source(
    text: &str,
    path: &str,
    mode: ScanMode,
    patterns: &PatternSet,
) -> Result<ManifestAnalysis, FrontendError> {
    Ok(analyze_manifest(&parse_manifest(text, path)?, mode, patterns))
}

fn pattern_finding(manifest: &Manifest, candidate: &WeaknessCandidate) -> Finding {
    Finding {
        category: candidate.category,
        manifest_path: manifest.path.clone(),
        weakness_location: candidate.location.clone(),
        weakness_name: candidate.name.clone(),
        sink: None,
        path: vec![PathStep {
            label: format!("{} {}", candidate.category, candidate.name),
            location: candidate.location.clone(),
        }],
    }
}

/// Expands directories to the `.pp` files below them, sorted. Files
/// given explicitly are kept whatever their extension.
pub fn collect_manifest_paths(paths: &[PathBuf]) -> Result<Vec<PathBuf>, HarnessError> {
    let mut out = Vec::new();
    for path in paths {
        if path.is_file() {
            out.push(path.clone());
        } else if path.is_dir() {
            for entry in WalkDir::new(path).sort_by_file_name() {
                let entry = entry.map_err(|e| HarnessError::Io {
                    path: path.display().to_string(),
                    source: e.into(),
                })?;
                if entry.file_type().is_file()
                    && entry.path().extension().is_some_and(|e| e == "pp")
                {
                    out.push(entry.into_path());
                }
            }
        } else {
            return Err(HarnessError::MissingInput(path.display().to_string()));
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn read_manifest(path: &Path) -> Result<Result<Manifest, FrontendError>, HarnessError> {
    let display = path.to_string_lossy().into_owned();
    let bytes = std::fs::read(path).map_err(|source| HarnessError::Io {
        path: display.clone(),
        source,
    })?;
    Ok(match String::from_utf8(bytes) {
        Ok(text) => parse_manifest(&text, &display),
        Err(_) => Err(FrontendError::Parse {
            location: SourceLocation::new(Arc::from(display.as_str()), 1, 1),
            message: "file is not valid UTF-8".into(),
        }),
    })
}

fn worker_pool(jobs: usize) -> Result<rayon::ThreadPool, HarnessError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))
}

/// Loads the optional pattern and taxonomy files named in `config`, then
/// scans.
pub fn scan(config: &RunConfig) -> Result<Report, HarnessError> {
    let patterns = match &config.patterns {
        Some(p) => PatternSet::load(p)?,
        None => PatternSet::default(),
    };
    let taxonomy = match &config.taxonomy {
        Some(p) => ResourceTaxonomy::load(p)?,
        None => ResourceTaxonomy::default(),
    };
    scan_with(config, &patterns, &taxonomy)
}

pub fn scan_with(
    config: &RunConfig,
    patterns: &PatternSet,
    taxonomy: &ResourceTaxonomy,
) -> Result<Report, HarnessError> {
    let truth = config
        .ground_truth
        .as_deref()
        .map(load_ground_truth)
        .transpose()?;
    let files = collect_manifest_paths(&config.paths)?;
    let pool = worker_pool(config.jobs)?;
    let outcomes: Vec<Result<Result<ManifestAnalysis, FrontendError>, HarnessError>> =
        pool.install(|| {
            files
                .par_iter()
                .map(|path| {
                    Ok(read_manifest(path)?.map(|m| analyze_manifest(&m, config.mode, patterns)))
                })
                .collect()
        });

    let mut findings = Vec::new();
    let mut resources = Vec::new();
    let mut skipped = Vec::new();
    let mut scanned = 0;
    for (path, outcome) in files.iter().zip(outcomes) {
        match outcome? {
            Ok(analysis) => {
                scanned += 1;
                findings.extend(analysis.findings);
                resources.extend(analysis.resources);
            }
            Err(err) => match config.on_parse_error {
                ParseErrorPolicy::Abort => return Err(HarnessError::Parse(err)),
                ParseErrorPolicy::Skip => skipped.push(SkippedFile {
                    path: path.to_string_lossy().into_owned(),
                    message: err.to_string(),
                }),
            },
        }
    }
    findings.sort();
    findings.dedup();
    let stats = corpus_stats(&resources, &findings, taxonomy);
    let evaluation = truth.map(|t| evaluate_findings(&findings, &t));
    Ok(Report {
        mode: config.mode,
        manifests_scanned: scanned,
        findings,
        stats,
        evaluation,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::WeaknessCategory;

    #[test]
    fn sanitizers_stop_propagation() {
        let src = "$db_password = 'hunter2'\n$masked = scrub($db_password)\nsvc { 'a': secret => $masked }\n";
        let plain = PatternSet::default();
        assert_eq!(analyze_source(src, "a.pp", ScanMode::Taint, &plain).unwrap().findings.len(), 1);
        let sanitized = PatternSet::default().with_sanitizers(["Scrub"]);
        assert!(analyze_source(src, "a.pp", ScanMode::Taint, &sanitized).unwrap().findings.is_empty());
    }

    #[test]
    fn pattern_mode_keeps_unused_candidates() {
        let src = "$pw = sha1('x')";
        let p = PatternSet::default();
        assert!(analyze_source(src, "a.pp", ScanMode::Taint, &p).unwrap().findings.is_empty());
        let pattern = analyze_source(src, "a.pp", ScanMode::Pattern, &p).unwrap();
        assert_eq!(pattern.findings.len(), 1);
        assert_eq!(pattern.findings[0].category, WeaknessCategory::WeakCryptoAlgorithm);
        assert!(pattern.findings[0].sink.is_none());
    }

    #[test]
    fn resources_are_listed() {
        let a = analyze_source("file { 'a': }\nfile { 'b': }", "a.pp", ScanMode::Taint, &PatternSet::default()).unwrap();
        assert_eq!(a.resources.len(), 2);
    }

    #[test]
    fn missing_input_is_an_error() {
        let err = collect_manifest_paths(&[PathBuf::from("/definitely/not/here")]).unwrap_err();
        assert!(matches!(err, HarnessError::MissingInput(_)));
    }
}
