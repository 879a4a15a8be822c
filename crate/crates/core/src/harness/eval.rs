use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::report::{Finding, Report};
use crate::rules::WeaknessCategory;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GroundTruthEntry {
    pub manifest_path: String,
    pub category: WeaknessCategory,
    pub line: u32,
}

#[derive(Debug, Deserialize)]
struct TruthRow {
    manifest_path: String,
    category: String,
    line: u32,
}

/// Reads a CSV with header `manifest_path,category,line`.
pub fn parse_ground_truth(reader: impl Read, origin: &str) -> Result<Vec<GroundTruthEntry>, HarnessError> {
    let bad = |message: String| HarnessError::GroundTruth {
        path: origin.to_string(),
        message,
    };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<TruthRow>().enumerate() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let category = row
            .category
            .parse()
            .map_err(|e: crate::rules::RulesError| bad(format!("row {}: {e}", i + 2)))?;
        let entry = GroundTruthEntry {
            manifest_path: normalize(&row.manifest_path),
            category,
            line: row.line,
        };
        if !seen.insert(entry.clone()) {
            return Err(bad(format!("row {}: duplicate entry", i + 2)));
        }
        out.push(entry);
    }
    Ok(out)
}

pub fn load_ground_truth(path: &Path) -> Result<Vec<GroundTruthEntry>, HarnessError> {
    let file = std::fs::File::open(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_ground_truth(file, &path.display().to_string())
}

fn normalize(path: &str) -> String {
    let path = path.replace('\\', "/");
    let mut rest = path.as_str();
    while let Some(stripped) = rest.strip_prefix("./") {
        rest = stripped;
    }
    rest.to_string()
}

/// Whether a reported manifest path names the labeled file: equal, or
/// ending with the label's path components.
pub fn same_manifest(reported: &str, labeled: &str) -> bool {
    Path::new(&normalize(reported)).ends_with(normalize(labeled))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSet {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// `None` when there is nothing to divide by.
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f_measure: Option<f64>,
}

impl MetricSet {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f_measure = match (precision, recall) {
            (Some(p), Some(r)) if p > 0.0 && r > 0.0 => Some(2.0 * p * r / (p + r)),
            _ => None,
        };
        MetricSet {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f_measure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalMetrics {
    pub overall: MetricSet,
    pub per_category: BTreeMap<WeaknessCategory, MetricSet>,
}

pub fn evaluate(report: &Report, truth: &[GroundTruthEntry]) -> EvalMetrics {
    evaluate_findings(&report.findings, truth)
}

/// Matches findings, projected to (manifest, category, line), against the
/// labels. A finding reaching several sinks counts once.
pub fn evaluate_findings(findings: &[Finding], truth: &[GroundTruthEntry]) -> EvalMetrics {
    let reported: BTreeSet<(&str, WeaknessCategory, u32)> = findings
        .iter()
        .map(|f| (&*f.manifest_path, f.category, f.line()))
        .collect();
    let mut used = vec![false; truth.len()];
    let mut hits: BTreeMap<WeaknessCategory, (usize, usize, usize)> = BTreeMap::new();
    for &(path, category, line) in &reported {
        let matched = truth.iter().enumerate().position(|(i, t)| {
            !used[i] && t.category == category && t.line == line && same_manifest(path, &t.manifest_path)
        });
        let entry = hits.entry(category).or_default();
        match matched {
            Some(i) => {
                used[i] = true;
                entry.0 += 1;
            }
            None => entry.1 += 1,
        }
    }
    for (t, _) in truth.iter().zip(&used).filter(|(_, u)| !**u) {
        hits.entry(t.category).or_default().2 += 1;
    }
    let (tp, fp, fn_) = hits
        .values()
        .fold((0, 0, 0), |acc, h| (acc.0 + h.0, acc.1 + h.1, acc.2 + h.2));
    EvalMetrics {
        overall: MetricSet::from_counts(tp, fp, fn_),
        per_category: hits
            .into_iter()
            .map(|(c, (tp, fp, fn_))| (c, MetricSet::from_counts(tp, fp, fn_)))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_examples() {
        let m = MetricSet::from_counts(9, 1, 0);
        assert!((m.precision.unwrap() - 0.90).abs() < 1e-12);
        assert!((m.recall.unwrap() - 1.0).abs() < 1e-12);
        assert!((m.f_measure.unwrap() - 0.947).abs() < 5e-4);
        let perfect = MetricSet::from_counts(5, 0, 0);
        assert_eq!((perfect.precision, perfect.recall, perfect.f_measure), (Some(1.0), Some(1.0), Some(1.0)));
    }

    #[test]
    fn undefined_ratios_are_none() {
        let m = MetricSet::from_counts(0, 0, 0);
        assert_eq!((m.precision, m.recall, m.f_measure), (None, None, None));
        let zero = MetricSet::from_counts(0, 3, 2);
        assert_eq!(zero.precision, Some(0.0));
        assert_eq!(zero.f_measure, None);
    }

    #[test]
    fn path_suffix_matching() {
        assert!(same_manifest("tests/fixtures/corpus/a.pp", "a.pp"));
        assert!(same_manifest("tests/fixtures/corpus/a.pp", "./corpus/a.pp"));
        assert!(!same_manifest("tests/fixtures/corpus/ba.pp", "a.pp"));
    }

    #[test]
    fn csv_parsing() {
        let text = "manifest_path,category,line\n./a.pp,HardCodedSecret,3\nb.pp, EmptyPassword ,10\n";
        let entries = parse_ground_truth(text.as_bytes(), "t.csv").unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].manifest_path, "a.pp");
        assert_eq!(entries[1].category, WeaknessCategory::EmptyPassword);
    }

    #[test]
    fn csv_errors() {
        let dup = "manifest_path,category,line\na.pp,HardCodedSecret,3\na.pp,HardCodedSecret,3\n";
        assert!(parse_ground_truth(dup.as_bytes(), "t.csv").is_err());
        let unknown = "manifest_path,category,line\na.pp,Nope,3\n";
        assert!(parse_ground_truth(unknown.as_bytes(), "t.csv").is_err());
        let bad_line = "manifest_path,category,line\na.pp,HardCodedSecret,x\n";
        assert!(parse_ground_truth(bad_line.as_bytes(), "t.csv").is_err());
    }
}
