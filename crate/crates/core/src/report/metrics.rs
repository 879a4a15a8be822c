use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::taxonomy::{ResourceTaxonomy, UNKNOWN_CATEGORY};
use super::Finding;
use crate::frontend::SourceLocation;
use crate::rules::WeaknessCategory;
use crate::syntax::ResourceId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("total resource count is zero")]
    ZeroTotal,
    #[error("impacted count {impacted} exceeds total {total}")]
    ImpactedExceedsTotal { impacted: usize, total: usize },
}

/// Share of resources reached by at least one weakness, as a percentage
/// rounded to two decimals.
pub fn impacted_resource_pct(impacted: usize, total: usize) -> Result<f64, MetricsError> {
    if total == 0 {
        return Err(MetricsError::ZeroTotal);
    }
    if impacted > total {
        return Err(MetricsError::ImpactedExceedsTotal { impacted, total });
    }
    Ok(round2(impacted as f64 / total as f64 * 100.0))
}

pub(crate) fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SpreadStats {
    pub min: usize,
    /// Lower middle element for even counts.
    pub median: usize,
    pub max: usize,
}

impl SpreadStats {
    pub fn of(values: &[usize]) -> Option<Self> {
        let mut sorted = values.to_vec();
        sorted.sort_unstable();
        Some(SpreadStats {
            min: *sorted.first()?,
            median: sorted[(sorted.len() - 1) / 2],
            max: *sorted.last()?,
        })
    }
}

/// Number of distinct sink resources per weakness instance, where an
/// instance is one candidate (category and location) in one manifest.
/// Instances without a sink are not counted.
pub fn sink_counts_per_weakness(findings: &[Finding]) -> Vec<usize> {
    let mut per_instance: BTreeMap<(&str, &SourceLocation, WeaknessCategory), BTreeSet<ResourceId>> =
        BTreeMap::new();
    for f in findings {
        if let Some(resource) = f.sink_resource() {
            per_instance
                .entry((&f.manifest_path, &f.weakness_location, f.category))
                .or_default()
                .insert(resource);
        }
    }
    per_instance.values().map(BTreeSet::len).collect()
}

/// Min, median and max of [`sink_counts_per_weakness`]; `None` when no
/// finding has a sink.
pub fn resources_per_weakness_stats(findings: &[Finding]) -> Option<SpreadStats> {
    SpreadStats::of(&sink_counts_per_weakness(findings))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryStats {
    pub total_resources: usize,
    pub impacted_resources: usize,
    /// Impacted share within the category; `None` for an empty category.
    pub impacted_pct: Option<f64>,
    /// This category's share of all impacted resources.
    pub share_of_impacted_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub total_resources: usize,
    pub impacted_resources: usize,
    pub impacted_pct: Option<f64>,
    /// In taxonomy order, followed by the fallback category.
    pub per_category: Vec<(String, CategoryStats)>,
    pub per_weakness_stats: Option<SpreadStats>,
}

/// Aggregates over every resource of the run.
pub fn corpus_stats(
    resources: &[ResourceId],
    findings: &[Finding],
    taxonomy: &ResourceTaxonomy,
) -> CorpusStats {
    let all: BTreeSet<&ResourceId> = resources.iter().collect();
    let impacted: BTreeSet<ResourceId> = findings
        .iter()
        .filter_map(Finding::sink_resource)
        .filter(|r| all.contains(r))
        .collect();

    let mut names: Vec<String> = taxonomy.category_names().map(str::to_string).collect();
    names.push(UNKNOWN_CATEGORY.to_string());
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for resource in &all {
        let category = taxonomy.categorize_resource_id(resource);
        let entry = counts.entry(category).or_default();
        entry.0 += 1;
        if impacted.contains(*resource) {
            entry.1 += 1;
        }
    }
    let per_category = names
        .iter()
        .map(|name| {
            let (total, hit) = counts.get(name.as_str()).copied().unwrap_or_default();
            (
                name.clone(),
                CategoryStats {
                    total_resources: total,
                    impacted_resources: hit,
                    impacted_pct: impacted_resource_pct(hit, total).ok(),
                    share_of_impacted_pct: impacted_resource_pct(hit, impacted.len()).ok(),
                },
            )
        })
        .collect();

    CorpusStats {
        total_resources: all.len(),
        impacted_resources: impacted.len(),
        impacted_pct: impacted_resource_pct(impacted.len(), all.len()).ok(),
        per_category,
        per_weakness_stats: resources_per_weakness_stats(findings),
    }
}
