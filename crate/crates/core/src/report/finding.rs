use std::cmp::Ordering;
use std::sync::Arc;

use serde::Serialize;

use crate::frontend::SourceLocation;
use crate::rules::WeaknessCategory;
use crate::syntax::ResourceId;

/// The resource attribute a weakness flows into.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SinkRef {
    pub resource_type: String,
    pub resource_title: String,
    pub attribute: String,
    pub ordinal: usize,
    pub location: SourceLocation,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PathStep {
    pub label: String,
    pub location: SourceLocation,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Finding {
    pub category: WeaknessCategory,
    pub manifest_path: Arc<str>,
    pub weakness_location: SourceLocation,
    pub weakness_name: String,
    /// Absent in pattern mode.
    pub sink: Option<SinkRef>,
    /// Taint, intermediates and sink in flow order.
    pub path: Vec<PathStep>,
}

impl Finding {
    pub fn line(&self) -> u32 {
        self.weakness_location.line
    }

    pub fn sink_resource(&self) -> Option<ResourceId> {
        self.sink.as_ref().map(|s| ResourceId {
            manifest_path: self.manifest_path.clone(),
            resource_type: s.resource_type.clone(),
            resource_title: s.resource_title.clone(),
            ordinal: s.ordinal,
        })
    }

    fn sort_key(&self) -> (&str, &SourceLocation, WeaknessCategory, &Option<SinkRef>, &str, &[PathStep]) {
        (
            &self.manifest_path,
            &self.weakness_location,
            self.category,
            &self.sink,
            &self.weakness_name,
            &self.path,
        )
    }
}

impl PartialOrd for Finding {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Finding {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}
