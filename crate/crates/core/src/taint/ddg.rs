//! Data dependence graphs and propagation of weakness candidates.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use super::defuse::{DefId, DefUseChains, UseSite};
use crate::frontend::{Manifest, SourceLocation};
use crate::report::{Finding, PathStep, SinkRef};
use crate::rules::{TaintOrigin, WeaknessCandidate};
use crate::syntax::{AttributeId, MembershipIndex};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum DdgNode {
    Taint {
        /// Index into the candidate list the graph was built from.
        candidate: usize,
        label: String,
        location: SourceLocation,
    },
    Intermediate {
        def: DefId,
        var: String,
        location: SourceLocation,
    },
    Sink {
        attribute: AttributeId,
        location: SourceLocation,
    },
}

impl DdgNode {
    pub fn location(&self) -> &SourceLocation {
        match self {
            DdgNode::Taint { location, .. }
            | DdgNode::Intermediate { location, .. }
            | DdgNode::Sink { location, .. } => location,
        }
    }

    pub fn label(&self) -> String {
        match self {
            DdgNode::Taint { label, .. } => label.clone(),
            DdgNode::Intermediate { var, .. } => format!("${var}"),
            DdgNode::Sink { attribute, .. } => attribute.to_string(),
        }
    }

    pub fn is_taint(&self) -> bool {
        matches!(self, DdgNode::Taint { .. })
    }

    pub fn is_sink(&self) -> bool {
        matches!(self, DdgNode::Sink { .. })
    }

    fn rank(&self) -> u8 {
        match self {
            DdgNode::Taint { .. } => 0,
            DdgNode::Intermediate { .. } => 1,
            DdgNode::Sink { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DataDependenceGraph {
    pub manifest_path: Arc<str>,
    /// Sorted by textual position.
    pub nodes: Vec<DdgNode>,
    /// `(from, to)`: the value of `from` is used to define `to`.
    pub edges: BTreeSet<(usize, usize)>,
}

impl DataDependenceGraph {
    /// Assembles a graph from explicit nodes and edges, reordering nodes
    /// textually. Edges refer to positions in `nodes`.
    pub fn from_parts(
        manifest_path: Arc<str>,
        nodes: Vec<DdgNode>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by(|&a, &b| {
            let (na, nb) = (&nodes[a], &nodes[b]);
            (na.location(), na.rank(), a).cmp(&(nb.location(), nb.rank(), b))
        });
        let mut new_index = vec![0; nodes.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let edges = edges
            .into_iter()
            .map(|(a, b)| (new_index[a], new_index[b]))
            .collect();
        let mut slots: Vec<Option<DdgNode>> = nodes.into_iter().map(Some).collect();
        let nodes = order.iter().map(|&i| slots[i].take().expect("node")).collect();
        DataDependenceGraph {
            manifest_path,
            nodes,
            edges,
        }
    }

    pub fn successors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .range((node, 0)..=(node, usize::MAX))
            .map(|&(_, to)| to)
    }

    pub fn taint_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_taint())
    }

    pub fn sink_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_sink())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum NodeKey {
    Taint(usize),
    Def(DefId),
    Sink(AttributeId),
}

#[derive(Default)]
struct Builder {
    keys: BTreeMap<NodeKey, usize>,
    nodes: Vec<DdgNode>,
    edges: BTreeSet<(usize, usize)>,
}

impl Builder {
    /// Index of the node for `key`, and whether it was just added.
    fn intern(&mut self, key: NodeKey, node: DdgNode) -> (usize, bool) {
        if let Some(&i) = self.keys.get(&key) {
            return (i, false);
        }
        let i = self.nodes.len();
        self.nodes.push(node);
        self.keys.insert(key, i);
        (i, true)
    }
}

fn taint_label(candidate: &WeaknessCandidate) -> String {
    match &candidate.origin {
        TaintOrigin::Definition { var, .. } => format!("{} ${var}", candidate.category),
        TaintOrigin::Attribute(attr) => format!("{} {attr}", candidate.category),
        TaintOrigin::Detached => format!("{} {}()", candidate.category, candidate.name),
    }
}

/// Graph of value flow from the candidates into resource attributes.
/// `None` when the manifest would yield no taint node or no sink node.
pub fn build_ddg(
    manifest: &Manifest,
    candidates: &[WeaknessCandidate],
    index: &MembershipIndex,
) -> Option<DataDependenceGraph> {
    let chains = DefUseChains::compute(manifest);
    build_ddg_with(manifest, &chains, candidates, index)
}

pub fn build_ddg_with(
    manifest: &Manifest,
    chains: &DefUseChains,
    candidates: &[WeaknessCandidate],
    index: &MembershipIndex,
) -> Option<DataDependenceGraph> {
    let mut graph = Builder::default();
    let mut pending: VecDeque<DefId> = VecDeque::new();

    let site_node = |site: &UseSite| -> Option<(NodeKey, DdgNode)> {
        match site {
            UseSite::Definition(d) => {
                let def = &chains.defs[*d];
                Some((
                    NodeKey::Def(*d),
                    DdgNode::Intermediate {
                        def: *d,
                        var: def.var.clone(),
                        location: def.location.clone(),
                    },
                ))
            }
            UseSite::Attribute(a) if index.resource_of(a).is_some() => Some((
                NodeKey::Sink(a.clone()),
                DdgNode::Sink {
                    attribute: a.clone(),
                    location: chains.location_of(site)?.clone(),
                },
            )),
            _ => None,
        }
    };
    let link_uses = |graph: &mut Builder, from: usize, def: DefId, pending: &mut VecDeque<DefId>| {
        for site in chains.uses_reached_by(def) {
            if let Some((key, node)) = site_node(site) {
                let (to, fresh) = graph.intern(key, node);
                graph.edges.insert((from, to));
                if let (true, UseSite::Definition(d)) = (fresh, site) {
                    pending.push_back(*d);
                }
            }
        }
    };

    for (ci, candidate) in candidates.iter().enumerate() {
        let taint = DdgNode::Taint {
            candidate: ci,
            label: taint_label(candidate),
            location: candidate.location.clone(),
        };
        match &candidate.origin {
            TaintOrigin::Definition { var, location } => {
                let Some(def) = chains.find_def(var, location) else {
                    continue;
                };
                let (t, _) = graph.intern(NodeKey::Taint(ci), taint);
                link_uses(&mut graph, t, def, &mut pending);
            }
            TaintOrigin::Attribute(attr) => {
                let Some(location) = chains.attribute_locations.get(attr) else {
                    continue;
                };
                if index.resource_of(attr).is_none() {
                    continue;
                }
                let (t, _) = graph.intern(NodeKey::Taint(ci), taint);
                let sink = DdgNode::Sink {
                    attribute: attr.clone(),
                    location: location.clone(),
                };
                let (s, _) = graph.intern(NodeKey::Sink(attr.clone()), sink);
                graph.edges.insert((t, s));
            }
            TaintOrigin::Detached => {}
        }
    }

    while let Some(def) = pending.pop_front() {
        let from = graph.keys[&NodeKey::Def(def)];
        link_uses(&mut graph, from, def, &mut pending);
    }

    let Builder { nodes, edges, .. } = graph;
    let has_taint = nodes.iter().any(DdgNode::is_taint);
    let has_sink = nodes.iter().any(DdgNode::is_sink);
    if !(has_taint && has_sink) {
        return None;
    }
    Some(DataDependenceGraph::from_parts(
        manifest.path.clone(),
        nodes,
        edges,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropagationResult {
    /// Index of the taint node in the graph.
    pub taint_node: usize,
    /// Index of the candidate in the list the graph was built from.
    pub candidate: usize,
    pub sinks: Vec<AttributeId>,
    /// One shortest witness per sink, in the same order as `sinks`.
    pub paths: Vec<Vec<DdgNode>>,
}

/// Sinks reachable from each taint node with one shortest witness path
/// each. Ties between equally short paths go to the textually earlier
/// next node. Taints that reach no sink are omitted.
pub fn collect_propagations(ddg: &DataDependenceGraph) -> Vec<PropagationResult> {
    let mut out = Vec::new();
    for taint in ddg.taint_nodes() {
        let DdgNode::Taint { candidate, .. } = &ddg.nodes[taint] else {
            continue;
        };
        let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
        let mut seen = BTreeSet::from([taint]);
        let mut queue = VecDeque::from([taint]);
        while let Some(node) = queue.pop_front() {
            for next in ddg.successors(node) {
                if seen.insert(next) {
                    parent.insert(next, node);
                    queue.push_back(next);
                }
            }
        }
        let mut sinks = Vec::new();
        let mut paths = Vec::new();
        for sink in seen.iter().copied().filter(|&n| ddg.nodes[n].is_sink()) {
            let mut path = vec![sink];
            let mut at = sink;
            while let Some(&p) = parent.get(&at) {
                path.push(p);
                at = p;
            }
            path.reverse();
            let DdgNode::Sink { attribute, .. } = &ddg.nodes[sink] else {
                unreachable!()
            };
            sinks.push(attribute.clone());
            paths.push(path.into_iter().map(|i| ddg.nodes[i].clone()).collect());
        }
        if !sinks.is_empty() {
            out.push(PropagationResult {
                taint_node: taint,
                candidate: *candidate,
                sinks,
                paths,
            });
        }
    }
    out
}

/// One finding per (candidate, sink) pair. Candidates without a sink
/// produce nothing.
pub fn confirm_findings(
    candidates: &[WeaknessCandidate],
    propagations: &[PropagationResult],
    index: &MembershipIndex,
) -> Vec<Finding> {
    let mut out = Vec::new();
    for result in propagations {
        let Some(candidate) = candidates.get(result.candidate) else {
            continue;
        };
        for (attr, path) in result.sinks.iter().zip(&result.paths) {
            let Some(resource) = index.resource_of(attr) else {
                continue;
            };
            let Some(last) = path.last() else {
                continue;
            };
            out.push(Finding {
                category: candidate.category,
                manifest_path: resource.manifest_path.clone(),
                weakness_location: candidate.location.clone(),
                weakness_name: candidate.name.clone(),
                sink: Some(SinkRef {
                    resource_type: resource.resource_type.clone(),
                    resource_title: resource.resource_title.clone(),
                    attribute: attr.attribute_name.clone(),
                    ordinal: resource.ordinal,
                    location: last.location().clone(),
                }),
                path: path
                    .iter()
                    .map(|n| PathStep {
                        label: n.label(),
                        location: n.location().clone(),
                    })
                    .collect(),
            });
        }
    }
    out.sort();
    out
}
