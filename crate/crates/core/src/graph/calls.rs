//! Name-based call-edge resolution.
//!
//! Calls resolve through three tiers: methods of the caller's enclosing
//! class, then functions defined in the same file, then a unique global
//! name. Two or more candidates at the winning tier drop the edge as
//! ambiguous; a name with no candidate anywhere counts as unresolved.

use std::collections::{BTreeSet, HashMap};

use super::lang::CallSite;
use super::{KnowledgeGraph, NodeId, NodeKind};

/// Call sites of one file, waiting for the whole containment tree.
#[derive(Debug, Clone)]
pub struct PendingCalls {
    /// Module-style qualified name of the file the sites came from.
    pub file_module: String,
    pub sites: Vec<CallSite>,
}

/// Populate `Calls` edges from collected call sites. Best effort by
/// contract: failures only move diagnostics counters.
pub fn resolve_calls(graph: &mut KnowledgeGraph, pending: &[PendingCalls]) {
    // Functions indexed by plain name.
    let mut by_name: HashMap<&str, Vec<NodeId>> = HashMap::new();
    for node in graph.nodes.values() {
        if node.kind == NodeKind::Function {
            by_name.entry(node.name.as_str()).or_default().push(node.id);
        }
    }

    let mut edges: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    let mut unresolved = 0u64;
    let mut ambiguous = 0u64;

    for file in pending {
        for site in &file.sites {
            let caller_qn = format!("{}.{}", file.file_module, site.caller_chain.join("."));
            let caller = match graph.by_qualified_name.get(&caller_qn) {
                Some(id) => *id,
                None => continue,
            };
            let callee_name = match &site.callee_name {
                Some(name) => name.as_str(),
                None => {
                    unresolved += 1;
                    continue;
                }
            };
            let candidates = by_name.get(callee_name).map(Vec::as_slice).unwrap_or(&[]);
            match resolve_one(graph, caller, &file.file_module, candidates) {
                Resolution::Unique(callee) => {
                    edges.insert((caller, callee));
                }
                Resolution::Ambiguous => ambiguous += 1,
                Resolution::None => unresolved += 1,
            }
        }
    }

    apply_edges(graph, edges);
    graph.diagnostics.unresolved_calls = unresolved;
    graph.diagnostics.ambiguous_calls = ambiguous;
}

enum Resolution {
    Unique(NodeId),
    Ambiguous,
    None,
}

fn resolve_one(
    graph: &KnowledgeGraph,
    caller: NodeId,
    file_module: &str,
    candidates: &[NodeId],
) -> Resolution {
    if candidates.is_empty() {
        return Resolution::None;
    }

    // Tier 1: methods of the caller's innermost enclosing class.
    if let Some(class) = graph.enclosing_class(caller) {
        let tier: Vec<NodeId> = candidates
            .iter()
            .copied()
            .filter(|id| graph.parent(*id) == Some(class.id))
            .collect();
        if let Some(resolution) = pick(&tier) {
            return resolution;
        }
    }

    // Tier 2: functions defined in the same file.
    let tier: Vec<NodeId> = candidates
        .iter()
        .copied()
        .filter(|id| {
            graph
                .file_of(*id)
                .map(|f| f.qualified_name == file_module)
                .unwrap_or(false)
        })
        .collect();
    if let Some(resolution) = pick(&tier) {
        return resolution;
    }

    // Tier 3: unique global name.
    pick(candidates).unwrap_or(Resolution::None)
}

fn pick(tier: &[NodeId]) -> Option<Resolution> {
    match tier.len() {
        0 => None,
        1 => Some(Resolution::Unique(tier[0])),
        _ => Some(Resolution::Ambiguous),
    }
}

fn apply_edges(graph: &mut KnowledgeGraph, edges: BTreeSet<(NodeId, NodeId)>) {
    let mut calls_out: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
    let mut calls_in: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
    for (from, to) in edges {
        calls_out.entry(from).or_default().push(to);
        calls_in.entry(to).or_default().push(from);
    }
    let by_qn = |graph: &KnowledgeGraph, list: &mut Vec<NodeId>| {
        list.sort_by(|a, b| {
            let qa = graph.nodes.get(a).map(|n| n.qualified_name.as_str());
            let qb = graph.nodes.get(b).map(|n| n.qualified_name.as_str());
            qa.cmp(&qb)
        });
    };
    for list in calls_out.values_mut() {
        by_qn(graph, list);
    }
    for list in calls_in.values_mut() {
        by_qn(graph, list);
    }
    graph.calls_out = calls_out;
    graph.calls_in = calls_in;
}
