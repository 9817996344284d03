//! Graph persistence: a versioned, self-describing JSON file with a header,
//! a nodes array and edge arrays. `load_graph(save_graph(g))` reproduces the
//! node and edge sets exactly; derived indexes and corpus statistics are
//! rebuilt on load.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::build::compute_corpus_stats;
use super::{GraphDiagnostics, GraphError, GraphNode, KnowledgeGraph, NodeId, NodeKind};

pub const GRAPH_FORMAT: &str = "rexplore-graph";
pub const GRAPH_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct GraphFile {
    format: String,
    version: u32,
    root_path: String,
    nodes: Vec<GraphNode>,
    contains: Vec<ContainsRecord>,
    calls: Vec<CallRecord>,
    diagnostics: GraphDiagnostics,
}

#[derive(Serialize, Deserialize)]
struct ContainsRecord {
    parent: NodeId,
    /// Children in source order.
    children: Vec<NodeId>,
}

#[derive(Serialize, Deserialize)]
struct CallRecord {
    from: NodeId,
    to: NodeId,
}

pub fn save_graph(graph: &KnowledgeGraph, path: &Path) -> Result<(), GraphError> {
    let text = graph_to_json(graph);
    std::fs::write(path, text).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn graph_to_json(graph: &KnowledgeGraph) -> String {
    let nodes: Vec<GraphNode> = graph.nodes_sorted().into_iter().cloned().collect();

    let qn = |id: &NodeId| {
        graph
            .nodes
            .get(id)
            .map(|n| n.qualified_name.clone())
            .unwrap_or_default()
    };

    let mut contains: Vec<ContainsRecord> = graph
        .contains
        .iter()
        .map(|(parent, children)| ContainsRecord {
            parent: *parent,
            children: children.clone(),
        })
        .collect();
    contains.sort_by_key(|r| qn(&r.parent));

    let mut calls: Vec<CallRecord> = graph
        .calls_out
        .iter()
        .flat_map(|(from, tos)| {
            tos.iter().map(|to| CallRecord {
                from: *from,
                to: *to,
            })
        })
        .collect();
    calls.sort_by_key(|r| (qn(&r.from), qn(&r.to)));

    let file = GraphFile {
        format: GRAPH_FORMAT.to_string(),
        version: GRAPH_FORMAT_VERSION,
        root_path: graph.root_path.clone(),
        nodes,
        contains,
        calls,
        diagnostics: graph.diagnostics.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("graph serialization");
    text.push('\n');
    text
}

pub fn load_graph(path: &Path) -> Result<KnowledgeGraph, GraphError> {
    let text = std::fs::read_to_string(path).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })?;
    graph_from_json(&text)
}

pub fn graph_from_json(text: &str) -> Result<KnowledgeGraph, GraphError> {
    let file: GraphFile =
        serde_json::from_str(text).map_err(|e| GraphError::Format(e.to_string()))?;
    if file.format != GRAPH_FORMAT {
        return Err(GraphError::Format(format!(
            "not a graph file (format {:?})",
            file.format
        )));
    }
    if file.version != GRAPH_FORMAT_VERSION {
        return Err(GraphError::Format(format!(
            "unsupported graph version {} (expected {})",
            file.version, GRAPH_FORMAT_VERSION
        )));
    }

    let mut nodes: HashMap<NodeId, GraphNode> = HashMap::new();
    let mut root = None;
    let mut by_qualified_name = HashMap::new();
    let mut file_by_path = HashMap::new();
    for node in file.nodes {
        match node.kind {
            NodeKind::Repository => {
                if root.replace(node.id).is_some() {
                    return Err(GraphError::Format("multiple repository nodes".to_string()));
                }
            }
            NodeKind::File => {
                if let Some(span) = &node.span {
                    file_by_path.insert(span.file_path.clone(), node.id);
                }
            }
            _ => {}
        }
        if !node.qualified_name.is_empty() {
            by_qualified_name.insert(node.qualified_name.clone(), node.id);
        }
        nodes.insert(node.id, node);
    }
    let root = root.ok_or_else(|| GraphError::Format("missing repository node".to_string()))?;

    let mut contains: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
    let mut parent: HashMap<NodeId, NodeId> = HashMap::new();
    let mut contains_total = 0usize;
    for record in file.contains {
        for child in &record.children {
            if !nodes.contains_key(child) || !nodes.contains_key(&record.parent) {
                return Err(GraphError::Format(
                    "containment edge references unknown node".to_string(),
                ));
            }
            parent.insert(*child, record.parent);
            contains_total += 1;
        }
        contains.insert(record.parent, record.children);
    }
    if contains_total + 1 != nodes.len() {
        return Err(GraphError::Format(format!(
            "containment is not a spanning tree: {} edges for {} nodes",
            contains_total,
            nodes.len()
        )));
    }

    let mut calls_out: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
    let mut calls_in: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
    for record in file.calls {
        let ok = |id: &NodeId| {
            nodes
                .get(id)
                .map(|n| n.kind == NodeKind::Function)
                .unwrap_or(false)
        };
        if !ok(&record.from) || !ok(&record.to) {
            return Err(GraphError::Format(
                "call edge endpoint is not a function".to_string(),
            ));
        }
        calls_out.entry(record.from).or_default().push(record.to);
        calls_in.entry(record.to).or_default().push(record.from);
    }

    let mut graph = KnowledgeGraph {
        root,
        root_path: file.root_path,
        nodes,
        contains,
        parent,
        calls_out,
        calls_in,
        by_qualified_name,
        file_by_path,
        corpus_stats: Default::default(),
        diagnostics: file.diagnostics,
    };
    graph.corpus_stats = compute_corpus_stats(&graph);
    Ok(graph)
}
