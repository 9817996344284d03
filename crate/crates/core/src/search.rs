//! Three-layer retrieval over the knowledge graph: class search, method
//! search and verbatim code-fragment search. These back the resolver
//! agent's tool calls and the `search` CLI subcommand.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experience::format_location;
use crate::graph::{GraphNode, KnowledgeGraph, LineIndex, NodeId, NodeKind};

/// Result cap per query, bounding prompt growth.
pub const MAX_RESULTS: usize = 10;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("search query must not be empty")]
    EmptyQuery,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatchKind {
    Exact,
    Prefix,
    Contains,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub node: NodeId,
    pub qualified_name: String,
    pub location: String,
    pub snippet: String,
    pub match_kind: MatchKind,
}

impl SearchResult {
    fn new(graph: &KnowledgeGraph, node: &GraphNode, match_kind: MatchKind) -> Self {
        SearchResult {
            node: node.id,
            qualified_name: node.qualified_name.clone(),
            location: format_location(graph, node.id),
            snippet: node.snippet.clone(),
            match_kind,
        }
    }
}

/// Name-match rank: exact before prefix before contains, case-sensitive
/// before case-insensitive within each tier.
fn match_rank(name: &str, query: &str) -> Option<(u8, MatchKind)> {
    let name_lower = name.to_lowercase();
    let query_lower = query.to_lowercase();
    if name == query {
        Some((0, MatchKind::Exact))
    } else if name_lower == query_lower {
        Some((1, MatchKind::Exact))
    } else if name.starts_with(query) {
        Some((2, MatchKind::Prefix))
    } else if name_lower.starts_with(&query_lower) {
        Some((3, MatchKind::Prefix))
    } else if name.contains(query) {
        Some((4, MatchKind::Contains))
    } else if name_lower.contains(&query_lower) {
        Some((5, MatchKind::Contains))
    } else {
        None
    }
}

fn search_by_name(
    graph: &KnowledgeGraph,
    kind: NodeKind,
    query: &str,
    scope: Option<&str>,
) -> Result<Vec<SearchResult>, SearchError> {
    if query.is_empty() {
        return Err(SearchError::EmptyQuery);
    }
    let mut ranked: Vec<(u8, &GraphNode, MatchKind)> = Vec::new();
    for node in graph.nodes_sorted() {
        if node.kind != kind {
            continue;
        }
        if let Some(scope) = scope {
            if !in_scope(graph, node, scope) {
                continue;
            }
        }
        if let Some((rank, match_kind)) = match_rank(&node.name, query) {
            ranked.push((rank, node, match_kind));
        }
    }
    ranked.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then_with(|| a.1.qualified_name.cmp(&b.1.qualified_name))
    });
    Ok(ranked
        .into_iter()
        .take(MAX_RESULTS)
        .map(|(_, node, match_kind)| SearchResult::new(graph, node, match_kind))
        .collect())
}

/// Scope filter for method search: the enclosing class name or the file
/// path (or module name) must match.
fn in_scope(graph: &KnowledgeGraph, node: &GraphNode, scope: &str) -> bool {
    if let Some(class) = graph.enclosing_class(node.id) {
        if class.name == scope {
            return true;
        }
    }
    if let Some(file) = graph.file_of(node.id) {
        if file.name == scope || file.qualified_name == scope {
            return true;
        }
        if let Some(span) = &file.span {
            if span.file_path == scope {
                return true;
            }
        }
    }
    false
}

/// Class nodes matching `name`.
pub fn search_class(graph: &KnowledgeGraph, name: &str) -> Result<Vec<SearchResult>, SearchError> {
    search_by_name(graph, NodeKind::Class, name, None)
}

/// Function nodes matching `name`, optionally restricted to an enclosing
/// class or file.
pub fn search_method(
    graph: &KnowledgeGraph,
    name: &str,
    scope: Option<&str>,
) -> Result<Vec<SearchResult>, SearchError> {
    search_by_name(graph, NodeKind::Function, name, scope)
}

/// Innermost entities whose snippet contains `fragment` verbatim, one per
/// occurrence, deduplicated by node.
pub fn search_code(
    graph: &KnowledgeGraph,
    fragment: &str,
) -> Result<Vec<SearchResult>, SearchError> {
    let fragment = fragment.trim();
    if fragment.is_empty() {
        return Err(SearchError::EmptyQuery);
    }
    let mut results: Vec<SearchResult> = Vec::new();
    for file_id in graph.file_ids() {
        let file = match graph.node(file_id) {
            Some(f) => f,
            None => continue,
        };
        let lines = LineIndex::new(&file.snippet);
        for (offset, _) in file.snippet.match_indices(fragment) {
            let id = innermost_at(graph, file_id, &lines, offset, fragment.len());
            let node = graph.node(id).expect("innermost node exists");
            if results.iter().any(|r| r.node == id) {
                continue;
            }
            let match_kind = if node.snippet == fragment {
                MatchKind::Exact
            } else {
                MatchKind::Contains
            };
            results.push(SearchResult::new(graph, node, match_kind));
            if results.len() >= MAX_RESULTS {
                return Ok(results);
            }
        }
    }
    Ok(results)
}

/// Deepest entity whose byte span contains `[offset, offset + len)` within
/// the file; falls back to the file node itself.
fn innermost_at(
    graph: &KnowledgeGraph,
    file_id: NodeId,
    lines: &LineIndex,
    offset: usize,
    len: usize,
) -> NodeId {
    let mut best = file_id;
    let mut cursor = file_id;
    loop {
        let mut descended = false;
        for &child in graph.children(cursor) {
            let node = match graph.node(child) {
                Some(n) => n,
                None => continue,
            };
            let span = match &node.span {
                Some(s) => s,
                None => continue,
            };
            let start = lines.offset(span.start_line, span.start_col);
            let end = lines.offset(span.end_line, span.end_col);
            if let (Some(start), Some(end)) = (start, end) {
                if start <= offset && offset + len <= end {
                    best = child;
                    cursor = child;
                    descended = true;
                    break;
                }
            }
        }
        if !descended {
            return best;
        }
    }
}

/// Map a location string back to its node. Returns the node whose file,
/// enclosing class and function name all match; ambiguity resolves to the
/// smallest qualified name.
pub fn resolve_location(graph: &KnowledgeGraph, location: &str) -> Option<NodeId> {
    let file_path = tag_value(location, "file")?;
    let class = tag_value(location, "class");
    let func = tag_value(location, "func");

    let file = graph.file_node(&file_path)?;
    if class.is_none() && func.is_none() {
        return Some(file.id);
    }

    let mut candidates: Vec<&GraphNode> = Vec::new();
    let mut stack: Vec<NodeId> = graph.children(file.id).to_vec();
    while let Some(id) = stack.pop() {
        stack.extend_from_slice(graph.children(id));
        let node = match graph.node(id) {
            Some(n) => n,
            None => continue,
        };
        let matched = match &func {
            Some(func_name) => {
                node.kind == NodeKind::Function
                    && node.name == *func_name
                    && graph.enclosing_class(id).map(|c| c.name.clone()) == class
            }
            None => node.kind == NodeKind::Class && Some(&node.name) == class.as_ref(),
        };
        if matched {
            candidates.push(node);
        }
    }
    candidates.sort_by(|a, b| a.qualified_name.cmp(&b.qualified_name));
    candidates.first().map(|n| n.id)
}

fn tag_value(text: &str, tag: &str) -> Option<String> {
    let open = format!("<{tag}>");
    let close = format!("</{tag}>");
    let start = text.find(&open)? + open.len();
    let end = text[start..].find(&close)? + start;
    Some(text[start..end].to_string())
}
