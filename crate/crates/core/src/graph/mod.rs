//! Repository knowledge graph: files, classes and functions arranged in a
//! containment tree, extended with function-to-function call edges.

mod build;
mod calls;
mod lang;
mod python;
mod store;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::relevance::CorpusStats;

pub(crate) use build::LineIndex;
pub use build::{build_graph, build_graph_with_registry, parse_file, BuildConfig};
pub use calls::resolve_calls;
pub use lang::{CallSite, LanguageAdapter, LanguageRegistry, ParseFailure, ParsedFile, RawEntity};
pub use python::PythonAdapter;
pub use store::{load_graph, save_graph, GRAPH_FORMAT_VERSION};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("root path not found or not a directory: {0}")]
    RootNotFound(String),
    #[error("no parseable files under {0}")]
    NoParseableFiles(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("graph file format error: {0}")]
    Format(String),
}

/// Stable node identifier, derived from (kind, qualified name, file path,
/// start line). Identical across rebuilds of an unchanged tree.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u128);

impl NodeId {
    pub fn derive(kind: NodeKind, qualified_name: &str, file_path: &str, start_line: u32) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(kind.as_str().as_bytes());
        hasher.update([0]);
        hasher.update(qualified_name.as_bytes());
        hasher.update([0]);
        hasher.update(file_path.as_bytes());
        hasher.update([0]);
        hasher.update(start_line.to_le_bytes());
        let digest = hasher.finalize();
        let mut bytes = [0u8; 16];
        bytes.copy_from_slice(&digest[..16]);
        NodeId(u128::from_be_bytes(bytes))
    }

    pub fn to_hex(self) -> String {
        format!("{:032x}", self.0)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        if s.len() != 32 {
            return None;
        }
        u128::from_str_radix(s, 16).ok().map(NodeId)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:032x}", self.0)
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NodeId({:032x})", self.0)
    }
}

impl Serialize for NodeId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for NodeId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        NodeId::from_hex(&s).ok_or_else(|| serde::de::Error::custom("malformed node id"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    Repository,
    File,
    Class,
    Function,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Repository => "repository",
            NodeKind::File => "file",
            NodeKind::Class => "class",
            NodeKind::Function => "function",
        }
    }
}

/// Source location of an entity. Lines are 1-based inclusive, columns are
/// 0-based byte offsets within their line (`end_col` is exclusive).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file_path: String,
    pub start_line: u32,
    pub end_line: u32,
    pub start_col: u32,
    pub end_col: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: NodeId,
    pub kind: NodeKind,
    /// Identifier text; empty for the repository node. File nodes carry the
    /// file name including extension.
    pub name: String,
    /// Dot-joined path from the file module down to the entity, e.g.
    /// `pkg.parser.Parser.parse`. Empty for the repository node.
    pub qualified_name: String,
    pub span: Option<SourceSpan>,
    /// Byte-exact source slice of the span. Whole file content for File
    /// nodes, empty for the repository node.
    pub snippet: String,
    /// Leading docstring, if present.
    pub doc_text: String,
    /// Set on File nodes whose source failed to parse; such files carry no
    /// child entities.
    pub parse_failed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeKind {
    Contains,
    Calls,
}

/// Counters for conditions tolerated during a build.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDiagnostics {
    pub parse_failures: u64,
    pub unresolved_calls: u64,
    pub ambiguous_calls: u64,
}

/// Immutable entity graph over one source tree.
///
/// `Contains` edges form a tree rooted at the repository node; `Calls` edges
/// connect functions only. After construction the graph never changes, so it
/// is safe to share across any number of concurrent readers.
#[derive(Debug, Clone)]
pub struct KnowledgeGraph {
    root: NodeId,
    root_path: String,
    nodes: HashMap<NodeId, GraphNode>,
    contains: HashMap<NodeId, Vec<NodeId>>,
    parent: HashMap<NodeId, NodeId>,
    calls_out: HashMap<NodeId, Vec<NodeId>>,
    calls_in: HashMap<NodeId, Vec<NodeId>>,
    by_qualified_name: HashMap<String, NodeId>,
    file_by_path: HashMap<String, NodeId>,
    corpus_stats: CorpusStats,
    diagnostics: GraphDiagnostics,
}

impl KnowledgeGraph {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn root_path(&self) -> &str {
        &self.root_path
    }

    pub fn node(&self, id: NodeId) -> Option<&GraphNode> {
        self.nodes.get(&id)
    }

    /// Exact-match lookup on qualified name. Empty names never match.
    pub fn get_node(&self, qualified_name: &str) -> Option<&GraphNode> {
        if qualified_name.is_empty() {
            return None;
        }
        self.by_qualified_name
            .get(qualified_name)
            .and_then(|id| self.nodes.get(id))
    }

    /// The File node for a repository-relative path.
    pub fn file_node(&self, path: &str) -> Option<&GraphNode> {
        self.file_by_path
            .get(path)
            .and_then(|id| self.nodes.get(id))
    }

    /// Containment children in source order.
    pub fn children(&self, id: NodeId) -> &[NodeId] {
        self.contains.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.parent.get(&id).copied()
    }

    /// Functions called by `id`, sorted by qualified name.
    pub fn callees(&self, id: NodeId) -> &[NodeId] {
        self.calls_out.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Functions calling `id`, sorted by qualified name.
    pub fn callers(&self, id: NodeId) -> &[NodeId] {
        self.calls_in.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains_edge_count(&self) -> usize {
        self.contains.values().map(Vec::len).sum()
    }

    pub fn call_edge_count(&self) -> usize {
        self.calls_out.values().map(Vec::len).sum()
    }

    pub fn corpus_stats(&self) -> &CorpusStats {
        &self.corpus_stats
    }

    pub fn diagnostics(&self) -> &GraphDiagnostics {
        &self.diagnostics
    }

    /// All nodes in canonical order: the repository node first, then by
    /// (file path, start line, qualified name).
    pub fn nodes_sorted(&self) -> Vec<&GraphNode> {
        let mut all: Vec<&GraphNode> = self.nodes.values().collect();
        all.sort_by(|a, b| node_sort_key(a).cmp(&node_sort_key(b)));
        all
    }

    /// Node ids of every node except the repository root, canonical order.
    pub fn entity_ids(&self) -> Vec<NodeId> {
        self.nodes_sorted()
            .into_iter()
            .filter(|n| n.kind != NodeKind::Repository)
            .map(|n| n.id)
            .collect()
    }

    /// Path of nodes from the repository root down to `id`, inclusive.
    pub fn containment_path(&self, id: NodeId) -> Vec<NodeId> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// The file a node belongs to (the node itself if it is a File).
    pub fn file_of(&self, id: NodeId) -> Option<&GraphNode> {
        self.containment_path(id)
            .into_iter()
            .filter_map(|nid| self.nodes.get(&nid))
            .find(|n| n.kind == NodeKind::File)
    }

    /// Innermost enclosing class, counting the node itself.
    pub fn enclosing_class(&self, id: NodeId) -> Option<&GraphNode> {
        self.containment_path(id)
            .into_iter()
            .rev()
            .filter_map(|nid| self.nodes.get(&nid))
            .find(|n| n.kind == NodeKind::Class)
    }

    /// Text scored by the relevance layer: name, docstring and snippet.
    pub fn document_text(&self, id: NodeId) -> String {
        match self.nodes.get(&id) {
            Some(n) => format!("{}\n{}\n{}", n.name, n.doc_text, n.snippet),
            None => String::new(),
        }
    }

    /// Node ids of File nodes, sorted by path.
    pub fn file_ids(&self) -> Vec<NodeId> {
        let mut files: Vec<(&String, NodeId)> =
            self.file_by_path.iter().map(|(p, id)| (p, *id)).collect();
        files.sort();
        files.into_iter().map(|(_, id)| id).collect()
    }

    /// Every edge as `(kind, from, to)` in canonical order: containment
    /// edges in tree order first, then call edges sorted by endpoint names.
    pub fn edges(&self) -> Vec<(EdgeKind, NodeId, NodeId)> {
        let mut out = Vec::with_capacity(self.contains_edge_count() + self.call_edge_count());
        for node in self.nodes_sorted() {
            for child in self.children(node.id) {
                out.push((EdgeKind::Contains, node.id, *child));
            }
        }
        for node in self.nodes_sorted() {
            for callee in self.callees(node.id) {
                out.push((EdgeKind::Calls, node.id, *callee));
            }
        }
        out
    }
}

fn node_sort_key(n: &GraphNode) -> (u8, &str, u32, &str) {
    let kind_rank = match n.kind {
        NodeKind::Repository => 0,
        _ => 1,
    };
    let (path, line) = match &n.span {
        Some(s) => (s.file_path.as_str(), s.start_line),
        None => ("", 0),
    };
    (kind_rank, path, line, &n.qualified_name)
}


#[cfg(test)]
mod encoding_tests {
    use super::*;

    #[test]
    fn unicode_sources_keep_byte_exact_snippets() {
        let dir = tempfile::tempdir().unwrap();
        let source = "\"\"\"Módulo de飾り pruebas — ünïcode.\"\"\"\n\n\nclass Grüße:\n    \"\"\"Überschrift mit Emoji 🦀.\"\"\"\n\n    def grüßen(self, wer):\n        \"\"\"Sagt „hallo“.\"\"\"\n        return \"¡Hola, \" + wer + \"! 你好\"\n";
        std::fs::write(dir.path().join("uni.py"), source).unwrap();
        let graph = build_graph(dir.path(), &BuildConfig::default()).unwrap();
        let class = graph.get_node("uni.Grüße").unwrap();
        assert!(class.snippet.starts_with("class Grüße:"));
        assert_eq!(class.doc_text, "Überschrift mit Emoji 🦀.");
        let method = graph.get_node("uni.Grüße.grüßen").unwrap();
        assert!(method.snippet.contains("你好"));
        // Snippets remain byte-exact slices of the file.
        let file = graph.file_node("uni.py").unwrap();
        assert!(file.snippet.contains(&class.snippet));
        assert!(class.snippet.contains(&method.snippet));
    }

    #[test]
    fn crlf_sources_parse_with_byte_exact_snippets() {
        let dir = tempfile::tempdir().unwrap();
        let source =
            "def crlf(a):\r\n    return a + 1\r\n\r\n\r\ndef caller():\r\n    return crlf(1)\r\n";
        std::fs::write(dir.path().join("win.py"), source).unwrap();
        let graph = build_graph(dir.path(), &BuildConfig::default()).unwrap();
        let crlf = graph.get_node("win.crlf").unwrap();
        let caller = graph.get_node("win.caller").unwrap();
        assert!(source.contains(&crlf.snippet));
        assert!(source.contains(&caller.snippet));
        assert_eq!(graph.callees(caller.id), &[crlf.id]);
        // Fixture stays searchable through the byte-span machinery.
        let hits = crate::search::search_code(&graph, "return crlf(1)").unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].qualified_name, "win.caller");
    }

    #[test]
    fn tier_ordering_is_exact_then_prefix_then_contains() {
        let dir = tempfile::tempdir().unwrap();
        let source = "def fetch():\n    return 1\n\n\ndef fetch_all():\n    return 2\n\n\ndef prefetch():\n    return 3\n";
        std::fs::write(dir.path().join("t.py"), source).unwrap();
        let graph = build_graph(dir.path(), &BuildConfig::default()).unwrap();
        let results = crate::search::search_method(&graph, "fetch", None).unwrap();
        let summary: Vec<(&str, crate::search::MatchKind)> = results
            .iter()
            .map(|r| (r.qualified_name.as_str(), r.match_kind))
            .collect();
        assert_eq!(
            summary,
            vec![
                ("t.fetch", crate::search::MatchKind::Exact),
                ("t.fetch_all", crate::search::MatchKind::Prefix),
                ("t.prefetch", crate::search::MatchKind::Contains),
            ]
        );
    }
}
