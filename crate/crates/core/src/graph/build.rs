//! Source-tree traversal and graph assembly.

use std::collections::HashMap;
use std::path::Path;

use walkdir::WalkDir;

use super::calls::{resolve_calls, PendingCalls};
use super::lang::{LanguageRegistry, RawEntity};
use super::{
    GraphDiagnostics, GraphError, GraphNode, KnowledgeGraph, NodeId, NodeKind, SourceSpan,
};
use crate::relevance;

/// Directory names never indexed, on top of hidden directories.
pub const DEFAULT_SKIP_DIRS: &[&str] = &[
    "node_modules",
    "target",
    "build",
    "dist",
    "vendor",
    "venv",
    "__pycache__",
    "site-packages",
];

#[derive(Debug, Clone)]
pub struct BuildConfig {
    /// File extensions (without dot) to index.
    pub extensions: Vec<String>,
    /// Extra exclusion globs. Patterns without `/` match any path segment;
    /// patterns with `/` match the repository-relative path. `*` and `?`
    /// stay within one segment, `**` crosses segments.
    pub exclude: Vec<String>,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            extensions: vec!["py".to_string()],
            exclude: Vec::new(),
        }
    }
}

impl BuildConfig {
    fn indexes_extension(&self, path: &str) -> bool {
        match path.rsplit_once('.') {
            Some((_, ext)) => self.extensions.iter().any(|e| e == ext),
            None => false,
        }
    }

    fn excluded(&self, rel_path: &str) -> bool {
        self.exclude.iter().any(|pattern| {
            if pattern.contains('/') {
                glob_match(pattern, rel_path)
            } else {
                rel_path.split('/').any(|seg| glob_match(pattern, seg))
            }
        })
    }
}

/// Parse a whole source tree into a knowledge graph.
///
/// Files that fail to parse become File nodes with `parse_failed` set and no
/// children; a build only fails outright when the root is missing or no
/// indexable file exists at all.
pub fn build_graph(root: &Path, config: &BuildConfig) -> Result<KnowledgeGraph, GraphError> {
    build_graph_with_registry(root, config, &LanguageRegistry::builtin())
}

pub fn build_graph_with_registry(
    root: &Path,
    config: &BuildConfig,
    registry: &LanguageRegistry,
) -> Result<KnowledgeGraph, GraphError> {
    if !root.is_dir() {
        return Err(GraphError::RootNotFound(root.display().to_string()));
    }

    let discovered = discover_files(root, config);
    let mut assembler = Assembler::new(root.display().to_string());
    let mut pending_calls: Vec<PendingCalls> = Vec::new();

    for rel_path in &discovered.indexable {
        let abs = root.join(rel_path);
        let module = module_name(rel_path);
        let source = match std::fs::read_to_string(&abs) {
            Ok(source) => source,
            Err(_) => {
                // Unreadable files are recorded like unparseable ones.
                assembler.add_file(rel_path, &module, "", String::new(), true);
                assembler.diagnostics.parse_failures += 1;
                continue;
            }
        };
        // An indexed extension without a grammar still yields a File node,
        // flagged, so the file stays visible to code search.
        let parsed = registry
            .for_path(rel_path)
            .map(|adapter| adapter.parse(&source));
        match parsed {
            Some(Ok(parsed)) => {
                assembler.add_file(rel_path, &module, &source, parsed.doc_text, false);
                assembler.add_entities(rel_path, &module, &source, &parsed.entities);
                pending_calls.push(PendingCalls {
                    file_module: module,
                    sites: parsed.calls,
                });
            }
            Some(Err(_)) | None => {
                assembler.add_file(rel_path, &module, &source, String::new(), true);
                assembler.diagnostics.parse_failures += 1;
            }
        }
    }

    let mut graph = assembler.finish();
    // A tree holding files we cannot index at all is an error; a genuinely
    // empty tree degenerates to the one-node graph.
    if graph.node_count() == 1 && discovered.saw_any_file {
        return Err(GraphError::NoParseableFiles(root.display().to_string()));
    }
    resolve_calls(&mut graph, &pending_calls);
    graph.corpus_stats = compute_corpus_stats(&graph);
    Ok(graph)
}

/// Parse one file into graph nodes paired with their parent qualified name.
/// Exposed for inspection and tests; `build_graph` is the production path.
pub fn parse_file(
    relative_path: &str,
    source_text: &str,
) -> Result<Vec<(GraphNode, String)>, GraphError> {
    let registry = LanguageRegistry::builtin();
    let adapter = registry
        .for_path(relative_path)
        .ok_or_else(|| GraphError::Format(format!("no language adapter for {relative_path}")))?;
    let parsed = adapter
        .parse(source_text)
        .map_err(|e| GraphError::Format(format!("{relative_path}: {e}")))?;
    let module = module_name(relative_path);
    let lines = LineIndex::new(source_text);
    Ok(parsed
        .entities
        .iter()
        .map(|entity| {
            let parent_qn = join_qualified(&module, &entity.parent_chain);
            let node = entity_node(relative_path, &module, source_text, &lines, entity);
            (node, parent_qn)
        })
        .collect())
}

struct Discovered {
    indexable: Vec<String>,
    saw_any_file: bool,
}

/// Collect indexable files as repository-relative, forward-slash paths,
/// sorted for deterministic builds.
fn discover_files(root: &Path, config: &BuildConfig) -> Discovered {
    let mut files = Vec::new();
    let mut saw_any_file = false;
    let walker = WalkDir::new(root)
        .follow_links(false)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|entry| {
            if entry.depth() == 0 {
                return true;
            }
            let name = entry.file_name().to_string_lossy();
            if name.starts_with('.') {
                return false;
            }
            if entry.file_type().is_dir() && DEFAULT_SKIP_DIRS.contains(&name.as_ref()) {
                return false;
            }
            let rel = relative_path(root, entry.path());
            !config.excluded(&rel)
        });
    for entry in walker.flatten() {
        if entry.file_type().is_file() {
            saw_any_file = true;
            let rel = relative_path(root, entry.path());
            if config.indexes_extension(&rel) {
                files.push(rel);
            }
        }
    }
    files.sort();
    Discovered {
        indexable: files,
        saw_any_file,
    }
}

fn relative_path(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Python-style module name: `pkg/mod.py` becomes `pkg.mod`.
pub(crate) fn module_name(rel_path: &str) -> String {
    let stem = match rel_path.rsplit_once('.') {
        Some((stem, _ext)) => stem,
        None => rel_path,
    };
    stem.replace('/', ".")
}

fn join_qualified(module: &str, chain: &[String]) -> String {
    let mut parts = vec![module.to_string()];
    parts.extend(chain.iter().cloned());
    parts.join(".")
}

pub(crate) struct LineIndex {
    /// Byte offset at which each line starts.
    starts: Vec<usize>,
    len: usize,
}

impl LineIndex {
    pub(crate) fn new(source: &str) -> Self {
        let mut starts = vec![0usize];
        for (i, b) in source.bytes().enumerate() {
            if b == b'\n' {
                starts.push(i + 1);
            }
        }
        LineIndex {
            starts,
            len: source.len(),
        }
    }

    /// 1-based line and 0-based column of a byte offset.
    pub(crate) fn position(&self, offset: usize) -> (u32, u32) {
        let clamped = offset.min(self.len);
        let line = self.starts.partition_point(|s| *s <= clamped);
        let col = clamped - self.starts[line - 1];
        (line as u32, col as u32)
    }

    /// Byte offset of a 1-based line and 0-based column.
    pub(crate) fn offset(&self, line: u32, col: u32) -> Option<usize> {
        let start = *self.starts.get(line.checked_sub(1)? as usize)?;
        Some(start + col as usize)
    }

    pub(crate) fn span(&self, file_path: &str, start: usize, end: usize) -> SourceSpan {
        let (start_line, start_col) = self.position(start);
        let (end_line, end_col) = if end > start {
            let (line, _) = self.position(end - 1);
            let col = end - self.starts[(line - 1) as usize];
            (line, col as u32)
        } else {
            (start_line, start_col)
        };
        SourceSpan {
            file_path: file_path.to_string(),
            start_line,
            end_line,
            start_col,
            end_col,
        }
    }
}

fn entity_node(
    rel_path: &str,
    module: &str,
    source: &str,
    lines: &LineIndex,
    entity: &RawEntity,
) -> GraphNode {
    let qualified = format!(
        "{}.{}",
        join_qualified(module, &entity.parent_chain),
        entity.name
    );
    let span = lines.span(rel_path, entity.start_byte, entity.end_byte);
    let id = NodeId::derive(entity.kind, &qualified, rel_path, span.start_line);
    GraphNode {
        id,
        kind: entity.kind,
        name: entity.name.clone(),
        qualified_name: qualified,
        span: Some(span),
        snippet: source[entity.start_byte..entity.end_byte].to_string(),
        doc_text: entity.doc_text.clone(),
        parse_failed: false,
    }
}

struct Assembler {
    root_path: String,
    root_id: NodeId,
    nodes: HashMap<NodeId, GraphNode>,
    contains: HashMap<NodeId, Vec<NodeId>>,
    parent: HashMap<NodeId, NodeId>,
    by_qualified_name: HashMap<String, NodeId>,
    file_by_path: HashMap<String, NodeId>,
    diagnostics: GraphDiagnostics,
}

impl Assembler {
    fn new(root_path: String) -> Self {
        let root_id = NodeId::derive(NodeKind::Repository, "", "", 0);
        let mut nodes = HashMap::new();
        nodes.insert(
            root_id,
            GraphNode {
                id: root_id,
                kind: NodeKind::Repository,
                name: String::new(),
                qualified_name: String::new(),
                span: None,
                snippet: String::new(),
                doc_text: String::new(),
                parse_failed: false,
            },
        );
        Assembler {
            root_path,
            root_id,
            nodes,
            contains: HashMap::new(),
            parent: HashMap::new(),
            by_qualified_name: HashMap::new(),
            file_by_path: HashMap::new(),
            diagnostics: GraphDiagnostics::default(),
        }
    }

    fn add_node(&mut self, node: GraphNode, parent: NodeId) {
        let id = node.id;
        self.by_qualified_name
            .insert(node.qualified_name.clone(), id);
        self.nodes.insert(id, node);
        self.contains.entry(parent).or_default().push(id);
        self.parent.insert(id, parent);
    }

    fn add_file(
        &mut self,
        rel_path: &str,
        module: &str,
        source: &str,
        doc_text: String,
        parse_failed: bool,
    ) {
        let lines = LineIndex::new(source);
        let span = lines.span(rel_path, 0, source.len());
        let id = NodeId::derive(NodeKind::File, module, rel_path, span.start_line);
        let name = rel_path.rsplit('/').next().unwrap_or(rel_path).to_string();
        self.file_by_path.insert(rel_path.to_string(), id);
        self.add_node(
            GraphNode {
                id,
                kind: NodeKind::File,
                name,
                qualified_name: module.to_string(),
                span: Some(span),
                snippet: source.to_string(),
                doc_text,
                parse_failed,
            },
            self.root_id,
        );
    }

    fn add_entities(&mut self, rel_path: &str, module: &str, source: &str, entities: &[RawEntity]) {
        let lines = LineIndex::new(source);
        let file_id = self.file_by_path[rel_path];
        // Entities arrive in source order, so parents precede children.
        let mut by_chain: HashMap<String, NodeId> = HashMap::new();
        for entity in entities {
            let node = entity_node(rel_path, module, source, &lines, entity);
            let chain_key = {
                let mut chain = entity.parent_chain.clone();
                chain.push(entity.name.clone());
                chain.join(".")
            };
            let parent_id = if entity.parent_chain.is_empty() {
                file_id
            } else {
                let parent_key = entity.parent_chain.join(".");
                by_chain.get(&parent_key).copied().unwrap_or(file_id)
            };
            by_chain.insert(chain_key, node.id);
            self.add_node(node, parent_id);
        }
    }

    fn finish(self) -> KnowledgeGraph {
        KnowledgeGraph {
            root: self.root_id,
            root_path: self.root_path,
            nodes: self.nodes,
            contains: self.contains,
            parent: self.parent,
            calls_out: HashMap::new(),
            calls_in: HashMap::new(),
            by_qualified_name: self.by_qualified_name,
            file_by_path: self.file_by_path,
            corpus_stats: relevance::CorpusStats::default(),
            diagnostics: self.diagnostics,
        }
    }
}

/// BM25 statistics over every node except the repository root.
pub(crate) fn compute_corpus_stats(graph: &KnowledgeGraph) -> relevance::CorpusStats {
    let docs: Vec<Vec<String>> = graph
        .entity_ids()
        .iter()
        .map(|id| relevance::tokenize(&graph.document_text(*id)))
        .collect();
    relevance::CorpusStats::from_documents(&docs)
}

/// Minimal glob matcher: `*` and `?` within a path segment, `**` across
/// segments.
pub(crate) fn glob_match(pattern: &str, path: &str) -> bool {
    let pat: Vec<&str> = pattern.split('/').collect();
    let segs: Vec<&str> = path.split('/').collect();
    match_segments(&pat, &segs)
}

fn match_segments(pat: &[&str], segs: &[&str]) -> bool {
    match pat.first() {
        None => segs.is_empty(),
        Some(&"**") => (0..=segs.len()).any(|skip| match_segments(&pat[1..], &segs[skip..])),
        Some(first) => match segs.first() {
            Some(seg) if match_one(first.as_bytes(), seg.as_bytes()) => {
                match_segments(&pat[1..], &segs[1..])
            }
            _ => false,
        },
    }
}

fn match_one(pat: &[u8], text: &[u8]) -> bool {
    match pat.first() {
        None => text.is_empty(),
        Some(b'*') => (0..=text.len()).any(|skip| match_one(&pat[1..], &text[skip..])),
        Some(b'?') => !text.is_empty() && match_one(&pat[1..], &text[1..]),
        Some(c) => text.first() == Some(c) && match_one(&pat[1..], &text[1..]),
    }
}
