//! Per-language parsing adapters. Graph assembly is language-agnostic;
//! adapters translate one source file into entities and call sites.

use std::collections::HashMap;
use std::sync::Arc;

use super::NodeKind;

/// An entity (class or function) found in one file, positions in bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawEntity {
    pub kind: NodeKind,
    pub name: String,
    /// Names of the enclosing entities within the file, outermost first.
    pub parent_chain: Vec<String>,
    pub start_byte: usize,
    pub end_byte: usize,
    pub doc_text: String,
}

/// A call expression found inside a function body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallSite {
    /// Chain of enclosing entity names down to the innermost enclosing
    /// function, outermost first.
    pub caller_chain: Vec<String>,
    /// Plain callee identifier; `None` when the call target carries no name
    /// (e.g. calling the result of another call).
    pub callee_name: Option<String>,
}

/// Why a file could not be parsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseFailure {
    pub message: String,
    pub line: u32,
}

impl std::fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Everything extracted from one file, entities in source order.
#[derive(Debug, Clone, Default)]
pub struct ParsedFile {
    pub entities: Vec<RawEntity>,
    pub calls: Vec<CallSite>,
    /// Module-level docstring, if any.
    pub doc_text: String,
}

pub trait LanguageAdapter: Send + Sync {
    /// File extensions (without dot) this adapter handles.
    fn extensions(&self) -> &[&'static str];

    fn parse(&self, source: &str) -> Result<ParsedFile, ParseFailure>;

    /// Syntax-only check used by patch validation.
    fn check_syntax(&self, source: &str) -> Result<(), ParseFailure> {
        self.parse(source).map(|_| ())
    }
}

/// Adapter lookup by file extension.
pub struct LanguageRegistry {
    by_extension: HashMap<&'static str, Arc<dyn LanguageAdapter>>,
}

impl LanguageRegistry {
    pub fn new() -> Self {
        LanguageRegistry {
            by_extension: HashMap::new(),
        }
    }

    /// Registry with all built-in adapters.
    pub fn builtin() -> Self {
        let mut registry = LanguageRegistry::new();
        registry.register(Arc::new(super::PythonAdapter));
        registry
    }

    /// Later registrations win on extension clashes.
    pub fn register(&mut self, adapter: Arc<dyn LanguageAdapter>) {
        for ext in adapter.extensions() {
            self.by_extension.insert(ext, Arc::clone(&adapter));
        }
    }

    pub fn for_extension(&self, ext: &str) -> Option<&dyn LanguageAdapter> {
        self.by_extension.get(ext).map(Arc::as_ref)
    }

    pub fn for_path(&self, path: &str) -> Option<&dyn LanguageAdapter> {
        let ext = path.rsplit('.').next()?;
        self.for_extension(ext)
    }
}

impl Default for LanguageRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
