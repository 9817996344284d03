//! Repository exploration engine.
//!
//! The pipeline has three stages:
//!
//! 1. **Graph construction** ([`graph`]): a source tree is parsed into a
//!    knowledge graph of files, classes and functions, connected by a
//!    containment tree and function-call edges.
//! 2. **Exploration** ([`mcts`]): Monte Carlo tree search walks the graph,
//!    expanding toward issue-relevant code (BM25, [`relevance`]) and scoring
//!    leaves with a reward oracle ([`reward`]). Nodes scoring at or above the
//!    collection threshold become the exploration report.
//! 3. **Utilization** ([`experience`], [`search`], [`resolver`]): the report
//!    is condensed into locations plus a model-written summary and plan, and
//!    an agent loop alternates search-tool calls with patch proposals until a
//!    validated unified diff is produced.
//!
//! Chat-model access goes through the [`llm`] boundary, which ships a live
//! HTTP client and a transcript-driven replay client for bit-exact offline
//! runs.

pub mod experience;
pub mod graph;
pub mod llm;
pub mod mcts;
pub mod relevance;
pub mod resolver;
pub mod reward;
pub mod search;

pub use experience::Experience;
pub use graph::{BuildConfig, GraphNode, KnowledgeGraph, NodeId, NodeKind, SourceSpan};
pub use llm::{ChatClient, Message, Role};
pub use mcts::{ExplorationConfig, ExplorationReport, Explorer};
pub use relevance::{CorpusStats, RelevanceConfig};
pub use resolver::{PatchResult, ResolverConfig};
pub use reward::{LexicalOracle, RewardOracle, RewardScore};
pub use search::SearchResult;
