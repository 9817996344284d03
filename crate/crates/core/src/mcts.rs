//! Monte Carlo tree search over the knowledge graph.
//!
//! Each iteration runs four stages: UCT selection down the search tree,
//! correlation expansion of the most issue-relevant unexpanded child,
//! simulation (greedy BM25 descent through the graph to a leaf, which a
//! reward oracle then scores), and backpropagation, during which functions
//! on a high-reward path pull their callers and callees into the tree as
//! reference children. Leaves scoring at or above the threshold are
//! collected into the exploration report.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experience::dependency_description;
use crate::graph::{KnowledgeGraph, NodeId, NodeKind};
use crate::relevance::{self, tokenize, RelevanceConfig};
use crate::reward::{RewardOracle, RewardRequest, RewardScore};

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("invalid exploration config: {0}")]
    InvalidConfig(String),
    #[error("graph is trivial: it contains no file nodes")]
    TrivialGraph,
    #[error("nothing to expand: node has no unexpanded children")]
    NothingToExpand,
    #[error("report file error: {0}")]
    ReportFile(String),
}

/// Exploration budget and tuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationConfig {
    pub max_iterations: u64,
    pub max_seconds: f64,
    /// UCT exploration constant.
    pub c: f64,
    /// Minimum reward for a leaf to be collected and for reference
    /// expansion to trigger.
    pub reward_threshold: u8,
    /// Carried for reproducibility bookkeeping; the shipped policies are
    /// fully deterministic and draw no random numbers.
    pub rng_seed: u64,
}

impl Default for ExplorationConfig {
    fn default() -> Self {
        ExplorationConfig {
            max_iterations: 600,
            max_seconds: 300.0,
            c: std::f64::consts::FRAC_1_SQRT_2,
            reward_threshold: 6,
            rng_seed: 0,
        }
    }
}

impl ExplorationConfig {
    pub fn validated(self) -> Result<Self, ExploreError> {
        if self.max_iterations < 1 {
            return Err(ExploreError::InvalidConfig(
                "max_iterations must be at least 1".to_string(),
            ));
        }
        if self.c.is_nan() || self.c < 0.0 {
            return Err(ExploreError::InvalidConfig(
                "exploration constant must be non-negative".to_string(),
            ));
        }
        if self.max_seconds.is_nan() || self.max_seconds <= 0.0 {
            return Err(ExploreError::InvalidConfig(
                "max_seconds must be positive".to_string(),
            ));
        }
        if self.reward_threshold > 10 {
            return Err(ExploreError::InvalidConfig(
                "reward_threshold must lie in 0..=10".to_string(),
            ));
        }
        Ok(self)
    }
}

/// UCT value `w/n + c * sqrt(2 ln n_parent / n)`. Unvisited nodes sort
/// first via an infinity sentinel.
pub fn uct_value(w: f64, n: u64, n_parent: u64, c: f64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    let n = n as f64;
    w / n + c * (2.0 * (n_parent as f64).ln() / n).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeOrigin {
    Containment,
    Reference,
}

/// Per-node MCTS bookkeeping.
#[derive(Debug, Clone)]
pub struct SearchTreeNode {
    pub graph_node: NodeId,
    /// Visit count.
    pub n: u64,
    /// Cumulative reward.
    pub w: u64,
    pub origin: NodeOrigin,
    /// Simulations whose selection path terminated at this node; kept so
    /// the visit-count conservation invariant stays checkable.
    pub sim_terminated: u64,
    children: Vec<usize>,
    unexpanded: Vec<NodeId>,
}

impl SearchTreeNode {
    pub fn children(&self) -> &[usize] {
        &self.children
    }

    pub fn unexpanded(&self) -> &[NodeId] {
        &self.unexpanded
    }
}

/// Arena-backed search tree; a graph node appears at most once.
pub struct SearchTree {
    nodes: Vec<SearchTreeNode>,
    index: HashMap<NodeId, usize>,
}

impl SearchTree {
    pub fn new(graph: &KnowledgeGraph) -> Self {
        let mut tree = SearchTree {
            nodes: Vec::new(),
            index: HashMap::new(),
        };
        tree.insert(graph.root(), NodeOrigin::Containment, graph);
        tree
    }

    fn insert(&mut self, graph_node: NodeId, origin: NodeOrigin, graph: &KnowledgeGraph) -> usize {
        let idx = self.nodes.len();
        self.index.insert(graph_node, idx);
        self.nodes.push(SearchTreeNode {
            graph_node,
            n: 0,
            w: 0,
            origin,
            sim_terminated: 0,
            children: Vec::new(),
            unexpanded: graph.children(graph_node).to_vec(),
        });
        idx
    }

    pub fn root_index(&self) -> usize {
        0
    }

    pub fn root(&self) -> &SearchTreeNode {
        &self.nodes[0]
    }

    pub fn node(&self, idx: usize) -> &SearchTreeNode {
        &self.nodes[idx]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, graph_node: NodeId) -> bool {
        self.index.contains_key(&graph_node)
    }

    pub fn find(&self, graph_node: NodeId) -> Option<&SearchTreeNode> {
        self.index.get(&graph_node).map(|i| &self.nodes[*i])
    }

    /// Drop unexpanded entries that entered the tree through another parent
    /// (reference expansion can adopt a node first).
    fn purge_unexpanded(&mut self, idx: usize) {
        let taken = std::mem::take(&mut self.nodes[idx].unexpanded);
        self.nodes[idx].unexpanded = taken
            .into_iter()
            .filter(|id| !self.index.contains_key(id))
            .collect();
    }

    /// Descend from the root, at each level taking the child with the
    /// highest UCT value (ties break on ascending qualified name). Stops at
    /// the first node with unexpanded graph children or with no children at
    /// all. Returns the arena indices along the path, root first.
    pub fn select(&mut self, c: f64, graph: &KnowledgeGraph) -> Vec<usize> {
        let mut path = vec![self.root_index()];
        let mut cur = self.root_index();
        loop {
            self.purge_unexpanded(cur);
            let node = &self.nodes[cur];
            if !node.unexpanded.is_empty() || node.children.is_empty() {
                return path;
            }
            let parent_n = node.n;
            let qname = |idx: usize| {
                graph
                    .node(self.nodes[idx].graph_node)
                    .map(|n| n.qualified_name.as_str())
                    .unwrap_or("")
            };
            let mut best = node.children[0];
            let mut best_value =
                uct_value(self.nodes[best].w as f64, self.nodes[best].n, parent_n, c);
            for &child in &node.children[1..] {
                let value = uct_value(self.nodes[child].w as f64, self.nodes[child].n, parent_n, c);
                let wins =
                    value > best_value || (value == best_value && qname(child) < qname(best));
                if wins {
                    best = child;
                    best_value = value;
                }
            }
            cur = best;
            path.push(cur);
        }
    }

    /// Move the unexpanded graph child ranked most relevant to the issue
    /// into the tree as a containment child. Errors when nothing is left to
    /// expand.
    pub fn expand_correlation(
        &mut self,
        idx: usize,
        graph: &KnowledgeGraph,
        ranker: &IssueRanker,
    ) -> Result<usize, ExploreError> {
        self.purge_unexpanded(idx);
        if self.nodes[idx].unexpanded.is_empty() {
            return Err(ExploreError::NothingToExpand);
        }
        let ranked = ranker.rank(&self.nodes[idx].unexpanded);
        let chosen = ranked[0];
        self.nodes[idx].unexpanded.retain(|id| *id != chosen);
        let child = self.insert(chosen, NodeOrigin::Containment, graph);
        self.nodes[idx].children.push(child);
        Ok(child)
    }

    /// Add one visit and `reward` to every node on the path.
    pub fn backpropagate(&mut self, path: &[usize], reward: u8) {
        for &idx in path {
            self.nodes[idx].n += 1;
            self.nodes[idx].w += u64::from(reward);
        }
    }

    /// During backpropagation: a function node on a path whose simulated
    /// reward met the threshold pulls its direct callees and callers into
    /// the tree as reference children. Non-functions and nodes already in
    /// the tree are untouched. Returns the added arena indices.
    pub fn reference_expand(
        &mut self,
        idx: usize,
        graph: &KnowledgeGraph,
        reward: u8,
        threshold: u8,
    ) -> Vec<usize> {
        if reward < threshold {
            return Vec::new();
        }
        let graph_id = self.nodes[idx].graph_node;
        let is_function = graph
            .node(graph_id)
            .map(|n| n.kind == NodeKind::Function)
            .unwrap_or(false);
        if !is_function {
            return Vec::new();
        }
        let mut neighbors: Vec<NodeId> = graph
            .callees(graph_id)
            .iter()
            .chain(graph.callers(graph_id))
            .copied()
            .collect();
        neighbors.sort_by(|a, b| {
            let qa = graph.node(*a).map(|n| n.qualified_name.as_str());
            let qb = graph.node(*b).map(|n| n.qualified_name.as_str());
            qa.cmp(&qb)
        });
        neighbors.dedup();

        let mut added = Vec::new();
        for neighbor in neighbors {
            if self.index.contains_key(&neighbor) {
                continue;
            }
            let child = self.insert(neighbor, NodeOrigin::Reference, graph);
            self.nodes[idx].children.push(child);
            added.push(child);
        }
        added
    }
}

/// BM25 ranking against one issue, with per-node document caching.
pub struct IssueRanker<'g> {
    graph: &'g KnowledgeGraph,
    issue_tokens: Vec<String>,
    relevance: RelevanceConfig,
    cache: RefCell<HashMap<NodeId, Vec<String>>>,
}

impl<'g> IssueRanker<'g> {
    pub fn new(graph: &'g KnowledgeGraph, issue_text: &str) -> Self {
        Self::with_config(graph, issue_text, RelevanceConfig::default())
    }

    pub fn with_config(
        graph: &'g KnowledgeGraph,
        issue_text: &str,
        relevance: RelevanceConfig,
    ) -> Self {
        IssueRanker {
            graph,
            issue_tokens: tokenize(issue_text),
            relevance,
            cache: RefCell::new(HashMap::new()),
        }
    }

    fn doc_tokens(&self, id: NodeId) -> Vec<String> {
        if let Some(tokens) = self.cache.borrow().get(&id) {
            return tokens.clone();
        }
        let tokens = tokenize(&self.graph.document_text(id));
        self.cache.borrow_mut().insert(id, tokens.clone());
        tokens
    }

    /// Candidates ordered by descending relevance, qualified-name tiebreak.
    pub fn rank(&self, candidates: &[NodeId]) -> Vec<NodeId> {
        relevance::rank_by_score(
            &self.issue_tokens,
            candidates,
            self.graph,
            &self.relevance,
            &|id| self.doc_tokens(id),
        )
    }
}

/// Greedy descent through the knowledge graph (not the search tree): keep
/// taking the most issue-relevant containment child until a node without
/// children remains.
pub fn simulate(graph: &KnowledgeGraph, start: NodeId, issue_text: &str) -> NodeId {
    simulate_ranked(graph, start, &IssueRanker::new(graph, issue_text))
}

fn simulate_ranked(graph: &KnowledgeGraph, start: NodeId, ranker: &IssueRanker) -> NodeId {
    let mut cur = start;
    loop {
        let children = graph.children(cur);
        if children.is_empty() {
            return cur;
        }
        cur = ranker.rank(children)[0];
    }
}

/// A leaf whose reward met the collection threshold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectedNode {
    pub graph_node: NodeId,
    pub qualified_name: String,
    pub reward: RewardScore,
    /// Containment path plus direct callers and callees, as text.
    pub dependency_desc: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExploreDiagnostics {
    /// Oracle failures tolerated by scoring the leaf 0.
    pub oracle_failures: u64,
    /// Evaluations answered from the reward cache.
    pub cache_hits: u64,
    /// Children added through reference expansion.
    pub reference_children_added: u64,
    /// Leaves with empty snippets, scored 0 without an oracle call.
    pub empty_snippet_leaves: u64,
}

/// The collected global repository information for one issue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationReport {
    /// Unique by graph node, descending reward, qualified-name tiebreak.
    pub collected: Vec<CollectedNode>,
    pub iterations_run: u64,
    /// Wall-clock measurement; excluded from canonical bytes because two
    /// otherwise identical runs never time identically.
    pub wall_seconds: f64,
    pub oracle_calls: u64,
    pub diagnostics: ExploreDiagnostics,
}

impl ExplorationReport {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serialization");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, ExploreError> {
        serde_json::from_str(text).map_err(|e| ExploreError::ReportFile(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), ExploreError> {
        std::fs::write(path, self.to_json())
            .map_err(|e| ExploreError::ReportFile(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, ExploreError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExploreError::ReportFile(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Deterministic serialization: the wall-clock field is zeroed, every
    /// other byte is the report. Two runs with the same seed and a
    /// deterministic oracle must agree on this exactly.
    pub fn canonical_json(&self) -> String {
        let mut clone = self.clone();
        clone.wall_seconds = 0.0;
        clone.to_json()
    }
}

/// Single-owner exploration loop. Drive it with [`Explorer::step`] for
/// per-iteration inspection or [`Explorer::run`] for the whole budget.
pub struct Explorer<'g, 'o> {
    graph: &'g KnowledgeGraph,
    issue_text: String,
    oracle: &'o mut dyn RewardOracle,
    config: ExplorationConfig,
    tree: SearchTree,
    ranker: IssueRanker<'g>,
    reward_cache: HashMap<NodeId, RewardScore>,
    collected: BTreeMap<NodeId, CollectedNode>,
    iterations_run: u64,
    oracle_calls: u64,
    diagnostics: ExploreDiagnostics,
    started: Instant,
}

impl<'g, 'o> Explorer<'g, 'o> {
    pub fn new(
        graph: &'g KnowledgeGraph,
        issue_text: &str,
        oracle: &'o mut dyn RewardOracle,
        config: ExplorationConfig,
    ) -> Result<Self, ExploreError> {
        let config = config.validated()?;
        if graph.file_ids().is_empty() {
            return Err(ExploreError::TrivialGraph);
        }
        Ok(Explorer {
            graph,
            issue_text: issue_text.to_string(),
            oracle,
            config,
            tree: SearchTree::new(graph),
            ranker: IssueRanker::new(graph, issue_text),
            reward_cache: HashMap::new(),
            collected: BTreeMap::new(),
            iterations_run: 0,
            oracle_calls: 0,
            diagnostics: ExploreDiagnostics::default(),
            started: Instant::now(),
        })
    }

    /// Replace the BM25 parameters used for expansion and simulation.
    /// Call before the first step.
    pub fn with_relevance(mut self, relevance: RelevanceConfig) -> Self {
        self.ranker = IssueRanker::with_config(self.graph, &self.issue_text, relevance);
        self
    }

    pub fn tree(&self) -> &SearchTree {
        &self.tree
    }

    pub fn iterations_run(&self) -> u64 {
        self.iterations_run
    }

    pub fn config(&self) -> &ExplorationConfig {
        &self.config
    }

    /// Run one iteration. Returns false once the iteration or time budget
    /// is exhausted; the time budget is only checked between iterations.
    pub fn step(&mut self) -> bool {
        if self.iterations_run >= self.config.max_iterations {
            return false;
        }
        if self.started.elapsed().as_secs_f64() >= self.config.max_seconds {
            return false;
        }

        // Selection.
        let mut path = self.tree.select(self.config.c, self.graph);
        let tip = *path.last().expect("selection path is never empty");

        // Correlation expansion.
        let start = if !self.tree.node(tip).unexpanded.is_empty() {
            let child = self
                .tree
                .expand_correlation(tip, self.graph, &self.ranker)
                .expect("tip has unexpanded children");
            path.push(child);
            self.tree.node(child).graph_node
        } else {
            self.tree.node(tip).graph_node
        };

        // Simulation and evaluation.
        let leaf = simulate_ranked(self.graph, start, &self.ranker);
        let reward = self.evaluate(leaf);
        if reward.value >= self.config.reward_threshold {
            self.collect(leaf, reward.clone());
        }

        // Backpropagation and reference expansion.
        self.tree.backpropagate(&path, reward.value);
        let terminal = *path.last().expect("path is never empty");
        self.tree.nodes[terminal].sim_terminated += 1;
        for &idx in &path {
            let added = self.tree.reference_expand(
                idx,
                self.graph,
                reward.value,
                self.config.reward_threshold,
            );
            self.diagnostics.reference_children_added += added.len() as u64;
        }

        self.iterations_run += 1;
        true
    }

    /// Run until the iteration or time budget is exhausted.
    pub fn run(&mut self) {
        while self.step() {}
    }

    fn evaluate(&mut self, leaf: NodeId) -> RewardScore {
        if let Some(cached) = self.reward_cache.get(&leaf) {
            self.diagnostics.cache_hits += 1;
            return cached.clone();
        }
        let node = self.graph.node(leaf).expect("leaf exists in graph");
        if node.snippet.is_empty() {
            self.diagnostics.empty_snippet_leaves += 1;
            let score = RewardScore::bare(0);
            self.reward_cache.insert(leaf, score.clone());
            return score;
        }
        let request = RewardRequest::new(
            self.issue_text.clone(),
            node.qualified_name.clone(),
            node.snippet.clone(),
            dependency_description(self.graph, leaf),
        )
        .expect("snippet checked non-empty");
        self.oracle_calls += 1;
        match self.oracle.score(&request) {
            Ok(score) => {
                self.reward_cache.insert(leaf, score.clone());
                score
            }
            Err(_) => {
                // The run continues; the leaf reads as irrelevant this time
                // and may be retried if reached again.
                self.diagnostics.oracle_failures += 1;
                RewardScore::bare(0)
            }
        }
    }

    fn collect(&mut self, leaf: NodeId, reward: RewardScore) {
        if self.collected.contains_key(&leaf) {
            return;
        }
        let node = self.graph.node(leaf).expect("leaf exists in graph");
        self.collected.insert(
            leaf,
            CollectedNode {
                graph_node: leaf,
                qualified_name: node.qualified_name.clone(),
                reward,
                dependency_desc: dependency_description(self.graph, leaf),
            },
        );
    }

    pub fn report(&self) -> ExplorationReport {
        let mut collected: Vec<CollectedNode> = self.collected.values().cloned().collect();
        collected.sort_by(|a, b| {
            b.reward
                .value
                .cmp(&a.reward.value)
                .then_with(|| a.qualified_name.cmp(&b.qualified_name))
        });
        ExplorationReport {
            collected,
            iterations_run: self.iterations_run,
            wall_seconds: self.started.elapsed().as_secs_f64(),
            oracle_calls: self.oracle_calls,
            diagnostics: self.diagnostics.clone(),
        }
    }
}

/// Whole-budget exploration returning only the report.
pub fn explore(
    graph: &KnowledgeGraph,
    issue_text: &str,
    oracle: &mut dyn RewardOracle,
    config: ExplorationConfig,
) -> Result<ExplorationReport, ExploreError> {
    let mut explorer = Explorer::new(graph, issue_text, oracle, config)?;
    explorer.run();
    Ok(explorer.report())
}

/// Like [`explore`], also handing back the final search tree for
/// inspection.
pub fn explore_with_tree(
    graph: &KnowledgeGraph,
    issue_text: &str,
    oracle: &mut dyn RewardOracle,
    config: ExplorationConfig,
) -> Result<(ExplorationReport, SearchTree), ExploreError> {
    let mut explorer = Explorer::new(graph, issue_text, oracle, config)?;
    explorer.run();
    let report = explorer.report();
    Ok((report, explorer.tree))
}


#[cfg(test)]
mod empty_repo_tests {
    use super::*;
    use crate::graph::{build_graph, BuildConfig};

    #[test]
    fn simulate_from_repository_of_empty_files_stops_at_a_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.py"), "").unwrap();
        std::fs::write(dir.path().join("b.py"), "").unwrap();
        let graph = build_graph(dir.path(), &BuildConfig::default()).unwrap();
        let leaf = simulate(&graph, graph.root(), "anything");
        assert_eq!(graph.node(leaf).unwrap().kind, crate::graph::NodeKind::File);
    }
}
