//! Lexical relevance between issue text and graph nodes: Okapi BM25 over a
//! code-aware tokenization.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::graph::{KnowledgeGraph, NodeId};

/// BM25 parameters. `k1` controls term-frequency saturation, `b` document
/// length normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelevanceConfig {
    pub k1: f64,
    pub b: f64,
}

impl Default for RelevanceConfig {
    fn default() -> Self {
        RelevanceConfig { k1: 1.2, b: 0.75 }
    }
}

impl RelevanceConfig {
    pub fn is_valid(&self) -> bool {
        self.k1 >= 0.0 && (0.0..=1.0).contains(&self.b)
    }
}

/// Corpus statistics over the scored nodes (every node except the
/// repository root). A node's document is its name, docstring and snippet.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub doc_count: u64,
    pub avg_doc_len: f64,
    pub doc_freq: BTreeMap<String, u64>,
}

impl CorpusStats {
    pub fn from_documents(docs: &[Vec<String>]) -> Self {
        let doc_count = docs.len() as u64;
        let total_len: usize = docs.iter().map(Vec::len).sum();
        let avg_doc_len = if doc_count > 0 {
            total_len as f64 / doc_count as f64
        } else {
            0.0
        };
        let mut doc_freq = BTreeMap::new();
        for doc in docs {
            let distinct: BTreeSet<&String> = doc.iter().collect();
            for token in distinct {
                *doc_freq.entry(token.clone()).or_insert(0) += 1;
            }
        }
        CorpusStats {
            doc_count,
            avg_doc_len,
            doc_freq,
        }
    }
}

/// Lowercased tokens: identifiers split on underscores and camel-case
/// boundaries, punctuation discarded.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in text.split(|c: char| !c.is_alphanumeric()) {
        if word.is_empty() {
            continue;
        }
        for piece in split_camel(word) {
            tokens.push(piece.to_lowercase());
        }
    }
    tokens
}

/// Split one alphanumeric run at camel-case boundaries: `getHTTPUrl`
/// becomes `get`, `HTTP`, `Url`.
fn split_camel(word: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = word.char_indices().collect();
    let mut boundaries = vec![0usize];
    for i in 1..chars.len() {
        let (offset, cur) = chars[i];
        let (_, prev) = chars[i - 1];
        let upper_after_lower = cur.is_uppercase() && (prev.is_lowercase() || prev.is_numeric());
        let upper_run_ends = cur.is_uppercase()
            && prev.is_uppercase()
            && chars
                .get(i + 1)
                .map(|(_, n)| n.is_lowercase())
                .unwrap_or(false);
        if upper_after_lower || upper_run_ends {
            boundaries.push(offset);
        }
    }
    boundaries.push(word.len());
    boundaries
        .windows(2)
        .map(|w| &word[w[0]..w[1]])
        .filter(|s| !s.is_empty())
        .collect()
}

/// Okapi BM25 with non-negative IDF: terms in more than half the corpus
/// contribute nothing rather than penalizing. Query tokens are taken as a
/// set; tokens absent from the corpus contribute zero.
pub fn bm25_score(
    query_tokens: &[String],
    doc_tokens: &[String],
    stats: &CorpusStats,
    config: &RelevanceConfig,
) -> f64 {
    if stats.doc_count == 0 || doc_tokens.is_empty() || query_tokens.is_empty() {
        return 0.0;
    }
    let mut tf: HashMap<&str, u64> = HashMap::new();
    for token in doc_tokens {
        *tf.entry(token.as_str()).or_insert(0) += 1;
    }
    let doc_len = doc_tokens.len() as f64;
    let norm = if stats.avg_doc_len > 0.0 {
        1.0 - config.b + config.b * doc_len / stats.avg_doc_len
    } else {
        1.0 - config.b
    };

    let distinct: BTreeSet<&String> = query_tokens.iter().collect();
    let mut score = 0.0;
    for token in distinct {
        let term_freq = match tf.get(token.as_str()) {
            Some(f) => *f as f64,
            None => continue,
        };
        let doc_freq = match stats.doc_freq.get(token.as_str()) {
            Some(df) => *df as f64,
            None => continue,
        };
        let n = stats.doc_count as f64;
        let idf = ((n - doc_freq + 0.5) / (doc_freq + 0.5)).ln().max(0.0);
        score += idf * term_freq * (config.k1 + 1.0) / (term_freq + config.k1 * norm);
    }
    score
}

/// Order candidate nodes by descending BM25 score of the issue against each
/// node's document; ties break on ascending qualified name.
pub fn rank_candidates(
    issue_text: &str,
    candidates: &[NodeId],
    graph: &KnowledgeGraph,
) -> Vec<NodeId> {
    let query = tokenize(issue_text);
    rank_by_score(
        &query,
        candidates,
        graph,
        &RelevanceConfig::default(),
        &|id| tokenize(&graph.document_text(id)),
    )
}

/// Shared ranking core; `doc_tokens` abstracts caching strategies.
pub fn rank_by_score(
    query_tokens: &[String],
    candidates: &[NodeId],
    graph: &KnowledgeGraph,
    config: &RelevanceConfig,
    doc_tokens: &dyn Fn(NodeId) -> Vec<String>,
) -> Vec<NodeId> {
    let stats = graph.corpus_stats();
    let mut scored: Vec<(f64, &str, NodeId)> = candidates
        .iter()
        .map(|id| {
            let tokens = doc_tokens(*id);
            let score = bm25_score(query_tokens, &tokens, stats, config);
            let qn = graph
                .node(*id)
                .map(|n| n.qualified_name.as_str())
                .unwrap_or("");
            (score, qn, *id)
        })
        .collect();
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.1.cmp(b.1))
    });
    scored.into_iter().map(|(_, _, id)| id).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_splits_camel_case() {
        assert_eq!(tokenize("getUserName"), vec!["get", "user", "name"]);
    }

    #[test]
    fn tokenize_empty_is_empty() {
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn tokenize_splits_snake_case_and_drops_punctuation() {
        assert_eq!(tokenize("parse_file(path)"), vec!["parse", "file", "path"]);
    }

    #[test]
    fn tokenize_handles_upper_runs() {
        assert_eq!(tokenize("HTTPServer2x"), vec!["http", "server2x"]);
        assert_eq!(tokenize("getHTTPUrl"), vec!["get", "http", "url"]);
    }

    #[test]
    fn zero_overlap_scores_zero() {
        let docs = vec![tokenize("alpha beta"), tokenize("gamma delta")];
        let stats = CorpusStats::from_documents(&docs);
        let score = bm25_score(
            &tokenize("omega"),
            &docs[0],
            &stats,
            &RelevanceConfig::default(),
        );
        assert_eq!(score, 0.0);
    }

    #[test]
    fn higher_term_frequency_scores_higher() {
        // The queried term must stay under half the corpus or flooring
        // zeroes its idf.
        let docs = vec![
            tokenize("needle needle filler pad"),
            tokenize("needle filler filler pad"),
            tokenize("alpha beta gamma delta"),
            tokenize("epsilon zeta eta theta"),
            tokenize("iota kappa lambda mu"),
        ];
        let stats = CorpusStats::from_documents(&docs);
        let config = RelevanceConfig::default();
        let query = tokenize("needle");
        let s1 = bm25_score(&query, &docs[0], &stats, &config);
        let s2 = bm25_score(&query, &docs[1], &stats, &config);
        assert!(s1 > s2 && s2 > 0.0, "{s1} vs {s2}");
    }

    #[test]
    fn single_doc_corpus_matches_reference_value() {
        // One document that is also the query. With doc_count == 1 and
        // doc_freq == 1, idf = ln(1.5/1.5) = 0, so the score floors at 0.
        let docs = vec![tokenize("lonely token set")];
        let stats = CorpusStats::from_documents(&docs);
        let score = bm25_score(&docs[0], &docs[0], &stats, &RelevanceConfig::default());
        assert_eq!(score, 0.0);
    }

    #[test]
    fn corpus_stats_counts_documents_once_per_token() {
        let docs = vec![tokenize("a a b"), tokenize("a c")];
        let stats = CorpusStats::from_documents(&docs);
        assert_eq!(stats.doc_count, 2);
        assert_eq!(stats.doc_freq.get("a"), Some(&2));
        assert_eq!(stats.doc_freq.get("b"), Some(&1));
        assert!((stats.avg_doc_len - 2.5).abs() < 1e-12);
    }
}
