//! Condense an exploration report into "global experience": tagged location
//! strings plus a model-written summary and plan. The experience carries no
//! snippet bodies, only locations and the model's text.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{KnowledgeGraph, NodeId, NodeKind};
use crate::llm::{ChatClient, LlmError, Message};
use crate::mcts::ExplorationReport;

pub const DEFAULT_MAX_SNIPPETS: usize = 10;

pub const EXPERIENCE_FORMAT: &str = "rexplore-experience";
pub const EXPERIENCE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ExperienceError {
    #[error("exploration report is empty: nothing to summarize")]
    EmptyReport,
    #[error("chat client failed: {0}")]
    Chat(#[from] LlmError),
    #[error("experience file error: {0}")]
    File(String),
}

/// Location tags, summary and plan carried into the resolver prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Experience {
    /// One location string per source node, same order.
    pub locations: Vec<String>,
    pub summary: String,
    pub plan: String,
    pub source_nodes: Vec<NodeId>,
}

#[derive(Serialize, Deserialize)]
struct ExperienceFile {
    format: String,
    version: u32,
    #[serde(flatten)]
    experience: Experience,
}

impl Experience {
    pub fn save(&self, path: &Path) -> Result<(), ExperienceError> {
        let file = ExperienceFile {
            format: EXPERIENCE_FORMAT.to_string(),
            version: EXPERIENCE_FORMAT_VERSION,
            experience: self.clone(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("experience serialization");
        text.push('\n');
        std::fs::write(path, text)
            .map_err(|e| ExperienceError::File(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, ExperienceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperienceError::File(format!("{}: {e}", path.display())))?;
        let file: ExperienceFile =
            serde_json::from_str(&text).map_err(|e| ExperienceError::File(e.to_string()))?;
        if file.format != EXPERIENCE_FORMAT || file.version != EXPERIENCE_FORMAT_VERSION {
            return Err(ExperienceError::File(format!(
                "unsupported experience file {}/{}",
                file.format, file.version
            )));
        }
        Ok(file.experience)
    }
}

/// Tagged location of a node: `<file>PATH</file>` always, a `<class>` tag
/// when the node is or sits inside a class, and a `<func>` tag naming the
/// innermost function when the node is a function. No whitespace between
/// tags.
pub fn format_location(graph: &KnowledgeGraph, id: NodeId) -> String {
    let node = match graph.node(id) {
        Some(n) => n,
        None => return String::new(),
    };
    let file_path = node
        .span
        .as_ref()
        .map(|s| s.file_path.as_str())
        .unwrap_or("");
    let mut out = format!("<file>{file_path}</file>");
    if let Some(class) = graph.enclosing_class(id) {
        out.push_str(&format!("<class>{}</class>", class.name));
    }
    if node.kind == NodeKind::Function {
        out.push_str(&format!("<func>{}</func>", node.name));
    }
    out
}

/// Structural dependencies of a node as text: its containment path and the
/// functions it calls and is called by.
pub fn dependency_description(graph: &KnowledgeGraph, id: NodeId) -> String {
    let path: Vec<String> = graph
        .containment_path(id)
        .into_iter()
        .filter_map(|nid| graph.node(nid))
        .filter(|n| n.kind != NodeKind::Repository)
        .map(|n| n.name.clone())
        .collect();
    let names = |ids: &[NodeId]| -> String {
        if ids.is_empty() {
            return "(none)".to_string();
        }
        ids.iter()
            .filter_map(|nid| graph.node(*nid))
            .map(|n| n.qualified_name.clone())
            .collect::<Vec<_>>()
            .join(", ")
    };
    format!(
        "location: {}\npath: {}\ncalls: {}\ncalled-by: {}",
        format_location(graph, id),
        path.join(" > "),
        names(graph.callees(id)),
        names(graph.callers(id)),
    )
}

/// Build the summarization conversation: issue plus the collected fragments
/// (location, dependencies, snippet), highest reward first.
pub fn build_summary_prompt(
    issue_text: &str,
    graph: &KnowledgeGraph,
    nodes: &[NodeId],
) -> Vec<Message> {
    let mut fragments = String::new();
    for (i, id) in nodes.iter().enumerate() {
        let node = match graph.node(*id) {
            Some(n) => n,
            None => continue,
        };
        fragments.push_str(&format!(
            "--- fragment {} ---\nlocation: {}\n{}\nsnippet:\n{}\n\n",
            i + 1,
            format_location(graph, *id),
            dependency_description(graph, *id),
            node.snippet
        ));
    }
    vec![
        Message::system(
            "You analyze code fragments collected from a repository while investigating an \
             issue. Summarize what the relevant fragments do, in order, and plan how to resolve \
             the issue. Structure your reply as two sections with exactly these headings:\n\
             SUMMARY:\n<your summary>\n\
             PLAN:\n<your plan>",
        ),
        Message::user(format!(
            "Issue:\n{issue_text}\n\nCollected fragments:\n{fragments}"
        )),
    ]
}

/// Summarization outcome; `malformed_reply` flags replies missing the
/// required headings, whose whole text then lands in `summary`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summarized {
    pub experience: Experience,
    pub malformed_reply: bool,
}

/// Condense the top `max_snippets` collected nodes into an [`Experience`]
/// via one chat call.
pub fn summarize(
    issue_text: &str,
    report: &ExplorationReport,
    graph: &KnowledgeGraph,
    client: &mut dyn ChatClient,
    max_snippets: usize,
) -> Result<Summarized, ExperienceError> {
    if report.collected.is_empty() {
        return Err(ExperienceError::EmptyReport);
    }
    // The report is already ordered by descending reward with a
    // qualified-name tiebreak; truncation keeps that prefix.
    let nodes: Vec<NodeId> = report
        .collected
        .iter()
        .take(max_snippets)
        .map(|c| c.graph_node)
        .collect();

    let prompt = build_summary_prompt(issue_text, graph, &nodes);
    let reply = client.complete(&prompt)?;
    let (summary, plan, malformed) = split_reply(&reply);

    let locations = nodes.iter().map(|id| format_location(graph, *id)).collect();
    Ok(Summarized {
        experience: Experience {
            locations,
            summary,
            plan,
            source_nodes: nodes,
        },
        malformed_reply: malformed,
    })
}

fn split_reply(reply: &str) -> (String, String, bool) {
    let summary_pos = reply.find("SUMMARY:");
    let plan_pos = reply.find("PLAN:");
    match (summary_pos, plan_pos) {
        (Some(s), Some(p)) if s < p => {
            let summary = reply[s + "SUMMARY:".len()..p].trim().to_string();
            let plan = reply[p + "PLAN:".len()..].trim().to_string();
            (summary, plan, false)
        }
        _ => (reply.trim().to_string(), String::new(), true),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_reply_extracts_sections() {
        let (summary, plan, malformed) =
            split_reply("SUMMARY:\nThe parser drops tokens.\nPLAN:\nFix validate.");
        assert_eq!(summary, "The parser drops tokens.");
        assert_eq!(plan, "Fix validate.");
        assert!(!malformed);
    }

    #[test]
    fn split_reply_flags_missing_headings() {
        let (summary, plan, malformed) = split_reply("no structure at all");
        assert_eq!(summary, "no structure at all");
        assert_eq!(plan, "");
        assert!(malformed);
    }

    #[test]
    fn split_reply_requires_summary_before_plan() {
        let (_, _, malformed) = split_reply("PLAN: x\nSUMMARY: y");
        assert!(malformed);
    }
}

#[cfg(test)]
mod graph_tests {
    use super::*;
    use crate::graph::{build_graph, BuildConfig};
    use crate::llm::ScriptedClient;
    use crate::mcts::{explore, ExplorationConfig};
    use crate::reward::LexicalOracle;
    use std::path::Path;

    fn fixture_graph() -> crate::graph::KnowledgeGraph {
        let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/fixture_repo");
        build_graph(&root, &BuildConfig::default()).unwrap()
    }

    #[test]
    fn location_of_method_has_all_three_tags() {
        let graph = fixture_graph();
        let node = graph.get_node("parser.Parser.parse").unwrap();
        assert_eq!(
            format_location(&graph, node.id),
            "<file>parser.py</file><class>Parser</class><func>parse</func>"
        );
    }

    #[test]
    fn location_of_top_level_function_omits_class() {
        let graph = fixture_graph();
        let node = graph.get_node("renderer.format_output").unwrap();
        assert_eq!(
            format_location(&graph, node.id),
            "<file>renderer.py</file><func>format_output</func>"
        );
    }

    #[test]
    fn location_of_file_is_file_tag_only() {
        let graph = fixture_graph();
        let node = graph.file_node("main.py").unwrap();
        assert_eq!(format_location(&graph, node.id), "<file>main.py</file>");
    }

    #[test]
    fn location_of_nested_function_names_innermost() {
        let graph = fixture_graph();
        let node = graph.get_node("parser.Parser.parse.strip_comment").unwrap();
        assert_eq!(
            format_location(&graph, node.id),
            "<file>parser.py</file><class>Parser</class><func>strip_comment</func>"
        );
    }

    #[test]
    fn dependency_description_lists_calls_and_callers() {
        let graph = fixture_graph();
        let node = graph.get_node("parser.Parser.validate").unwrap();
        let desc = dependency_description(&graph, node.id);
        assert!(desc.contains("path: parser.py > Parser > validate"));
        assert!(desc.contains("calls: parser.Parser.validate"));
        assert!(desc.contains("called-by: parser.Parser.parse, parser.Parser.validate"));
    }

    fn explored_report(issue: &str) -> crate::mcts::ExplorationReport {
        let graph = fixture_graph();
        let mut oracle = LexicalOracle;
        explore(&graph, issue, &mut oracle, ExplorationConfig::default()).unwrap()
    }

    #[test]
    fn summarize_splits_sections_and_keeps_locations() {
        let graph = fixture_graph();
        let report = explored_report("def self return validate render");
        let mut client = ScriptedClient::new(vec![
            "SUMMARY:\nvalidate normalizes tokens recursively.\nPLAN:\nAdjust validate.",
        ]);
        let summarized = summarize("issue text", &report, &graph, &mut client, 10).unwrap();
        assert!(!summarized.malformed_reply);
        assert_eq!(
            summarized.experience.summary,
            "validate normalizes tokens recursively."
        );
        assert_eq!(summarized.experience.plan, "Adjust validate.");
        assert_eq!(
            summarized.experience.locations.len(),
            summarized.experience.source_nodes.len()
        );
        assert_eq!(
            summarized.experience.locations.len(),
            report.collected.len()
        );
    }

    #[test]
    fn summarize_truncates_to_max_snippets() {
        let graph = fixture_graph();
        let report = explored_report("def self return validate render");
        assert!(report.collected.len() >= 2);
        let mut client = ScriptedClient::new(vec!["SUMMARY:\ns\nPLAN:\np"]);
        let summarized = summarize("issue", &report, &graph, &mut client, 1).unwrap();
        assert_eq!(summarized.experience.source_nodes.len(), 1);
        assert_eq!(
            summarized.experience.source_nodes[0],
            report.collected[0].graph_node
        );
    }

    #[test]
    fn summarize_rejects_empty_report() {
        let graph = fixture_graph();
        let empty = crate::mcts::ExplorationReport {
            collected: vec![],
            iterations_run: 0,
            wall_seconds: 0.0,
            oracle_calls: 0,
            diagnostics: Default::default(),
        };
        let mut client = ScriptedClient::new(vec!["unused"]);
        assert!(matches!(
            summarize("issue", &empty, &graph, &mut client, 10),
            Err(ExperienceError::EmptyReport)
        ));
    }

    #[test]
    fn malformed_reply_lands_in_summary_with_flag() {
        let graph = fixture_graph();
        let report = explored_report("def self return validate render");
        let mut client = ScriptedClient::new(vec!["just prose, no sections"]);
        let summarized = summarize("issue", &report, &graph, &mut client, 10).unwrap();
        assert!(summarized.malformed_reply);
        assert_eq!(summarized.experience.summary, "just prose, no sections");
        assert_eq!(summarized.experience.plan, "");
    }

    #[test]
    fn experience_contains_no_snippet_bodies() {
        let graph = fixture_graph();
        let report = explored_report("def self return validate render");
        let mut client = ScriptedClient::new(vec!["SUMMARY:\ns\nPLAN:\np"]);
        let summarized = summarize("issue", &report, &graph, &mut client, 10).unwrap();
        let serialized = serde_json::to_string(&summarized.experience).unwrap();
        for collected in &report.collected {
            let node = graph.node(collected.graph_node).unwrap();
            if node.snippet.lines().count() > 1 {
                assert!(
                    !serialized.contains(&node.snippet),
                    "snippet of {} leaked into the experience",
                    node.qualified_name
                );
            }
        }
    }

    #[test]
    fn summary_prompt_is_deterministic_and_carries_snippets() {
        let graph = fixture_graph();
        let node = graph.get_node("parser.Parser.validate").unwrap();
        let a = build_summary_prompt("issue", &graph, &[node.id]);
        let b = build_summary_prompt("issue", &graph, &[node.id]);
        assert_eq!(a, b);
        assert!(a[1].content.contains(&node.snippet));
    }

    #[test]
    fn experience_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let experience = Experience {
            locations: vec!["<file>a.py</file>".to_string()],
            summary: "s".to_string(),
            plan: "p".to_string(),
            source_nodes: vec![],
        };
        let path = dir.path().join("exp.json");
        experience.save(&path).unwrap();
        assert_eq!(Experience::load(&path).unwrap(), experience);
    }
}
