//! The patch-generation agent loop: reason, call search tools, gather
//! context, then propose snippet replacements that the engine turns into a
//! validated unified diff. Invalid proposals come back to the model with
//! the validation error, up to a bounded number of retries.

mod action;
mod diff;
mod patch;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experience::format_location;
use crate::graph::{KnowledgeGraph, LanguageRegistry, NodeId};
use crate::llm::{ChatClient, LlmError, Message};
use crate::search::{search_class, search_code, search_method, SearchResult};
use crate::Experience;

pub use action::{parse_action, AgentAction, ParsedReply, PatchTriple};
pub use diff::{
    apply_file_patch, apply_unified_diff, build_diff, parse_unified_diff, unified_file_diff,
    ApplyError, DiffError, FilePatch, CONTEXT_LINES,
};
pub use patch::{validate_patch, ValidationFailure};

/// Search results are included verbatim in the conversation up to this many
/// bytes per round; anything longer is truncated with a marker.
pub const MAX_TOOL_RESULT_BYTES: usize = 16 * 1024;

#[derive(Debug, Error)]
pub enum ResolverError {
    #[error("invalid resolver config: {0}")]
    InvalidConfig(String),
    #[error("chat transport failure after {} messages: {source}", .log.messages.len())]
    Transport {
        source: LlmError,
        /// Partial conversation for persistence.
        log: ResolveLog,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolverConfig {
    /// Chat calls the agent may spend on search and reformatting before its
    /// first patch proposal.
    pub max_tool_rounds: u32,
    /// Additional patch attempts after the first one fails.
    pub max_retries: u32,
}

impl Default for ResolverConfig {
    fn default() -> Self {
        ResolverConfig {
            max_tool_rounds: 10,
            max_retries: 3,
        }
    }
}

impl ResolverConfig {
    pub fn validated(self) -> Result<Self, ResolverError> {
        if self.max_tool_rounds < 1 || self.max_retries < 1 {
            return Err(ResolverError::InvalidConfig(
                "max_tool_rounds and max_retries must be at least 1".to_string(),
            ));
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchResult {
    /// Unified diff; empty when no proposal survived.
    pub diff: String,
    /// Locations of entities intersecting the diff hunks.
    pub fault_locations: Vec<String>,
    /// Patch proposals evaluated; a run that never proposed one still
    /// counts as a single failed attempt.
    pub attempts: u32,
    pub applied: bool,
}

/// Conversation record written beside the emitted diff.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolveLog {
    pub messages: Vec<Message>,
    pub actions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolution {
    pub patch: PatchResult,
    pub log: ResolveLog,
}

fn system_prompt() -> String {
    "You are a software engineer resolving a repository issue. You interact with the \
     repository through tools. Reason briefly, then end your reply with exactly one action.\n\
     \n\
     Search tools (one invocation on its own line):\n\
     search_class(\"ClassName\")\n\
     search_method(\"method_name\")\n\
     search_method(\"method_name\", scope=\"ClassNameOrFile\")\n\
     search_code(\"verbatim code fragment\")\n\
     \n\
     When you know the fix, reply with one or more patch blocks instead:\n\
     PATCH: relative/path.py\n\
     <<< BEFORE\n\
     the exact lines to replace, copied verbatim from the file\n\
     === AFTER\n\
     the replacement lines\n\
     >>> END\n\
     \n\
     The BEFORE text must occur exactly once in the file. Keep patches minimal."
        .to_string()
}

fn opening_message(issue_text: &str, experience: &Experience) -> String {
    let locations = if experience.locations.is_empty() {
        "(none)".to_string()
    } else {
        experience.locations.join("\n")
    };
    format!(
        "Issue:\n{issue_text}\n\nRelevant locations found by repository exploration:\n{locations}\n\n\
         Repository summary:\n{}\n\nSuggested plan:\n{}",
        experience.summary, experience.plan
    )
}

fn render_results(results: &[SearchResult]) -> String {
    if results.is_empty() {
        return "No results.".to_string();
    }
    let mut out = String::new();
    for (i, result) in results.iter().enumerate() {
        out.push_str(&format!(
            "result {}: {}\nlocation: {}\n{}\n\n",
            i + 1,
            result.qualified_name,
            result.location,
            result.snippet
        ));
    }
    truncate_bytes(&out, MAX_TOOL_RESULT_BYTES)
}

fn truncate_bytes(text: &str, max: usize) -> String {
    if text.len() <= max {
        return text.to_string();
    }
    let mut end = max;
    while !text.is_char_boundary(end) {
        end -= 1;
    }
    format!("{}\n[... truncated ...]", &text[..end])
}

/// Run the agent loop against a workspace. The workspace must be the tree
/// the graph was built from; mismatches surface as failed patch attempts.
pub fn resolve(
    issue_text: &str,
    graph: &KnowledgeGraph,
    experience: &Experience,
    client: &mut dyn ChatClient,
    workspace: &Path,
    config: &ResolverConfig,
) -> Result<Resolution, ResolverError> {
    let config = config.clone().validated()?;
    let languages = LanguageRegistry::builtin();

    let mut log = ResolveLog::default();
    log.messages.push(Message::system(system_prompt()));
    log.messages
        .push(Message::user(opening_message(issue_text, experience)));

    let mut rounds = 0u32;
    let mut attempts = 0u32;
    let mut awaiting_retry = false;
    let mut last_diff = String::new();
    let mut outcome: Option<PatchResult> = None;

    while outcome.is_none() {
        if attempts > config.max_retries {
            break;
        }
        if !awaiting_retry && rounds >= config.max_tool_rounds {
            break;
        }

        let reply = match client.complete(&log.messages) {
            Ok(reply) => reply,
            Err(source) => return Err(ResolverError::Transport { source, log }),
        };
        log.messages.push(Message::assistant(reply.clone()));
        awaiting_retry = false;

        match parse_action(&reply) {
            ParsedReply::ParseError => {
                rounds += 1;
                log.actions.push("parse-error".to_string());
                log.messages.push(Message::user(
                    "Your reply contained no valid action. End your reply with exactly one \
                     search invocation or one or more PATCH blocks, as specified.",
                ));
            }
            ParsedReply::Action(AgentAction::SearchClass { name }) => {
                rounds += 1;
                log.actions.push(format!("search_class({name:?})"));
                let rendered = match search_class(graph, &name) {
                    Ok(results) => render_results(&results),
                    Err(e) => format!("Search failed: {e}"),
                };
                log.messages.push(Message::user(rendered));
            }
            ParsedReply::Action(AgentAction::SearchMethod { name, scope }) => {
                rounds += 1;
                log.actions
                    .push(format!("search_method({name:?}, scope={scope:?})"));
                let rendered = match search_method(graph, &name, scope.as_deref()) {
                    Ok(results) => render_results(&results),
                    Err(e) => format!("Search failed: {e}"),
                };
                log.messages.push(Message::user(rendered));
            }
            ParsedReply::Action(AgentAction::SearchCode { fragment }) => {
                rounds += 1;
                log.actions.push(format!("search_code({fragment:?})"));
                let rendered = match search_code(graph, &fragment) {
                    Ok(results) => render_results(&results),
                    Err(e) => format!("Search failed: {e}"),
                };
                log.messages.push(Message::user(rendered));
            }
            ParsedReply::Action(AgentAction::ProposePatch { triples }) => {
                attempts += 1;
                log.actions
                    .push(format!("propose_patch({} replacements)", triples.len()));
                match try_patch(workspace, graph, &languages, &triples) {
                    Ok((diff, fault_locations)) => {
                        outcome = Some(PatchResult {
                            diff,
                            fault_locations,
                            attempts,
                            applied: true,
                        });
                    }
                    Err(feedback) => {
                        if let Some(diff) = feedback.diff {
                            last_diff = diff;
                        }
                        if attempts > config.max_retries {
                            break;
                        }
                        awaiting_retry = true;
                        log.messages.push(Message::user(format!(
                            "The patch was rejected: {}\nRevise and reply with corrected \
                             PATCH blocks.",
                            feedback.reason
                        )));
                    }
                }
            }
        }
    }

    let patch = outcome.unwrap_or(PatchResult {
        diff: last_diff,
        fault_locations: Vec::new(),
        attempts: attempts.max(1),
        applied: false,
    });
    Ok(Resolution { patch, log })
}

struct PatchFeedback {
    reason: String,
    diff: Option<String>,
}

fn try_patch(
    workspace: &Path,
    graph: &KnowledgeGraph,
    languages: &LanguageRegistry,
    triples: &[PatchTriple],
) -> Result<(String, Vec<String>), PatchFeedback> {
    let diff = build_diff(workspace, triples).map_err(|e| PatchFeedback {
        reason: e.to_string(),
        diff: None,
    })?;
    match validate_patch(workspace, &diff, languages) {
        Ok(()) => {
            let locations = fault_locations(graph, &diff);
            Ok((diff, locations))
        }
        Err(failure) => Err(PatchFeedback {
            reason: failure.to_string(),
            diff: Some(diff),
        }),
    }
}

/// Locations of all entities whose spans intersect the diff's hunks, file
/// nodes included, outermost first.
pub fn fault_locations(graph: &KnowledgeGraph, diff: &str) -> Vec<String> {
    let patches = match parse_unified_diff(diff) {
        Ok(patches) => patches,
        Err(_) => return Vec::new(),
    };
    let mut hits: Vec<(String, u32, u32, NodeId)> = Vec::new();
    for patch in &patches {
        let file = match graph.file_node(&patch.path) {
            Some(f) => f,
            None => continue,
        };
        for hunk in &patch.hunks {
            let start = hunk.old_start.max(1) as u32;
            let end = if hunk.old_count == 0 {
                start
            } else {
                (hunk.old_start + hunk.old_count - 1) as u32
            };
            let mut stack = vec![file.id];
            while let Some(id) = stack.pop() {
                stack.extend_from_slice(graph.children(id));
                let node = match graph.node(id) {
                    Some(n) => n,
                    None => continue,
                };
                let span = match &node.span {
                    Some(s) => s,
                    None => continue,
                };
                if span.start_line <= end && start <= span.end_line {
                    hits.push((
                        span.file_path.clone(),
                        span.start_line,
                        u32::MAX - span.end_line,
                        id,
                    ));
                }
            }
        }
    }
    hits.sort();
    hits.dedup();
    hits.into_iter()
        .map(|(_, _, _, id)| format_location(graph, id))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, BuildConfig};
    use crate::llm::ScriptedClient;
    use std::path::Path;

    fn fixture_workspace() -> tempfile::TempDir {
        let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/fixture_repo");
        let dir = tempfile::tempdir().unwrap();
        for entry in std::fs::read_dir(&src).unwrap() {
            let entry = entry.unwrap();
            std::fs::copy(entry.path(), dir.path().join(entry.file_name())).unwrap();
        }
        dir
    }

    fn fixture_experience() -> Experience {
        Experience {
            locations: vec![
                "<file>parser.py</file><class>Parser</class><func>validate</func>".to_string(),
            ],
            summary: "validate strips tokens recursively.".to_string(),
            plan: "Harden validate against tabs.".to_string(),
            source_nodes: vec![],
        }
    }

    fn triple(before: &str, after: &str) -> PatchTriple {
        PatchTriple {
            file: "parser.py".to_string(),
            before: before.to_string(),
            after: after.to_string(),
        }
    }

    const VALIDATE_LINE: &str = "        if token.startswith(\" \"):";
    const VALIDATE_FIXED: &str = "        if token.startswith((\" \", \"\\t\")):";

    #[test]
    fn build_diff_matches_reference_implementation() {
        let workspace = fixture_workspace();
        let diff = build_diff(workspace.path(), &[triple(VALIDATE_LINE, VALIDATE_FIXED)]).unwrap();

        let old = std::fs::read_to_string(workspace.path().join("parser.py")).unwrap();
        let new = old.replacen(VALIDATE_LINE, VALIDATE_FIXED, 1);
        let reference = similar::TextDiff::from_lines(&old, &new)
            .unified_diff()
            .context_radius(CONTEXT_LINES)
            .header("a/parser.py", "b/parser.py")
            .to_string();
        assert_eq!(diff, reference);
    }

    #[test]
    fn build_diff_round_trips_through_apply() {
        let workspace = fixture_workspace();
        let triples = vec![
            triple(VALIDATE_LINE, VALIDATE_FIXED),
            PatchTriple {
                file: "renderer.py".to_string(),
                before: "return \" | \".join(tokens)".to_string(),
                after: "return \" :: \".join(tokens)".to_string(),
            },
        ];
        let diff = build_diff(workspace.path(), &triples).unwrap();
        let applied = apply_unified_diff(workspace.path(), &diff).unwrap();
        assert_eq!(applied.len(), 2);
        for (path, content) in applied {
            let old = std::fs::read_to_string(workspace.path().join(&path)).unwrap();
            let expected = triples
                .iter()
                .filter(|t| t.file == path)
                .fold(old, |acc, t| acc.replacen(&t.before, &t.after, 1));
            assert_eq!(content, expected, "{path}");
        }
    }

    #[test]
    fn build_diff_identity_replacement_is_no_change() {
        let workspace = fixture_workspace();
        let err = build_diff(workspace.path(), &[triple(VALIDATE_LINE, VALIDATE_LINE)]);
        assert!(matches!(err, Err(DiffError::NoChanges)));
    }

    #[test]
    fn build_diff_ambiguous_snippet_is_rejected() {
        let workspace = fixture_workspace();
        let err = build_diff(workspace.path(), &[triple("return", "yield")]);
        assert!(matches!(err, Err(DiffError::SnippetAmbiguous { .. })));
    }

    #[test]
    fn build_diff_missing_snippet_is_rejected() {
        let workspace = fixture_workspace();
        let err = build_diff(workspace.path(), &[triple("nowhere to be found", "x")]);
        assert!(matches!(err, Err(DiffError::SnippetNotFound { .. })));
    }

    #[test]
    fn build_diff_rejects_escaping_paths() {
        let workspace = fixture_workspace();
        let err = build_diff(
            workspace.path(),
            &[PatchTriple {
                file: "../outside.py".to_string(),
                before: "a".to_string(),
                after: "b".to_string(),
            }],
        );
        assert!(matches!(err, Err(DiffError::PathEscape(_))));
    }

    #[test]
    fn hunks_of_multiple_files_come_in_path_order() {
        let workspace = fixture_workspace();
        let triples = vec![
            PatchTriple {
                file: "renderer.py".to_string(),
                before: "\" | \"".to_string(),
                after: "\" / \"".to_string(),
            },
            triple(VALIDATE_LINE, VALIDATE_FIXED),
        ];
        let diff = build_diff(workspace.path(), &triples).unwrap();
        let parser_pos = diff.find("a/parser.py").unwrap();
        let renderer_pos = diff.find("a/renderer.py").unwrap();
        assert!(parser_pos < renderer_pos);
    }

    #[test]
    fn validate_accepts_wellformed_patch() {
        let workspace = fixture_workspace();
        let languages = LanguageRegistry::builtin();
        let diff = build_diff(workspace.path(), &[triple(VALIDATE_LINE, VALIDATE_FIXED)]).unwrap();
        assert!(validate_patch(workspace.path(), &diff, &languages).is_ok());
    }

    #[test]
    fn validate_names_file_on_syntax_breakage() {
        let workspace = fixture_workspace();
        let languages = LanguageRegistry::builtin();
        let diff = build_diff(
            workspace.path(),
            &[triple(VALIDATE_LINE, "        if token.startswith((\" \":")],
        )
        .unwrap();
        match validate_patch(workspace.path(), &diff, &languages) {
            Err(ValidationFailure::Syntax { file, .. }) => assert_eq!(file, "parser.py"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validate_reports_apply_failure_on_stale_context() {
        let workspace = fixture_workspace();
        let languages = LanguageRegistry::builtin();
        let diff = build_diff(workspace.path(), &[triple(VALIDATE_LINE, VALIDATE_FIXED)]).unwrap();
        // Drift the file after the diff was computed.
        let path = workspace.path().join("parser.py");
        let drifted = std::fs::read_to_string(&path)
            .unwrap()
            .replace("startswith", "beginswith");
        std::fs::write(&path, drifted).unwrap();
        assert!(matches!(
            validate_patch(workspace.path(), &diff, &languages),
            Err(ValidationFailure::Apply { .. })
        ));
    }

    fn patch_reply(before: &str, after: &str) -> String {
        format!("Time to fix it.\nPATCH: parser.py\n<<< BEFORE\n{before}\n=== AFTER\n{after}\n>>> END\n")
    }

    #[test]
    fn resolve_search_then_patch_applies_first_try() {
        let workspace = fixture_workspace();
        let graph = build_graph(workspace.path(), &BuildConfig::default()).unwrap();
        let mut client = ScriptedClient::new(vec![
            "Let me check the method.\nsearch_method(\"validate\", scope=\"Parser\")".to_string(),
            patch_reply(VALIDATE_LINE, VALIDATE_FIXED),
        ]);
        let resolution = resolve(
            "tokens with tabs are not stripped",
            &graph,
            &fixture_experience(),
            &mut client,
            workspace.path(),
            &ResolverConfig::default(),
        )
        .unwrap();
        assert!(resolution.patch.applied);
        assert_eq!(resolution.patch.attempts, 1);
        assert!(resolution
            .patch
            .diff
            .contains("-        if token.startswith(\" \"):"));
        assert_eq!(
            resolution.patch.fault_locations,
            vec![
                "<file>parser.py</file>".to_string(),
                "<file>parser.py</file><class>Parser</class>".to_string(),
                "<file>parser.py</file><class>Parser</class><func>validate</func>".to_string(),
            ]
        );
        // The search results were fed back into the conversation.
        assert!(resolution
            .log
            .messages
            .iter()
            .any(|m| m.content.contains("parser.Parser.validate")));
    }

    #[test]
    fn resolve_retries_after_invalid_patch() {
        let workspace = fixture_workspace();
        let graph = build_graph(workspace.path(), &BuildConfig::default()).unwrap();
        let mut client = ScriptedClient::new(vec![
            patch_reply("this text is not in the file", "whatever"),
            patch_reply(VALIDATE_LINE, VALIDATE_FIXED),
        ]);
        let resolution = resolve(
            "issue",
            &graph,
            &fixture_experience(),
            &mut client,
            workspace.path(),
            &ResolverConfig::default(),
        )
        .unwrap();
        assert!(resolution.patch.applied);
        assert_eq!(resolution.patch.attempts, 2);
    }

    #[test]
    fn resolve_gives_up_after_max_retries() {
        let workspace = fixture_workspace();
        let graph = build_graph(workspace.path(), &BuildConfig::default()).unwrap();
        let bad = patch_reply("missing snippet", "x");
        let mut client = ScriptedClient::new(vec![
            bad.clone(),
            bad.clone(),
            bad.clone(),
            bad.clone(),
            bad,
        ]);
        let config = ResolverConfig {
            max_tool_rounds: 10,
            max_retries: 3,
        };
        let resolution = resolve(
            "issue",
            &graph,
            &fixture_experience(),
            &mut client,
            workspace.path(),
            &config,
        )
        .unwrap();
        assert!(!resolution.patch.applied);
        assert_eq!(resolution.patch.attempts, 4); // 1 + max_retries
    }

    #[test]
    fn resolve_stops_after_tool_round_budget() {
        let workspace = fixture_workspace();
        let graph = build_graph(workspace.path(), &BuildConfig::default()).unwrap();
        let searches: Vec<String> = (0..12)
            .map(|i| format!("search_method(\"validate\") # round {i}"))
            .collect();
        let mut client = ScriptedClient::new(searches);
        let config = ResolverConfig {
            max_tool_rounds: 4,
            max_retries: 3,
        };
        let resolution = resolve(
            "issue",
            &graph,
            &fixture_experience(),
            &mut client,
            workspace.path(),
            &config,
        )
        .unwrap();
        assert!(!resolution.patch.applied);
        assert_eq!(resolution.patch.diff, "");
        assert_eq!(resolution.patch.attempts, 1);
        assert_eq!(client.calls_made(), 4);
    }

    #[test]
    fn parse_error_replies_consume_rounds() {
        let workspace = fixture_workspace();
        let graph = build_graph(workspace.path(), &BuildConfig::default()).unwrap();
        let prose: Vec<String> = (0..5).map(|i| format!("musings {i}")).collect();
        let mut client = ScriptedClient::new(prose);
        let config = ResolverConfig {
            max_tool_rounds: 3,
            max_retries: 1,
        };
        let resolution = resolve(
            "issue",
            &graph,
            &fixture_experience(),
            &mut client,
            workspace.path(),
            &config,
        )
        .unwrap();
        assert!(!resolution.patch.applied);
        assert_eq!(client.calls_made(), 3);
        assert_eq!(
            resolution.log.actions,
            vec!["parse-error", "parse-error", "parse-error"]
        );
    }

    #[test]
    fn transport_failure_surfaces_partial_conversation() {
        let workspace = fixture_workspace();
        let graph = build_graph(workspace.path(), &BuildConfig::default()).unwrap();
        let mut client = ScriptedClient::new(vec!["search_method(\"validate\")"]);
        // Second call exhausts the script and fails.
        let err = resolve(
            "issue",
            &graph,
            &fixture_experience(),
            &mut client,
            workspace.path(),
            &ResolverConfig::default(),
        )
        .unwrap_err();
        match err {
            ResolverError::Transport { log, .. } => {
                assert!(log.messages.len() >= 3);
                assert_eq!(log.actions, vec!["search_method(\"validate\", scope=None)"]);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn config_requires_positive_bounds() {
        let config = ResolverConfig {
            max_tool_rounds: 0,
            max_retries: 3,
        };
        assert!(config.validated().is_err());
    }
}

#[cfg(test)]
mod reference_diff_tests {
    use super::diff::unified_file_diff;

    /// Byte agreement with an independent diff implementation across hunk
    /// shapes: split vs merged hunks, edits at both file ends, pure
    /// insertion, and deletion at end of file.
    #[test]
    fn unified_diff_agrees_with_reference_on_hunk_shapes() {
        let numbered =
            |n: usize, f: &dyn Fn(usize) -> String| -> String { (0..n).map(f).collect() };
        let cases: Vec<(String, String)> = vec![
            // Changes separated by seven equal lines: two hunks.
            (
                numbered(20, &|i| format!("line {i}\n")),
                numbered(20, &|i| {
                    if i == 5 || i == 13 {
                        format!("LINE {i}\n")
                    } else {
                        format!("line {i}\n")
                    }
                }),
            ),
            // Separated by exactly six equal lines: contexts abut, one hunk.
            (
                numbered(20, &|i| format!("line {i}\n")),
                numbered(20, &|i| {
                    if i == 5 || i == 12 {
                        format!("LINE {i}\n")
                    } else {
                        format!("line {i}\n")
                    }
                }),
            ),
            // First and last lines replaced.
            (
                numbered(10, &|i| format!("l{i}\n")),
                std::iter::once("first\n".to_string())
                    .chain((1..9).map(|i| format!("l{i}\n")))
                    .chain(std::iter::once("last\n".to_string()))
                    .collect(),
            ),
            // Pure insertion in the middle.
            (
                numbered(10, &|i| format!("x{i}\n")),
                (0..10)
                    .flat_map(|i| {
                        if i == 4 {
                            vec![format!("x{i}\n"), "inserted\n".to_string()]
                        } else {
                            vec![format!("x{i}\n")]
                        }
                    })
                    .collect(),
            ),
            // Deletion at end of file.
            (
                numbered(8, &|i| format!("y{i}\n")),
                numbered(6, &|i| format!("y{i}\n")),
            ),
            // Missing trailing newline on either side.
            ("a\nb\nc".to_string(), "a\nb\nC\n".to_string()),
            ("a\nb\nc\n".to_string(), "a\nb\nC".to_string()),
        ];
        for (i, (old, new)) in cases.iter().enumerate() {
            let mine = unified_file_diff("f.txt", old, new, 3).unwrap();
            let reference = similar::TextDiff::from_lines(old.as_str(), new.as_str())
                .unified_diff()
                .context_radius(3)
                .header("a/f.txt", "b/f.txt")
                .to_string();
            assert_eq!(mine, reference, "case {i}");
        }
    }
}
