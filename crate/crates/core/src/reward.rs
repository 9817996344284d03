//! Reward oracles: score how relevant a code snippet is to an issue on an
//! integer 0–10 scale. Scores of 6 and above gate collection and reference
//! expansion downstream.
//!
//! Two implementations ship: a deterministic lexical oracle for offline
//! runs and tests, and a chat-backed oracle that prompts a model with
//! few-shot examples and parses the trailing `Score:` line.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{ChatClient, LlmError, Message};
use crate::relevance::tokenize;

pub const MIN_SCORE: u8 = 0;
pub const MAX_SCORE: u8 = 10;

/// Retries granted to a chat oracle whose reply carries no parseable score.
pub const MAX_PARSE_RETRIES: u32 = 2;

#[derive(Debug, Error)]
pub enum RewardError {
    #[error("reward request needs a non-empty snippet")]
    EmptySnippet,
    #[error("at least one few-shot example is required")]
    NoExamples,
    #[error("reward oracle unavailable: {0}")]
    Unavailable(#[from] LlmError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardScore {
    /// Integer in `[0, 10]`.
    pub value: u8,
    /// Free text; empty for the deterministic oracle.
    pub rationale: String,
}

impl RewardScore {
    pub fn bare(value: u8) -> Self {
        RewardScore {
            value,
            rationale: String::new(),
        }
    }
}

/// Everything an oracle sees about one leaf node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewardRequest {
    pub issue_text: String,
    pub qualified_name: String,
    pub snippet: String,
    /// Containment path plus direct callers and callees, as text.
    pub dependency_desc: String,
}

impl RewardRequest {
    pub fn new(
        issue_text: impl Into<String>,
        qualified_name: impl Into<String>,
        snippet: impl Into<String>,
        dependency_desc: impl Into<String>,
    ) -> Result<Self, RewardError> {
        let snippet = snippet.into();
        if snippet.is_empty() {
            return Err(RewardError::EmptySnippet);
        }
        Ok(RewardRequest {
            issue_text: issue_text.into(),
            qualified_name: qualified_name.into(),
            snippet,
            dependency_desc: dependency_desc.into(),
        })
    }
}

/// Blocking relevance scorer, called sequentially by one exploration loop.
pub trait RewardOracle {
    fn score(&mut self, request: &RewardRequest) -> Result<RewardScore, RewardError>;

    fn name(&self) -> &'static str;
}

/// Deterministic oracle: `round(10 * |issue ∩ snippet| / |issue|)` over
/// token sets.
#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalOracle;

impl LexicalOracle {
    pub fn score_value(issue_text: &str, snippet: &str) -> u8 {
        let issue: BTreeSet<String> = tokenize(issue_text).into_iter().collect();
        if issue.is_empty() {
            return 0;
        }
        let snippet: BTreeSet<String> = tokenize(snippet).into_iter().collect();
        let overlap = issue.intersection(&snippet).count() as f64;
        (10.0 * overlap / issue.len() as f64).round() as u8
    }
}

impl RewardOracle for LexicalOracle {
    fn score(&mut self, request: &RewardRequest) -> Result<RewardScore, RewardError> {
        Ok(RewardScore::bare(Self::score_value(
            &request.issue_text,
            &request.snippet,
        )))
    }

    fn name(&self) -> &'static str {
        "lexical"
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewShotExample {
    pub issue: String,
    pub code: String,
    pub reasoning: String,
    pub score: u8,
}

#[derive(Debug, Deserialize)]
struct FewShotAsset {
    #[allow(dead_code)]
    version: u32,
    examples: Vec<FewShotExample>,
}

static FEWSHOT_ASSET: &str = include_str!("../assets/reward_fewshot.json");

/// The few-shot examples shipped with the artifact.
pub fn builtin_examples() -> &'static [FewShotExample] {
    static PARSED: OnceLock<Vec<FewShotExample>> = OnceLock::new();
    PARSED.get_or_init(|| {
        let asset: FewShotAsset =
            serde_json::from_str(FEWSHOT_ASSET).expect("bundled few-shot asset is valid");
        asset.examples
    })
}

/// Build the scoring conversation: a system message stating the role,
/// alternating example turns, then the live request. Byte-deterministic for
/// identical inputs.
pub fn build_reward_prompt(
    request: &RewardRequest,
    examples: &[FewShotExample],
) -> Result<Vec<Message>, RewardError> {
    if examples.is_empty() {
        return Err(RewardError::NoExamples);
    }
    let mut messages = Vec::with_capacity(2 + 2 * examples.len());
    messages.push(Message::system(
        "You score how relevant a code snippet is to a reported software issue. \
         Reason step by step about whether the snippet contains the faulty code, code that \
         must change, or context required for the fix. \
         Then give an integer relevance score from 0 (unrelated) to 10 (this is the code to fix). \
         Your reply must end with a line of the form `Score: <integer>`.",
    ));
    for example in examples {
        messages.push(Message::user(format!(
            "Issue:\n{}\n\nCode:\n{}",
            example.issue, example.code
        )));
        messages.push(Message::assistant(format!(
            "{}\n\nScore: {}",
            example.reasoning, example.score
        )));
    }
    messages.push(Message::user(format!(
        "Issue:\n{}\n\nCode ({}):\n{}\n\nStructural dependencies:\n{}",
        request.issue_text, request.qualified_name, request.snippet, request.dependency_desc
    )));
    Ok(messages)
}

/// Last integer following a `Score:` marker, if any. Tolerates reasoning
/// prose before and around the marker.
pub fn parse_score_reply(reply: &str) -> Option<i64> {
    let lower = reply.to_lowercase();
    let mut result = None;
    let mut search_from = 0usize;
    while let Some(pos) = lower[search_from..].find("score:") {
        let after = &reply[search_from + pos + "score:".len()..];
        if let Some(value) = leading_integer(after) {
            result = Some(value);
        }
        search_from += pos + "score:".len();
    }
    result
}

fn leading_integer(text: &str) -> Option<i64> {
    let trimmed = text.trim_start();
    let mut end = 0;
    for (i, c) in trimmed.char_indices() {
        if c == '-' && i == 0 {
            end = 1;
        } else if c.is_ascii_digit() {
            end = i + 1;
        } else {
            break;
        }
    }
    trimmed[..end].parse().ok()
}

/// Chat-backed oracle.
pub struct ChatOracle<C: ChatClient> {
    client: C,
    examples: Vec<FewShotExample>,
    /// Replies whose score fell outside 0–10 and was clamped.
    pub clamped_replies: u64,
    /// Replies that never yielded a parseable score.
    pub unparseable_replies: u64,
}

impl<C: ChatClient> ChatOracle<C> {
    pub fn new(client: C) -> Self {
        ChatOracle {
            client,
            examples: builtin_examples().to_vec(),
            clamped_replies: 0,
            unparseable_replies: 0,
        }
    }

    pub fn with_examples(client: C, examples: Vec<FewShotExample>) -> Self {
        ChatOracle {
            client,
            examples,
            clamped_replies: 0,
            unparseable_replies: 0,
        }
    }

    pub fn into_client(self) -> C {
        self.client
    }
}

impl<C: ChatClient> RewardOracle for ChatOracle<C> {
    fn score(&mut self, request: &RewardRequest) -> Result<RewardScore, RewardError> {
        let mut messages = build_reward_prompt(request, &self.examples)?;
        for _attempt in 0..=MAX_PARSE_RETRIES {
            let reply = self.client.complete(&messages)?;
            match parse_score_reply(&reply) {
                Some(raw) => {
                    let clamped = raw.clamp(MIN_SCORE as i64, MAX_SCORE as i64) as u8;
                    if i64::from(clamped) != raw {
                        self.clamped_replies += 1;
                    }
                    return Ok(RewardScore {
                        value: clamped,
                        rationale: reply,
                    });
                }
                None => {
                    // Extend the conversation so the retry has a distinct
                    // fingerprint and transcripts can replay it.
                    messages.push(Message::assistant(reply));
                    messages.push(Message::user(
                        "Your reply did not contain a score. \
                         Reply again and end with `Score: <integer 0-10>`.",
                    ));
                }
            }
        }
        self.unparseable_replies += 1;
        Ok(RewardScore {
            value: 0,
            rationale: "unparseable".to_string(),
        })
    }

    fn name(&self) -> &'static str {
        "chat"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::ScriptedClient;

    fn request(issue: &str, snippet: &str) -> RewardRequest {
        RewardRequest::new(issue, "mod.f", snippet, "path: mod > f").unwrap()
    }

    #[test]
    fn lexical_zero_overlap_scores_zero() {
        let mut oracle = LexicalOracle;
        let score = oracle
            .score(&request("database timeout", "def render(): pass"))
            .unwrap();
        assert_eq!(score.value, 0);
    }

    #[test]
    fn lexical_full_overlap_saturates_at_ten() {
        let mut oracle = LexicalOracle;
        let score = oracle
            .score(&request(
                "render tokens",
                "def render(tokens):\n    return tokens",
            ))
            .unwrap();
        assert_eq!(score.value, 10);
    }

    #[test]
    fn lexical_is_a_pure_function() {
        let req = request("parse line tokens", "def parse(line): return line");
        let mut oracle = LexicalOracle;
        assert_eq!(oracle.score(&req).unwrap(), oracle.score(&req).unwrap());
    }

    #[test]
    fn empty_snippet_is_rejected() {
        assert!(matches!(
            RewardRequest::new("issue", "q", "", "d"),
            Err(RewardError::EmptySnippet)
        ));
    }

    #[test]
    fn prompt_shape_for_one_example() {
        let req = request("issue", "code");
        let examples = vec![FewShotExample {
            issue: "i".into(),
            code: "c".into(),
            reasoning: "r".into(),
            score: 7,
        }];
        let messages = build_reward_prompt(&req, &examples).unwrap();
        assert_eq!(messages.len(), 4);
        assert_eq!(messages[0].role, crate::llm::Role::System);
        assert_eq!(messages[2].content, "r\n\nScore: 7");
    }

    #[test]
    fn prompt_requires_examples() {
        let req = request("issue", "code");
        assert!(matches!(
            build_reward_prompt(&req, &[]),
            Err(RewardError::NoExamples)
        ));
    }

    #[test]
    fn prompt_is_deterministic() {
        let req = request("issue", "code");
        let a = build_reward_prompt(&req, builtin_examples()).unwrap();
        let b = build_reward_prompt(&req, builtin_examples()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parse_takes_the_last_score_marker() {
        let reply = "Thinking... maybe Score: 3?\nOn reflection.\nScore: 7";
        assert_eq!(parse_score_reply(reply), Some(7));
    }

    #[test]
    fn parse_handles_missing_marker() {
        assert_eq!(parse_score_reply("no verdict here"), None);
        assert_eq!(parse_score_reply("score: not a number"), None);
    }

    #[test]
    fn chat_oracle_parses_reply() {
        let client = ScriptedClient::new(vec!["The snippet is the fault.\nScore: 7"]);
        let mut oracle = ChatOracle::new(client);
        let score = oracle.score(&request("i", "c")).unwrap();
        assert_eq!(score.value, 7);
    }

    #[test]
    fn chat_oracle_clamps_out_of_range() {
        let client = ScriptedClient::new(vec!["Score: 42"]);
        let mut oracle = ChatOracle::new(client);
        let score = oracle.score(&request("i", "c")).unwrap();
        assert_eq!(score.value, 10);
        assert_eq!(oracle.clamped_replies, 1);
    }

    #[test]
    fn chat_oracle_retries_then_gives_up() {
        let client = ScriptedClient::new(vec!["prose", "more prose", "still prose"]);
        let mut oracle = ChatOracle::new(client);
        let score = oracle.score(&request("i", "c")).unwrap();
        assert_eq!(score.value, 0);
        assert_eq!(score.rationale, "unparseable");
        assert_eq!(oracle.unparseable_replies, 1);
    }

    #[test]
    fn chat_oracle_recovers_on_retry() {
        let client = ScriptedClient::new(vec!["prose", "Score: 5"]);
        let mut oracle = ChatOracle::new(client);
        let score = oracle.score(&request("i", "c")).unwrap();
        assert_eq!(score.value, 5);
    }

    #[test]
    fn builtin_examples_load() {
        assert!(!builtin_examples().is_empty());
    }
}
