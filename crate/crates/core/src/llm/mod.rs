//! Chat-model boundary: a minimal blocking completion contract with a live
//! HTTP implementation and a transcript-driven replay implementation.

mod live;
mod replay;

use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use live::LiveClient;
pub use replay::{RecordingClient, ReplayClient, Transcript, TranscriptEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Message {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Message {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Message {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("message list is empty")]
    EmptyMessages,
    #[error("first message must have the system role")]
    FirstNotSystem,
    #[error("replay transcript diverged at message index {index}: {detail}")]
    ReplayDivergence { index: usize, detail: String },
    #[error("chat transport failure: {0}")]
    Transport(String),
    #[error("chat backend returned an unusable reply: {0}")]
    BadReply(String),
    #[error("network use is forbidden in this run")]
    NetworkForbidden,
    #[error("missing configuration: {0}")]
    Config(String),
    #[error("transcript file error: {0}")]
    TranscriptFile(String),
}

/// Blocking chat completion. Implementations must accept sequential calls
/// from a single owner.
pub trait ChatClient {
    fn complete(&mut self, messages: &[Message]) -> Result<String, LlmError>;
}

impl ChatClient for Box<dyn ChatClient + '_> {
    fn complete(&mut self, messages: &[Message]) -> Result<String, LlmError> {
        (**self).complete(messages)
    }
}

impl<C: ChatClient + ?Sized> ChatClient for &mut C {
    fn complete(&mut self, messages: &[Message]) -> Result<String, LlmError> {
        (**self).complete(messages)
    }
}

/// Deterministic client that replies from a fixed script, in order.
/// Useful for producing transcripts and for offline tests.
pub struct ScriptedClient {
    replies: Vec<String>,
    cursor: usize,
}

impl ScriptedClient {
    pub fn new<S: Into<String>>(replies: Vec<S>) -> Self {
        ScriptedClient {
            replies: replies.into_iter().map(Into::into).collect(),
            cursor: 0,
        }
    }

    pub fn calls_made(&self) -> usize {
        self.cursor
    }
}

impl ChatClient for ScriptedClient {
    fn complete(&mut self, messages: &[Message]) -> Result<String, LlmError> {
        validate_messages(messages)?;
        let reply = self
            .replies
            .get(self.cursor)
            .ok_or_else(|| LlmError::Transport("scripted replies exhausted".to_string()))?;
        self.cursor += 1;
        Ok(reply.clone())
    }
}

pub(crate) fn validate_messages(messages: &[Message]) -> Result<(), LlmError> {
    match messages.first() {
        None => Err(LlmError::EmptyMessages),
        Some(first) if first.role != Role::System => Err(LlmError::FirstNotSystem),
        Some(_) => Ok(()),
    }
}

/// Stable fingerprint of a full message history: SHA-256 over the canonical
/// JSON serialization, hex encoded. Identical across processes and
/// platforms.
pub fn fingerprint(messages: &[Message]) -> String {
    let canonical = serde_json::to_string(messages).expect("message serialization");
    hex_digest(canonical.as_bytes())
}

/// Per-message digests, used to pinpoint where a replayed conversation
/// diverged from the recorded one.
pub fn message_hashes(messages: &[Message]) -> Vec<String> {
    messages
        .iter()
        .map(|m| {
            let canonical = serde_json::to_string(m).expect("message serialization");
            hex_digest(canonical.as_bytes())
        })
        .collect()
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

static NETWORK_FORBIDDEN: AtomicBool = AtomicBool::new(false);

/// Environment flag honored by every networking code path; the test suite
/// sets it to prove replay runs are fully offline.
pub const NO_NETWORK_ENV: &str = "REXPLORE_NO_NETWORK";

pub fn forbid_network() {
    NETWORK_FORBIDDEN.store(true, Ordering::SeqCst);
}

pub fn network_forbidden() -> bool {
    NETWORK_FORBIDDEN.load(Ordering::SeqCst) || std::env::var_os(NO_NETWORK_ENV).is_some()
}
