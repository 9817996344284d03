//! Transcript files and the replay/recording clients built on them.
//!
//! A transcript is a line-delimited file; each line is a JSON record holding
//! the fingerprint of the full request message list, the verbatim reply, and
//! per-message digests used for divergence reporting. Fingerprints are
//! unique within a transcript; the first recorded reply for a fingerprint is
//! canonical.

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{fingerprint, message_hashes, validate_messages, ChatClient, LlmError, Message};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub fingerprint: String,
    pub reply: String,
    pub message_hashes: Vec<String>,
}

/// Ordered record of chat requests and replies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    entries: Vec<TranscriptEntry>,
    by_fingerprint: HashMap<String, usize>,
}

impl Transcript {
    pub fn new() -> Self {
        Transcript::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    /// Append an entry; duplicates of an existing fingerprint are ignored
    /// so the first recorded reply stays canonical. Returns whether the
    /// entry was new.
    pub fn push(&mut self, entry: TranscriptEntry) -> bool {
        if self.by_fingerprint.contains_key(&entry.fingerprint) {
            return false;
        }
        self.by_fingerprint
            .insert(entry.fingerprint.clone(), self.entries.len());
        self.entries.push(entry);
        true
    }

    pub fn lookup(&self, fp: &str) -> Option<&TranscriptEntry> {
        self.by_fingerprint.get(fp).map(|i| &self.entries[*i])
    }

    pub fn load(path: &Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::TranscriptFile(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, LlmError> {
        let mut transcript = Transcript::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: TranscriptEntry = serde_json::from_str(line)
                .map_err(|e| LlmError::TranscriptFile(format!("line {}: {e}", lineno + 1)))?;
            if !transcript.push(entry) {
                return Err(LlmError::TranscriptFile(format!(
                    "line {}: duplicate fingerprint",
                    lineno + 1
                )));
            }
        }
        Ok(transcript)
    }

    pub fn save(&self, path: &Path) -> Result<(), LlmError> {
        let mut text = String::new();
        for entry in &self.entries {
            text.push_str(&serde_json::to_string(entry).expect("transcript serialization"));
            text.push('\n');
        }
        std::fs::write(path, text)
            .map_err(|e| LlmError::TranscriptFile(format!("{}: {e}", path.display())))
    }
}

/// Chat client that answers from a transcript and never touches the
/// network. A request whose fingerprint was never recorded is a replay
/// divergence, reported with the index of the first differing message.
pub struct ReplayClient {
    transcript: Transcript,
}

impl ReplayClient {
    pub fn new(transcript: Transcript) -> Self {
        ReplayClient { transcript }
    }

    pub fn from_path(path: &Path) -> Result<Self, LlmError> {
        Ok(ReplayClient::new(Transcript::load(path)?))
    }

    fn divergence(&self, hashes: &[String]) -> LlmError {
        // Find the recorded request sharing the longest prefix; the first
        // index past that prefix is where the conversation drifted.
        let mut best_prefix = 0usize;
        let mut best_len: Option<usize> = None;
        for entry in self.transcript.entries() {
            let common = entry
                .message_hashes
                .iter()
                .zip(hashes.iter())
                .take_while(|(a, b)| a == b)
                .count();
            if common > best_prefix {
                best_prefix = common;
                best_len = Some(entry.message_hashes.len());
            }
        }
        let detail = match best_len {
            None if self.transcript.is_empty() => "transcript is empty".to_string(),
            None => "no recorded request shares a prefix with this one".to_string(),
            Some(len) => format!(
                "closest recorded request matches the first {best_prefix} of {} messages (recorded request had {len})",
                hashes.len()
            ),
        };
        LlmError::ReplayDivergence {
            index: best_prefix,
            detail,
        }
    }
}

impl ChatClient for ReplayClient {
    fn complete(&mut self, messages: &[Message]) -> Result<String, LlmError> {
        validate_messages(messages)?;
        let fp = fingerprint(messages);
        match self.transcript.lookup(&fp) {
            Some(entry) => Ok(entry.reply.clone()),
            None => Err(self.divergence(&message_hashes(messages))),
        }
    }
}

/// Pass-through wrapper that appends every (request, reply) pair to a
/// transcript file as it happens.
pub struct RecordingClient<C: ChatClient> {
    inner: C,
    path: PathBuf,
    transcript: Transcript,
}

impl<C: ChatClient> RecordingClient<C> {
    /// Wrap `inner`, creating (or truncating) the transcript file at `path`
    /// immediately so zero-call runs still leave a valid, empty transcript.
    pub fn create(inner: C, path: impl Into<PathBuf>) -> Result<Self, LlmError> {
        let path = path.into();
        std::fs::write(&path, "")
            .map_err(|e| LlmError::TranscriptFile(format!("{}: {e}", path.display())))?;
        Ok(RecordingClient {
            inner,
            path,
            transcript: Transcript::new(),
        })
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    fn append(&self, entry: &TranscriptEntry) -> Result<(), LlmError> {
        let mut file = OpenOptions::new()
            .append(true)
            .open(&self.path)
            .map_err(|e| LlmError::TranscriptFile(format!("{}: {e}", self.path.display())))?;
        let line = serde_json::to_string(entry).expect("transcript serialization");
        writeln!(file, "{line}")
            .map_err(|e| LlmError::TranscriptFile(format!("{}: {e}", self.path.display())))
    }
}

impl<C: ChatClient> ChatClient for RecordingClient<C> {
    fn complete(&mut self, messages: &[Message]) -> Result<String, LlmError> {
        let reply = self.inner.complete(messages)?;
        let entry = TranscriptEntry {
            fingerprint: fingerprint(messages),
            reply: reply.clone(),
            message_hashes: message_hashes(messages),
        };
        if self.transcript.push(entry.clone()) {
            self.append(&entry)?;
        }
        Ok(reply)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::ScriptedClient;

    fn conversation(turns: &[&str]) -> Vec<Message> {
        let mut messages = vec![Message::system("sys")];
        for (i, turn) in turns.iter().enumerate() {
            if i % 2 == 0 {
                messages.push(Message::user(*turn));
            } else {
                messages.push(Message::assistant(*turn));
            }
        }
        messages
    }

    #[test]
    fn record_then_replay_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        let mut recorder =
            RecordingClient::create(ScriptedClient::new(vec!["one", "two"]), &path).unwrap();
        let m1 = conversation(&["q1"]);
        let m2 = conversation(&["q1", "one", "q2"]);
        assert_eq!(recorder.complete(&m1).unwrap(), "one");
        assert_eq!(recorder.complete(&m2).unwrap(), "two");

        let mut replay = ReplayClient::from_path(&path).unwrap();
        assert_eq!(replay.complete(&m1).unwrap(), "one");
        assert_eq!(replay.complete(&m2).unwrap(), "two");
        // Repeats of a recorded request keep working.
        assert_eq!(replay.complete(&m1).unwrap(), "one");
    }

    #[test]
    fn mutated_prompt_reports_divergence_index() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        let mut recorder =
            RecordingClient::create(ScriptedClient::new(vec!["one"]), &path).unwrap();
        recorder.complete(&conversation(&["q1"])).unwrap();

        let mut replay = ReplayClient::from_path(&path).unwrap();
        let err = replay.complete(&conversation(&["DIFFERENT"])).unwrap_err();
        match err {
            LlmError::ReplayDivergence { index, .. } => assert_eq!(index, 1),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn zero_call_recording_is_a_valid_empty_transcript() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        let _recorder =
            RecordingClient::create(ScriptedClient::new(Vec::<String>::new()), &path).unwrap();
        let transcript = Transcript::load(&path).unwrap();
        assert!(transcript.is_empty());
    }

    #[test]
    fn duplicate_fingerprints_in_file_are_rejected() {
        let entry = TranscriptEntry {
            fingerprint: "f".into(),
            reply: "r".into(),
            message_hashes: vec![],
        };
        let line = serde_json::to_string(&entry).unwrap();
        let text = format!("{line}\n{line}\n");
        assert!(matches!(
            Transcript::parse(&text),
            Err(LlmError::TranscriptFile(_))
        ));
    }

    #[test]
    fn rerecording_identical_prompts_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        let mut recorder =
            RecordingClient::create(ScriptedClient::new(vec!["one", "one"]), &path).unwrap();
        let m1 = conversation(&["q1"]);
        recorder.complete(&m1).unwrap();
        recorder.complete(&m1).unwrap();
        let transcript = Transcript::load(&path).unwrap();
        assert_eq!(transcript.len(), 1);
    }
}
