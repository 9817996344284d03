//! Live HTTP client speaking the common chat-completions wire format.
//!
//! Configuration comes from environment variables and is never written to
//! disk:
//!
//! - `REXPLORE_CHAT_BASE_URL` — API base, e.g. `https://api.example.com/v1`
//! - `REXPLORE_CHAT_API_KEY`  — bearer token (optional for local backends)
//! - `REXPLORE_CHAT_MODEL`    — model identifier

use serde_json::{json, Value};

use super::{network_forbidden, validate_messages, ChatClient, LlmError, Message};

pub const ENV_BASE_URL: &str = "REXPLORE_CHAT_BASE_URL";
pub const ENV_API_KEY: &str = "REXPLORE_CHAT_API_KEY";
pub const ENV_MODEL: &str = "REXPLORE_CHAT_MODEL";

pub struct LiveClient {
    base_url: String,
    api_key: Option<String>,
    model: String,
}

impl LiveClient {
    pub fn new(
        base_url: impl Into<String>,
        api_key: Option<String>,
        model: impl Into<String>,
    ) -> Self {
        LiveClient {
            base_url: base_url.into(),
            api_key,
            model: model.into(),
        }
    }

    pub fn from_env() -> Result<Self, LlmError> {
        let base_url = std::env::var(ENV_BASE_URL)
            .map_err(|_| LlmError::Config(format!("{ENV_BASE_URL} is not set")))?;
        let model = std::env::var(ENV_MODEL)
            .map_err(|_| LlmError::Config(format!("{ENV_MODEL} is not set")))?;
        let api_key = std::env::var(ENV_API_KEY).ok();
        Ok(LiveClient::new(base_url, api_key, model))
    }
}

impl ChatClient for LiveClient {
    fn complete(&mut self, messages: &[Message]) -> Result<String, LlmError> {
        validate_messages(messages)?;
        if network_forbidden() {
            return Err(LlmError::NetworkForbidden);
        }

        let url = format!("{}/chat/completions", self.base_url.trim_end_matches('/'));
        let body = json!({
            "model": self.model,
            "messages": messages,
            "temperature": 0,
        });

        let mut request = ureq::post(&url).header("content-type", "application/json");
        if let Some(key) = &self.api_key {
            request = request.header("authorization", format!("Bearer {key}"));
        }
        let mut response = request
            .send_json(&body)
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        let parsed: Value = response
            .body_mut()
            .read_json()
            .map_err(|e| LlmError::BadReply(format!("invalid response body: {e}")))?;

        parsed["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| {
                LlmError::BadReply(format!(
                    "response carries no message content: {}",
                    truncate_for_log(&parsed.to_string())
                ))
            })
    }
}

fn truncate_for_log(text: &str) -> String {
    const MAX: usize = 400;
    if text.len() <= MAX {
        text.to_string()
    } else {
        let mut end = MAX;
        while !text.is_char_boundary(end) {
            end -= 1;
        }
        format!("{}…", &text[..end])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::forbid_network;

    #[test]
    fn live_client_honors_network_guard() {
        forbid_network();
        let mut client = LiveClient::new("http://127.0.0.1:1", None, "m");
        let err = client
            .complete(&[Message::system("s"), Message::user("u")])
            .unwrap_err();
        assert!(matches!(err, LlmError::NetworkForbidden));
    }
}
