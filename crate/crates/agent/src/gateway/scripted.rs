use std::collections::{BTreeMap, VecDeque};
use std::sync::Mutex;

use super::backend::{BackendError, BackendReply, ChatRequest, LlmBackend};
use super::message::Message;
use super::transcript::Transcript;

fn key(messages: &[Message]) -> String {
    serde_json::to_string(messages).expect("messages serialise")
}

/// Canned responses keyed by the exact message list. Referentially
/// transparent: the same messages always get the same answer.
#[derive(Debug, Clone, Default)]
pub struct ScriptedBackend {
    answers: BTreeMap<String, String>,
}

impl ScriptedBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, messages: &[Message], response: impl Into<String>) -> Self {
        self.insert(messages, response);
        self
    }

    pub fn insert(&mut self, messages: &[Message], response: impl Into<String>) {
        self.answers.insert(key(messages), response.into());
    }

    /// Replays a recorded session.
    pub fn from_transcript(t: &Transcript) -> Self {
        let mut s = Self::new();
        for e in t.entries() {
            s.insert(&e.exchange.messages, e.exchange.response.clone());
        }
        s
    }

    pub fn len(&self) -> usize {
        self.answers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.answers.is_empty()
    }
}

impl LlmBackend for ScriptedBackend {
    fn name(&self) -> &str {
        "scripted"
    }

    fn send(&self, req: &ChatRequest) -> Result<BackendReply, BackendError> {
        self.answers
            .get(&key(&req.messages))
            .map(BackendReply::text)
            .ok_or_else(|| {
                let last = req.messages.last().map(|m| m.content.as_str()).unwrap_or("");
                let head: String = last.chars().take(80).collect();
                BackendError::NoScript(format!("no scripted answer for a request ending in `{head}`"))
            })
    }
}

/// Answers in a fixed order regardless of the request. Test helper for
/// multi-step exchanges whose later prompts are awkward to spell out.
#[derive(Debug, Default)]
pub struct SequenceBackend {
    replies: Mutex<VecDeque<String>>,
}

impl SequenceBackend {
    pub fn new<S: Into<String>>(replies: impl IntoIterator<Item = S>) -> Self {
        Self {
            replies: Mutex::new(replies.into_iter().map(Into::into).collect()),
        }
    }

    pub fn remaining(&self) -> usize {
        self.replies.lock().unwrap().len()
    }
}

impl LlmBackend for SequenceBackend {
    fn name(&self) -> &str {
        "sequence"
    }

    fn send(&self, _req: &ChatRequest) -> Result<BackendReply, BackendError> {
        self.replies
            .lock()
            .unwrap()
            .pop_front()
            .map(BackendReply::text)
            .ok_or_else(|| BackendError::NoScript("sequence exhausted".into()))
    }
}
