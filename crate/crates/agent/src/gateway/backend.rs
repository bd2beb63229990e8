use std::collections::VecDeque;
use std::sync::Mutex;

use serde::Serialize;

use super::message::{Message, Usage};

/// Wire-level request body.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub max_tokens: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackendReply {
    pub content: String,
    pub usage: Option<Usage>,
}

impl BackendReply {
    pub fn text(content: impl Into<String>) -> Self {
        Self {
            content: content.into(),
            usage: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BackendError {
    Transport(String),
    Timeout,
    RateLimited {
        retry_after_ms: Option<u64>,
    },
    Status {
        status: u16,
        body: String,
    },
    /// A scripted backend has no answer for the request.
    NoScript(String),
}

impl BackendError {
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            BackendError::Transport(_) | BackendError::Timeout | BackendError::RateLimited { .. }
        )
    }
}

pub trait LlmBackend: Send + Sync {
    fn name(&self) -> &str;

    /// Whether calls leave the process.
    fn is_network(&self) -> bool {
        false
    }

    fn send(&self, req: &ChatRequest) -> Result<BackendReply, BackendError>;
}

impl<B: LlmBackend + ?Sized> LlmBackend for std::sync::Arc<B> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn is_network(&self) -> bool {
        (**self).is_network()
    }

    fn send(&self, req: &ChatRequest) -> Result<BackendReply, BackendError> {
        (**self).send(req)
    }
}

/// Fails the first calls with queued errors, then delegates.
pub struct FaultBackend<B> {
    inner: B,
    faults: Mutex<VecDeque<BackendError>>,
    calls: Mutex<usize>,
}

impl<B: LlmBackend> FaultBackend<B> {
    pub fn new(inner: B, faults: impl IntoIterator<Item = BackendError>) -> Self {
        Self {
            inner,
            faults: Mutex::new(faults.into_iter().collect()),
            calls: Mutex::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        *self.calls.lock().unwrap()
    }
}

impl<B: LlmBackend> LlmBackend for FaultBackend<B> {
    fn name(&self) -> &str {
        "fault-injection"
    }

    fn is_network(&self) -> bool {
        self.inner.is_network()
    }

    fn send(&self, req: &ChatRequest) -> Result<BackendReply, BackendError> {
        *self.calls.lock().unwrap() += 1;
        if let Some(e) = self.faults.lock().unwrap().pop_front() {
            return Err(e);
        }
        self.inner.send(req)
    }
}
