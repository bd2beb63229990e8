//! Provider-agnostic chat completion with retries, a token budget gate and
//! an append-only transcript.

mod backend;
mod client;
mod config;
mod http;
mod message;
mod scripted;
mod transcript;

pub use backend::{BackendError, BackendReply, ChatRequest, FaultBackend, LlmBackend};
pub use client::{estimate_tokens, Gateway, LlmError, Sleeper};
pub use config::{
    LlmConfig, DEFAULT_BASE_URL, DEFAULT_BUDGET_MARGIN, DEFAULT_CONTEXT_TOKENS, ENV_API_KEY, ENV_BASE_URL, ENV_MODEL,
    EXTRACTION_TEMPERATURE, REASONING_TEMPERATURE,
};
pub use http::HttpBackend;
pub use message::{ChatExchange, Message, Role, Usage};
pub use scripted::{ScriptedBackend, SequenceBackend};
pub use transcript::{Transcript, TranscriptEntry};
