use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::backend::{BackendError, ChatRequest, LlmBackend};
use super::config::LlmConfig;
use super::message::{check_roles, ChatExchange, Message, Usage};
use super::transcript::Transcript;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LlmError {
    #[error("request timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("rate limited after {attempts} attempt(s)")]
    RateLimited { attempts: u32 },
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("provider error {status}: {body}")]
    ProviderError { status: u16, body: String },
    #[error("prompt needs ~{estimated} tokens, budget is {budget}")]
    BudgetExceeded { estimated: usize, budget: usize },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("provider returned an empty response")]
    EmptyResponse,
    #[error("{0}")]
    NoScript(String),
}

/// `ceil(chars / 4) + 8` per message; a gate, not a bill.
pub fn estimate_tokens(messages: &[Message]) -> usize {
    let chars: usize = messages.iter().map(|m| m.content.chars().count()).sum();
    chars.div_ceil(4) + 8 * messages.len()
}

pub type Sleeper = Box<dyn Fn(Duration) + Send + Sync>;

/// Routes requests to one backend and keeps the session transcript.
pub struct Gateway {
    backend: Box<dyn LlmBackend>,
    transcript: Mutex<Transcript>,
    sleeper: Sleeper,
    jitter: Mutex<ChaCha8Rng>,
    attempts: AtomicUsize,
    network_attempts: AtomicUsize,
}

impl Gateway {
    pub fn new(backend: impl LlmBackend + 'static) -> Self {
        Self {
            backend: Box::new(backend),
            transcript: Mutex::new(Transcript::default()),
            sleeper: Box::new(std::thread::sleep),
            jitter: Mutex::new(ChaCha8Rng::seed_from_u64(0)),
            attempts: AtomicUsize::new(0),
            network_attempts: AtomicUsize::new(0),
        }
    }

    /// Replaces the real sleep between retries.
    pub fn with_sleeper(mut self, sleeper: impl Fn(Duration) + Send + Sync + 'static) -> Self {
        self.sleeper = Box::new(sleeper);
        self
    }

    pub fn backend_name(&self) -> &str {
        self.backend.name()
    }

    /// Backend calls made, failed ones included.
    pub fn attempts(&self) -> usize {
        self.attempts.load(Ordering::SeqCst)
    }

    pub fn network_attempts(&self) -> usize {
        self.network_attempts.load(Ordering::SeqCst)
    }

    pub fn transcript(&self) -> Transcript {
        self.transcript.lock().unwrap().clone()
    }

    pub fn transcript_len(&self) -> usize {
        self.transcript.lock().unwrap().len()
    }

    fn backoff(&self, cfg: &LlmConfig, attempt: u32, err: &BackendError) -> Duration {
        if let BackendError::RateLimited {
            retry_after_ms: Some(ms),
        } = err
        {
            return Duration::from_millis(*ms);
        }
        let base = cfg.backoff_base_ms as f64 * 2f64.powi(attempt as i32 - 1);
        let j: f64 = self.jitter.lock().unwrap().random_range(0.0..0.25);
        Duration::from_millis((base * (1.0 + j)).round() as u64)
    }

    /// Sends `messages`, retrying transport failures, timeouts and rate
    /// limits up to `cfg.max_retries` times. The exchange is appended to the
    /// transcript under `tag`.
    pub fn complete(&self, cfg: &LlmConfig, messages: &[Message], tag: &str) -> Result<ChatExchange, LlmError> {
        check_roles(messages).map_err(LlmError::InvalidRequest)?;
        let estimated = estimate_tokens(messages);
        let budget = cfg.token_budget();
        if estimated > budget {
            return Err(LlmError::BudgetExceeded { estimated, budget });
        }
        let req = ChatRequest {
            model: cfg.model.clone(),
            messages: messages.to_vec(),
            temperature: cfg.temperature,
            max_tokens: cfg.max_tokens,
        };
        let mut attempt = 0u32;
        loop {
            attempt += 1;
            self.attempts.fetch_add(1, Ordering::SeqCst);
            if self.backend.is_network() {
                self.network_attempts.fetch_add(1, Ordering::SeqCst);
            }
            let start = Instant::now();
            match self.backend.send(&req) {
                Ok(reply) => {
                    if reply.content.trim().is_empty() {
                        return Err(LlmError::EmptyResponse);
                    }
                    let latency_ms = if self.backend.is_network() {
                        start.elapsed().as_millis() as u64
                    } else {
                        0
                    };
                    let usage = reply.usage.unwrap_or(Usage {
                        prompt_tokens: estimated,
                        completion_tokens: estimate_tokens(&[Message::assistant(reply.content.clone())]) - 8,
                    });
                    let ex = ChatExchange {
                        messages: req.messages,
                        response: reply.content,
                        usage,
                        latency_ms,
                        attempts: attempt,
                    };
                    self.transcript.lock().unwrap().push(tag, ex.clone());
                    return Ok(ex);
                }
                Err(e) if e.is_retryable() && attempt <= cfg.max_retries => {
                    let wait = self.backoff(cfg, attempt, &e);
                    log::warn!("{tag}: attempt {attempt} failed ({e:?}); retrying in {wait:?}");
                    (self.sleeper)(wait);
                }
                Err(e) => {
                    return Err(match e {
                        BackendError::Timeout => LlmError::Timeout { attempts: attempt },
                        BackendError::RateLimited { .. } => LlmError::RateLimited { attempts: attempt },
                        BackendError::Transport(message) => LlmError::Transport {
                            attempts: attempt,
                            message,
                        },
                        BackendError::Status { status, body } => LlmError::ProviderError { status, body },
                        BackendError::NoScript(m) => LlmError::NoScript(m),
                    })
                }
            }
        }
    }
}
