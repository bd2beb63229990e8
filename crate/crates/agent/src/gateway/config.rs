use serde::{Deserialize, Serialize};

pub const ENV_API_KEY: &str = "LLM_API_KEY";
pub const ENV_BASE_URL: &str = "LLM_BASE_URL";
pub const ENV_MODEL: &str = "LLM_MODEL";
pub const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";
pub const EXTRACTION_TEMPERATURE: f64 = 0.1;
pub const REASONING_TEMPERATURE: f64 = 0.5;
pub const DEFAULT_CONTEXT_TOKENS: usize = 32_768;
pub const DEFAULT_BUDGET_MARGIN: f64 = 0.8;

fn d_base_url() -> String {
    DEFAULT_BASE_URL.into()
}
fn d_model() -> String {
    "qwen-plus".into()
}
fn d_key_env() -> String {
    ENV_API_KEY.into()
}
fn d_temperature() -> f64 {
    REASONING_TEMPERATURE
}
fn d_max_tokens() -> usize {
    4096
}
fn d_timeout() -> u64 {
    120
}
fn d_retries() -> u32 {
    3
}
fn d_context() -> usize {
    DEFAULT_CONTEXT_TOKENS
}
fn d_margin() -> f64 {
    DEFAULT_BUDGET_MARGIN
}
fn d_backoff() -> u64 {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmConfig {
    #[serde(default = "d_base_url")]
    pub base_url: String,
    #[serde(default = "d_model")]
    pub model: String,
    /// Name of the environment variable holding the API key.
    #[serde(default = "d_key_env")]
    pub api_key_env: String,
    #[serde(default = "d_temperature")]
    pub temperature: f64,
    #[serde(default = "d_max_tokens")]
    pub max_tokens: usize,
    #[serde(default = "d_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "d_retries")]
    pub max_retries: u32,
    /// Provider context limit in tokens.
    #[serde(default = "d_context")]
    pub context_tokens: usize,
    /// Fraction of `context_tokens` a prompt may use.
    #[serde(default = "d_margin")]
    pub budget_margin: f64,
    #[serde(default = "d_backoff")]
    pub backoff_base_ms: u64,
}

impl Default for LlmConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields defaulted")
    }
}

impl LlmConfig {
    /// Defaults overridden by `LLM_BASE_URL` and `LLM_MODEL` when set.
    pub fn from_env() -> Self {
        let mut c = Self::default();
        c.apply_env();
        c
    }

    pub fn apply_env(&mut self) {
        if let Ok(v) = std::env::var(ENV_BASE_URL) {
            if !v.is_empty() {
                self.base_url = v;
            }
        }
        if let Ok(v) = std::env::var(ENV_MODEL) {
            if !v.is_empty() {
                self.model = v;
            }
        }
    }

    pub fn with_temperature(&self, t: f64) -> Self {
        Self {
            temperature: t,
            ..self.clone()
        }
    }

    /// Largest admissible prompt estimate.
    pub fn token_budget(&self) -> usize {
        (self.context_tokens as f64 * self.budget_margin).floor() as usize
    }

    pub fn api_key(&self) -> Option<String> {
        std::env::var(&self.api_key_env).ok().filter(|k| !k.is_empty())
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(format!("temperature {} outside [0, 2]", self.temperature));
        }
        if !(self.budget_margin > 0.0 && self.budget_margin <= 1.0) {
            return Err(format!("budget_margin {} outside (0, 1]", self.budget_margin));
        }
        if self.max_tokens == 0 || self.context_tokens == 0 {
            return Err("max_tokens and context_tokens must be positive".into());
        }
        Ok(())
    }
}
