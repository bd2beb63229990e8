use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(c: impl Into<String>) -> Self {
        Self {
            role: Role::System,
            content: c.into(),
        }
    }

    pub fn user(c: impl Into<String>) -> Self {
        Self {
            role: Role::User,
            content: c.into(),
        }
    }

    pub fn assistant(c: impl Into<String>) -> Self {
        Self {
            role: Role::Assistant,
            content: c.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: usize,
    pub completion_tokens: usize,
}

/// One successful request/response pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatExchange {
    pub messages: Vec<Message>,
    pub response: String,
    pub usage: Usage,
    pub latency_ms: u64,
    /// Transport attempts including the successful one.
    pub attempts: u32,
}

/// Optional system message followed by user/assistant turns that alternate
/// and end on a user turn.
pub(crate) fn check_roles(messages: &[Message]) -> Result<(), String> {
    let body = match messages.first() {
        None => return Err("no messages".into()),
        Some(m) if m.role == Role::System => &messages[1..],
        Some(_) => messages,
    };
    if body.is_empty() {
        return Err("no user message".into());
    }
    for (i, m) in body.iter().enumerate() {
        let want = if i % 2 == 0 { Role::User } else { Role::Assistant };
        if m.role != want {
            return Err(format!("message {} has role {:?}, expected {want:?}", i, m.role));
        }
    }
    if body.last().map(|m| m.role) != Some(Role::User) {
        return Err("last message must come from the user".into());
    }
    Ok(())
}
