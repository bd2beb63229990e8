//! LLM-facing stages: the chat gateway, entity extraction and the
//! multi-turn few-shot reasoning loop.

pub mod compare;
pub mod extraction;
pub mod gateway;
mod json;
pub mod mock;
pub mod pipeline;
pub mod reasoning;
pub mod session;
pub mod synthetic;

pub use json::strip_code_fences;
