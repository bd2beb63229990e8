//! Structured literature records and the three lexical retrieval engines
//! used to map a research object onto preprocessing/feature plans.

mod error;
mod eval;
mod index;
mod plan;
mod record;
pub mod synthetic;
mod tokenize;

pub use error::{KbError, Result};
pub use eval::{evaluate_retrieval, load_queries, query_precision, save_queries, LabeledQuery};
pub use index::{
    build_index, query, Engine, KbIndex, QueryResult, RetrievalHit, BM25_B, BM25_K1, CACHE_MAGIC, CACHE_VERSION,
    DEFAULT_TOP_K,
};
pub use plan::{plan_from_records, resolve_record};
pub use record::{load_records, parse_records, records_to_jsonl, save_records, KbRecord};
pub use tokenize::tokenize;
