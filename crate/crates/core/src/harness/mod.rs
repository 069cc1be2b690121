//! End-to-end runs: configuration, evaluation datasets, per-query
//! reranking, retrieval metrics, reports and SQL prompts.

mod config;
mod dataset;
mod metrics;
mod pipeline;
mod prompt;
mod report;
pub mod synthetic;

pub use config::{
    Config, CorpusSection, MipSection, PoolSection, ProvidersSection, WeightsSection, ENV_EMBEDDING_TOKEN,
    ENV_EMBEDDING_URL, ENV_LLM_KEY, ENV_LLM_URL,
};
pub use dataset::{EvalDataset, EvalQuery};
pub use metrics::{f1, hits, macro_average, micro_average, score, Prf};
pub use pipeline::{decomposer_from_config, provider_from_config, Pipeline, PreparedQuery};
pub use prompt::{emit_sql_prompt, SQL_INSTRUCTION};
pub use report::{CutoffSummary, QueryRow, RetrievalReport};
