//! Join-aware table retrieval: decompose a question, score candidate tables
//! and columns, infer joinability, and rerank with a mixed-integer program.

pub mod compatibility;
pub mod corpus;
pub mod decompose;
pub mod embedding;
pub mod error;
pub mod harness;
pub mod mip;
pub mod relevance;

pub use error::{Error, Result};
