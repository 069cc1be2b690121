use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::compatibility::SegmentWeights;
use crate::corpus::DEFAULT_ROW_LIMIT;
use crate::error::{Error, Result};
use crate::mip::{CrossCheck, FallbackPolicy, SolveOptions};
use crate::relevance::{CoarseSource, DEFAULT_POOL_SIZE};

/// Run configuration, read from a TOML document with the sections below.
/// Every field has a default, so an empty document is valid.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub corpus: CorpusSection,
    pub pool: PoolSection,
    pub mip: MipSection,
    pub weights: WeightsSection,
    pub providers: ProvidersSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    /// Sample rows included when a table is flattened to text.
    pub row_limit: usize,
}

impl Default for CorpusSection {
    fn default() -> Self {
        CorpusSection {
            row_limit: DEFAULT_ROW_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoolSection {
    pub size: usize,
    /// "auto", "cosine" or "pass-through".
    pub coarse: String,
}

impl Default for PoolSection {
    fn default() -> Self {
        PoolSection {
            size: DEFAULT_POOL_SIZE,
            coarse: "auto".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MipSection {
    pub alpha: f64,
    pub ks: Vec<usize>,
    pub time_limit_secs: f64,
    /// Joins with omega at or below this value cannot connect tables.
    pub epsilon: f64,
    /// "top-k" or "error".
    pub fallback: String,
    /// Confirm with branch-and-bound when the model has at most this many
    /// variables; 0 disables the check.
    pub cross_check_max_variables: usize,
    /// Worker threads for evaluation; 0 uses all cores.
    pub workers: usize,
}

impl Default for MipSection {
    fn default() -> Self {
        MipSection {
            alpha: 1.0,
            ks: vec![2, 5, 10],
            time_limit_secs: 10.0,
            epsilon: 0.0,
            fallback: "top-k".into(),
            cross_check_max_variables: 200,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightsSection {
    /// Schema-similarity segment weights; must sum to 1.
    pub header: f64,
    pub table: f64,
    pub others: f64,
    /// Multipliers on the coarse, fine and compatibility objective terms.
    pub coarse_term: f64,
    pub fine_term: f64,
    pub compat_term: f64,
    /// Rescale each term to [0, 1] before the multipliers apply: min-max for
    /// the relevance terms, division by the maximum for compatibility.
    pub rescale: bool,
}

impl Default for WeightsSection {
    fn default() -> Self {
        let s = SegmentWeights::default();
        WeightsSection {
            header: s.header,
            table: s.table,
            others: s.others,
            coarse_term: 1.0,
            fine_term: 1.0,
            compat_term: 1.0,
            rescale: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProvidersSection {
    /// "hashing", "precomputed" or "remote".
    pub embedding: String,
    pub hashing_dimension: usize,
    pub hashing_seed: Option<u64>,
    pub embedding_store: Option<PathBuf>,
    pub remote_dimension: usize,
    pub batch_size: usize,
    pub max_in_flight: usize,
    pub max_retries: usize,
    /// "cache-only" or "remote".
    pub decomposition: String,
    pub llm_model: String,
    pub temperature: f64,
    /// On a decomposition cache miss without a model: "error" or "whole-query".
    pub on_missing_decomposition: String,
}

impl Default for ProvidersSection {
    fn default() -> Self {
        ProvidersSection {
            embedding: "hashing".into(),
            hashing_dimension: crate::embedding::DEFAULT_HASHING_DIMENSION,
            hashing_seed: None,
            embedding_store: None,
            remote_dimension: 768,
            batch_size: 32,
            max_in_flight: 4,
            max_retries: 2,
            decomposition: "cache-only".into(),
            llm_model: "default".into(),
            temperature: 0.0,
            on_missing_decomposition: "error".into(),
        }
    }
}

/// Environment variables holding service endpoints and credentials.
pub const ENV_EMBEDDING_URL: &str = "JOINRANK_EMBEDDING_URL";
pub const ENV_EMBEDDING_TOKEN: &str = "JOINRANK_EMBEDDING_TOKEN";
pub const ENV_LLM_URL: &str = "JOINRANK_LLM_URL";
pub const ENV_LLM_KEY: &str = "JOINRANK_LLM_KEY";

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Config::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Config> {
        let config: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// The defaults as a TOML document.
    pub fn default_toml() -> String {
        toml::to_string(&Config::default()).expect("default config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.pool.size == 0 {
            problems.push("pool.size must be positive".to_string());
        }
        if let Err(e) = self.coarse_source() {
            problems.push(e.to_string());
        }
        if !(self.mip.alpha >= 0.0 && self.mip.alpha.is_finite()) {
            problems.push("mip.alpha must be non-negative".into());
        }
        if self.mip.ks.is_empty() || self.mip.ks.contains(&0) {
            problems.push("mip.ks must list positive cutoffs".into());
        }
        if !(self.mip.time_limit_secs > 0.0) {
            problems.push("mip.time_limit_secs must be positive".into());
        }
        if !(self.mip.epsilon >= 0.0) {
            problems.push("mip.epsilon must be non-negative".into());
        }
        if let Err(e) = self.mip.fallback.parse::<FallbackPolicy>() {
            problems.push(e.to_string());
        }
        if let Err(e) = self.segment_weights() {
            problems.push(e.to_string());
        }
        let w = &self.weights;
        if [w.coarse_term, w.fine_term, w.compat_term].iter().any(|x| !(*x >= 0.0)) {
            problems.push("term multipliers must be non-negative".into());
        }
        let p = &self.providers;
        if !["hashing", "precomputed", "remote"].contains(&p.embedding.as_str()) {
            problems.push(format!("unknown embedding provider {:?}", p.embedding));
        }
        if p.embedding == "precomputed" && p.embedding_store.is_none() {
            problems.push("providers.embedding_store is required for the precomputed provider".into());
        }
        if !["cache-only", "remote"].contains(&p.decomposition.as_str()) {
            problems.push(format!("unknown decomposition client {:?}", p.decomposition));
        }
        if !["error", "whole-query"].contains(&p.on_missing_decomposition.as_str()) {
            problems.push(format!(
                "unknown on_missing_decomposition {:?}",
                p.on_missing_decomposition
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    pub fn coarse_source(&self) -> Result<CoarseSource> {
        self.pool.coarse.parse()
    }

    pub fn segment_weights(&self) -> Result<SegmentWeights> {
        SegmentWeights::new(self.weights.header, self.weights.table, self.weights.others)
    }

    pub fn solve_options(&self) -> Result<SolveOptions> {
        Ok(SolveOptions {
            time_limit: Some(Duration::from_secs_f64(self.mip.time_limit_secs)),
            fallback: self.mip.fallback.parse()?,
            cross_check: match self.mip.cross_check_max_variables {
                0 => CrossCheck::Off,
                max_variables => CrossCheck::Auto { max_variables },
            },
        })
    }
}
