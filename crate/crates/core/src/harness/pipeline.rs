use std::collections::BTreeMap;

use rayon::prelude::*;

use super::config::{Config, ENV_EMBEDDING_TOKEN, ENV_EMBEDDING_URL, ENV_LLM_KEY, ENV_LLM_URL};
use super::dataset::EvalDataset;
use super::report::{QueryRow, RetrievalReport};
use crate::compatibility::{build_compatibility_graph, CompatibilityGraph, CompatibilityOptions};
use crate::corpus::{GoldConstraintSet, ProfileStore, TableCorpus};
use crate::decompose::{
    decompose_query, DecompositionCache, DecompositionClient, DecompositionSource, HttpLanguageModel, LlmConfig,
    QueryDecomposition,
};
use crate::embedding::{load_store, EmbeddingProvider, HashingEncoder, RemoteEncoder, RemoteEncoderConfig};
use crate::error::{Error, Result};
use crate::mip::{solve, RerankInstance, Solved};
use crate::relevance::{coarse_scores, fine_scores, pool_by_cosine, CandidatePool, CoarseSource, FineScores, RelevanceScores};

/// Map values onto [0, 1] by min-max; a constant term becomes 0.
fn min_max<'a>(values: impl Iterator<Item = &'a mut f64>) {
    let values: Vec<&mut f64> = values.collect();
    let lo = values.iter().fold(f64::INFINITY, |a, v| a.min(**v));
    let hi = values.iter().fold(f64::NEG_INFINITY, |a, v| a.max(**v));
    let range = hi - lo;
    for v in values {
        *v = if range > 0.0 { (*v - lo) / range } else { 0.0 };
    }
}

/// Embedding provider described by the config. Service URLs come from the
/// environment.
pub fn provider_from_config(config: &Config) -> Result<EmbeddingProvider> {
    let p = &config.providers;
    match p.embedding.as_str() {
        "hashing" => Ok(EmbeddingProvider::hashing(match p.hashing_seed {
            Some(seed) => HashingEncoder::new(p.hashing_dimension, seed),
            None => HashingEncoder::with_dimension(p.hashing_dimension),
        })),
        "precomputed" => {
            let path = p
                .embedding_store
                .as_ref()
                .ok_or_else(|| Error::Config("providers.embedding_store is not set".into()))?;
            Ok(EmbeddingProvider::precomputed(load_store(path)?))
        }
        "remote" => {
            let url = std::env::var(ENV_EMBEDDING_URL)
                .map_err(|_| Error::Config(format!("{ENV_EMBEDDING_URL} is not set")))?;
            let mut rc = RemoteEncoderConfig::new(url, p.remote_dimension);
            rc.token_env = Some(ENV_EMBEDDING_TOKEN.into());
            rc.batch_size = p.batch_size;
            rc.max_in_flight = p.max_in_flight;
            rc.max_retries = p.max_retries;
            Ok(EmbeddingProvider::remote(RemoteEncoder::new(rc)))
        }
        other => Err(Error::Config(format!("unknown embedding provider {other:?}"))),
    }
}

pub fn decomposer_from_config(config: &Config) -> Result<DecompositionClient> {
    let p = &config.providers;
    match p.decomposition.as_str() {
        "cache-only" => Ok(DecompositionClient::CacheOnly),
        "remote" => {
            let url = std::env::var(ENV_LLM_URL).map_err(|_| Error::Config(format!("{ENV_LLM_URL} is not set")))?;
            let mut lc = LlmConfig::new(url, p.llm_model.clone());
            lc.key_env = Some(ENV_LLM_KEY.into());
            lc.temperature = p.temperature;
            lc.max_retries = p.max_retries;
            Ok(DecompositionClient::RemoteLlm(Box::new(HttpLanguageModel::new(lc))))
        }
        other => Err(Error::Config(format!("unknown decomposition client {other:?}"))),
    }
}

/// Everything computed once per query, reused for every cutoff.
#[derive(Debug, Clone)]
pub struct PreparedQuery {
    pub pool: CandidatePool,
    pub decomposition: QueryDecomposition,
    pub scores: RelevanceScores,
    pub graph: CompatibilityGraph,
}

/// Loaded corpus, providers and caches for a run.
pub struct Pipeline {
    pub config: Config,
    corpus: TableCorpus,
    profiles: ProfileStore,
    provider: EmbeddingProvider,
    decomposer: DecompositionClient,
    cache: DecompositionCache,
    base_pools: BTreeMap<String, CandidatePool>,
    gold: Option<GoldConstraintSet>,
}

impl Pipeline {
    pub fn new(
        config: Config,
        corpus: TableCorpus,
        provider: EmbeddingProvider,
        decomposer: DecompositionClient,
        cache: DecompositionCache,
    ) -> Result<Pipeline> {
        config.validate()?;
        let profiles = ProfileStore::build(&corpus);
        Ok(Pipeline {
            config,
            corpus,
            profiles,
            provider,
            decomposer,
            cache,
            base_pools: BTreeMap::new(),
            gold: None,
        })
    }

    /// Base-retriever pools, keyed by their query id.
    pub fn with_base_pools(mut self, pools: Vec<CandidatePool>) -> Self {
        self.base_pools = pools.into_iter().map(|p| (p.query_id.clone(), p)).collect();
        self
    }

    pub fn with_gold_constraints(mut self, gold: GoldConstraintSet) -> Self {
        self.gold = Some(gold);
        self
    }

    pub fn corpus(&self) -> &TableCorpus {
        &self.corpus
    }

    pub fn profiles(&self) -> &ProfileStore {
        &self.profiles
    }

    pub fn provider(&self) -> &EmbeddingProvider {
        &self.provider
    }

    fn decompose(&self, text: &str) -> Result<QueryDecomposition> {
        match decompose_query(&self.decomposer, &self.cache, text) {
            Err(Error::MissingDecomposition { .. }) if self.config.providers.on_missing_decomposition == "whole-query" => {
                log::warn!("no decomposition for {text:?}; using the whole query");
                Ok(QueryDecomposition::whole_query(text, DecompositionSource::Manual))
            }
            other => other,
        }
    }

    /// Pool, decomposition, scores and compatibility graph for one query.
    pub fn prepare(&self, query_id: &str, text: &str) -> Result<PreparedQuery> {
        let c = &self.config;
        let (pool, has_base) = match self.base_pools.get(query_id) {
            Some(p) => (p.clone(), true),
            None => (
                pool_by_cosine(&self.provider, &self.corpus, query_id, text, c.pool.size, c.corpus.row_limit)?,
                false,
            ),
        };
        let pass_through = match c.coarse_source()? {
            CoarseSource::PassThrough => {
                if !has_base {
                    return Err(Error::Config(format!("no base scores for query {query_id:?}")));
                }
                true
            }
            CoarseSource::Cosine => false,
            CoarseSource::Auto => has_base,
        };
        let decomposition = self.decompose(text)?;
        let w = &c.weights;
        let mut coarse = coarse_scores(&self.provider, &self.corpus, &pool, pass_through, c.corpus.row_limit)?;
        let mut fine = fine_scores(&self.provider, &self.corpus, &decomposition, &pool)?.as_nested().to_vec();
        if w.rescale {
            min_max(coarse.iter_mut());
            min_max(fine.iter_mut().flatten().flatten());
        }
        coarse.iter_mut().for_each(|r| *r *= w.coarse_term);
        fine.iter_mut().flatten().flatten().for_each(|v| *v *= w.fine_term);
        let fine = FineScores::new(fine);
        let options = CompatibilityOptions {
            weights: c.segment_weights()?,
        };
        let graph = build_compatibility_graph(
            &self.corpus,
            &pool,
            &self.profiles,
            &self.provider,
            &options,
            self.gold.as_ref(),
            None,
        )?;
        let mut factor = w.compat_term;
        if w.rescale {
            let top = graph.matrices().values().flatten().fold(0.0_f64, |a, &b| a.max(b));
            if top > 0.0 {
                factor /= top;
            }
        }
        let graph = if factor == 1.0 { graph } else { graph.scaled(factor) };
        Ok(PreparedQuery {
            pool,
            decomposition,
            scores: RelevanceScores { coarse, fine },
            graph,
        })
    }

    /// Program instance at cutoff `k`, clamped to the pool size.
    pub fn instance(&self, prepared: &PreparedQuery, k: usize) -> Result<RerankInstance> {
        let pool = prepared.pool.len();
        if pool == 0 {
            return Err(Error::PoolTooSmall { k, pool });
        }
        RerankInstance::from_pool(
            &self.corpus,
            &prepared.pool,
            &prepared.scores,
            prepared.graph.clone(),
            &prepared.decomposition,
            k.min(pool),
            self.config.mip.alpha,
        )?
        .with_epsilon(self.config.mip.epsilon)
    }

    pub fn solve_prepared(&self, prepared: &PreparedQuery, k: usize) -> Result<Solved> {
        let inst = self.instance(prepared, k)?;
        solve(&inst, &self.config.solve_options()?)
    }

    pub fn rerank_one(&self, query_id: &str, text: &str, k: usize) -> Result<Solved> {
        let prepared = self.prepare(query_id, text)?;
        self.solve_prepared(&prepared, k)
    }

    fn evaluate_query(&self, id: &str, text: &str, gold: &std::collections::BTreeSet<String>) -> Vec<QueryRow> {
        let ks = &self.config.mip.ks;
        let row = |k: usize, baseline: Vec<String>| QueryRow {
            query_id: id.to_string(),
            k,
            gold: gold.clone(),
            predicted: Vec::new(),
            baseline,
            fallback: false,
            objective: None,
            error: None,
        };
        let prepared = match self.prepare(id, text) {
            Ok(p) => p,
            Err(e) => {
                log::warn!("query {id}: {e}");
                let baseline = self.base_pools.get(id);
                return ks
                    .iter()
                    .map(|&k| QueryRow {
                        error: Some(e.to_string()),
                        ..row(k, baseline.map(|p| p.top_k_names(k)).unwrap_or_default())
                    })
                    .collect();
            }
        };
        ks.iter()
            .map(|&k| {
                let mut r = row(k, prepared.pool.top_k_names(k));
                match self.solve_prepared(&prepared, k) {
                    Ok(solved) => {
                        r.predicted = solved.plan.tables.clone();
                        r.fallback = solved.plan.fallback;
                        r.objective = Some(solved.plan.objective);
                    }
                    Err(e) => {
                        log::warn!("query {id} at k = {k}: {e}");
                        r.error = Some(e.to_string());
                    }
                }
                r
            })
            .collect()
    }

    /// Rerank every query at every configured cutoff. Per-query failures are
    /// recorded in the rows and scored as empty predictions.
    pub fn evaluate(&self, dataset: &EvalDataset) -> Result<RetrievalReport> {
        let run = || -> Vec<QueryRow> {
            dataset
                .queries
                .par_iter()
                .flat_map_iter(|q| self.evaluate_query(&q.id, &q.question, &q.gold_tables))
                .collect()
        };
        let rows = match self.config.mip.workers {
            0 => run(),
            n => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("worker pool: {e}")))?
                .install(run),
        };
        Ok(RetrievalReport::new(
            self.config.mip.ks.clone(),
            self.config.mip.alpha,
            self.config.pool.size,
            rows,
            dataset.skipped.clone(),
        ))
    }
}
