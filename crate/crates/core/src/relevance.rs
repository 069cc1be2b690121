//! Coarse (query-table) and fine (sub-query-column) relevance scores over a
//! candidate pool.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{render_column_text, render_table_text, TableCorpus};
use crate::decompose::{unescape_field, QueryDecomposition};
use crate::embedding::{cosine, EmbeddingProvider};
use crate::error::{Error, Result};

pub const DEFAULT_POOL_SIZE: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    /// Index into the corpus table list.
    pub table: usize,
    pub name: String,
    pub base_score: f64,
}

/// The top-N tables a base retriever returned for one query, sorted by
/// descending base score with ties broken by table name.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePool {
    pub query_id: String,
    pub query_text: String,
    candidates: Vec<Candidate>,
    pub pool_size: usize,
}

impl CandidatePool {
    pub fn new(
        query_id: impl Into<String>,
        query_text: impl Into<String>,
        mut candidates: Vec<Candidate>,
        pool_size: usize,
    ) -> Self {
        candidates.sort_by(|a, b| {
            b.base_score
                .total_cmp(&a.base_score)
                .then_with(|| a.name.cmp(&b.name))
        });
        candidates.truncate(pool_size);
        CandidatePool {
            query_id: query_id.into(),
            query_text: query_text.into(),
            candidates,
            pool_size,
        }
    }

    /// Pool from `(table name, score)` pairs; every name must exist.
    pub fn from_scores(
        corpus: &TableCorpus,
        query_id: impl Into<String>,
        query_text: impl Into<String>,
        scores: &[(&str, f64)],
        pool_size: usize,
    ) -> Result<Self> {
        let mut candidates = Vec::with_capacity(scores.len());
        let mut unknown = Vec::new();
        for &(name, score) in scores {
            match corpus.position(name) {
                Some(table) => candidates.push(Candidate {
                    table,
                    name: name.to_string(),
                    base_score: score,
                }),
                None => unknown.push(format!("unknown table {name:?}")),
            }
        }
        if !unknown.is_empty() {
            return Err(Error::Validation(unknown));
        }
        Ok(CandidatePool::new(query_id, query_text, candidates, pool_size))
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Table names of the first `k` candidates: the base-retriever ranking.
    pub fn top_k_names(&self, k: usize) -> Vec<String> {
        self.candidates.iter().take(k).map(|c| c.name.clone()).collect()
    }
}

/// Read a `query-id <TAB> query text` sidecar, preserving file order.
pub fn parse_query_sidecar(text: &str, file: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (index, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, query) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(file, index + 1, "expected `query-id<TAB>query`"))?;
        let query = unescape_field(query).map_err(|m| Error::parse(file, index + 1, m))?;
        out.push((id.to_string(), query));
    }
    Ok(out)
}

pub fn load_query_sidecar(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_query_sidecar(&text, &path.display().to_string())
}

pub fn load_base_scores(
    path: &Path,
    queries: &[(String, String)],
    corpus: &TableCorpus,
    pool_size: usize,
) -> Result<Vec<CandidatePool>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_base_scores(&text, &path.display().to_string(), queries, corpus, pool_size)
}

/// Parse `query-id <TAB> table <TAB> score` lines into one pool per query of
/// `queries`, in that order. Score lines for ids absent from `queries` are
/// skipped with a warning; unknown table names fail validation.
pub fn parse_base_scores(
    text: &str,
    file: &str,
    queries: &[(String, String)],
    corpus: &TableCorpus,
    pool_size: usize,
) -> Result<Vec<CandidatePool>> {
    let known: HashMap<&str, usize> = queries
        .iter()
        .enumerate()
        .map(|(i, (id, _))| (id.as_str(), i))
        .collect();
    let mut per_query: Vec<Vec<Candidate>> = vec![Vec::new(); queries.len()];
    let mut unknown_tables = Vec::new();
    let mut skipped: std::collections::BTreeSet<String> = Default::default();
    for (index, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, table, score] = fields[..] else {
            return Err(Error::parse(file, index + 1, "expected `query-id<TAB>table<TAB>score`"));
        };
        let score: f64 = score
            .trim()
            .parse()
            .map_err(|e| Error::parse(file, index + 1, format!("bad score: {e}")))?;
        let Some(&slot) = known.get(id) else {
            skipped.insert(id.to_string());
            continue;
        };
        match corpus.position(table) {
            Some(t) => per_query[slot].push(Candidate {
                table: t,
                name: table.to_string(),
                base_score: score,
            }),
            None => unknown_tables.push(format!("line {}: unknown table {table:?}", index + 1)),
        }
    }
    if !unknown_tables.is_empty() {
        return Err(Error::Validation(unknown_tables));
    }
    for id in skipped {
        log::warn!("base scores for unknown query id {id:?} skipped");
    }
    Ok(queries
        .iter()
        .zip(per_query)
        .map(|((id, text), candidates)| CandidatePool::new(id.clone(), text.clone(), candidates, pool_size))
        .collect())
}

/// Convenience first stage: rank the whole corpus by query-table cosine.
pub fn pool_by_cosine(
    provider: &EmbeddingProvider,
    corpus: &TableCorpus,
    query_id: &str,
    query_text: &str,
    pool_size: usize,
    row_limit: usize,
) -> Result<CandidatePool> {
    let query = provider.embed(query_text)?;
    let candidates = corpus
        .tables()
        .par_iter()
        .enumerate()
        .map(|(i, table)| {
            let v = provider.embed(&render_table_text(table, row_limit))?;
            Ok(Candidate {
                table: i,
                name: table.name().to_string(),
                base_score: cosine(&query, &v)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CandidatePool::new(query_id, query_text, candidates, pool_size))
}

/// Where the coarse score r_i comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoarseSource {
    /// Cosine between the query and the flattened table.
    Cosine,
    /// The base retriever's score, unchanged.
    PassThrough,
    /// Pass-through when base scores were supplied, cosine otherwise.
    #[default]
    Auto,
}

impl FromStr for CoarseSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(CoarseSource::Cosine),
            "pass-through" | "passthrough" => Ok(CoarseSource::PassThrough),
            "auto" => Ok(CoarseSource::Auto),
            other => Err(Error::Config(format!("unknown coarse score source {other:?}"))),
        }
    }
}

/// r_i per pool position.
pub fn coarse_scores(
    provider: &EmbeddingProvider,
    corpus: &TableCorpus,
    pool: &CandidatePool,
    pass_through: bool,
    row_limit: usize,
) -> Result<Vec<f64>> {
    if pass_through {
        return Ok(pool.candidates().iter().map(|c| c.base_score).collect());
    }
    if pool.is_empty() {
        return Ok(Vec::new());
    }
    let query = provider.embed(&pool.query_text)?;
    pool.candidates()
        .par_iter()
        .map(|c| {
            let table = &corpus.tables()[c.table];
            let v = provider.embed(&render_table_text(table, row_limit))?;
            cosine(&query, &v)
        })
        .collect()
}

/// r_qik indexed `[sub-query][pool position][column]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FineScores {
    scores: Vec<Vec<Vec<f64>>>,
}

impl FineScores {
    pub fn new(scores: Vec<Vec<Vec<f64>>>) -> Self {
        FineScores { scores }
    }

    pub fn get(&self, q: usize, i: usize, k: usize) -> f64 {
        self.scores[q][i][k]
    }

    pub fn sub_query_count(&self) -> usize {
        self.scores.len()
    }

    pub fn as_nested(&self) -> &[Vec<Vec<f64>>] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.iter().flatten().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn fine_scores(
    provider: &EmbeddingProvider,
    corpus: &TableCorpus,
    decomposition: &QueryDecomposition,
    pool: &CandidatePool,
) -> Result<FineScores> {
    let column_vectors = pool
        .candidates()
        .par_iter()
        .map(|c| {
            let table = &corpus.tables()[c.table];
            let texts: Vec<String> = (0..table.columns().len())
                .map(|k| render_column_text(table, k).rendered())
                .collect();
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            provider.embed_batch(&refs)
        })
        .collect::<Result<Vec<_>>>()?;

    let scores = decomposition
        .sub_queries()
        .iter()
        .map(|sq| {
            let qv = provider.embed(&sq.text())?;
            column_vectors
                .iter()
                .map(|cols| cols.iter().map(|cv| cosine(&qv, cv)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FineScores::new(scores))
}

/// Coarse and fine scores for one pool.
#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceScores {
    pub coarse: Vec<f64>,
    pub fine: FineScores,
}
