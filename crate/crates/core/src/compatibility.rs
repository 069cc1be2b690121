//! Join compatibility between columns of different tables.
//!
//! For columns `a` and `b`:
//!
//! ```text
//! omega(a, b) = max(0, (schema_similarity(a, b) + jaccard(a, b)) * max(u(a), u(b)))
//! ```
//!
//! where `u` is column uniqueness, so a pair scores highly only when at least
//! one side looks like a key. Known key/foreign-key pairs override omega to 1.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{ColumnProfile, ColumnRef, ColumnText, GoldConstraintSet, ProfileStore, TableCorpus};
use crate::embedding::{cosine, text_hash, EmbeddingProvider, EmbeddingVector};
use crate::error::{Error, Result};
use crate::relevance::CandidatePool;

/// Weights of the header, table-name and other-columns segments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentWeights {
    pub header: f64,
    pub table: f64,
    pub others: f64,
}

impl Default for SegmentWeights {
    fn default() -> Self {
        SegmentWeights {
            header: 0.5,
            table: 0.25,
            others: 0.25,
        }
    }
}

impl SegmentWeights {
    pub fn new(header: f64, table: f64, others: f64) -> Result<Self> {
        let w = SegmentWeights { header, table, others };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.as_array();
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Contract(format!("segment weights must be non-negative: {all:?}")));
        }
        if (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Contract(format!("segment weights must sum to 1: {all:?}")));
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.header, self.table, self.others]
    }
}

/// Jaccard similarity of the distinct normalized value sets; 0 when both are empty.
pub fn instance_jaccard(a: &ColumnProfile, b: &ColumnProfile) -> f64 {
    let (small, large) = if a.distinct_values.len() <= b.distinct_values.len() {
        (&a.distinct_values, &b.distinct_values)
    } else {
        (&b.distinct_values, &a.distinct_values)
    };
    let intersection = small.iter().filter(|v| large.contains(*v)).count();
    let union = small.len() + large.len() - intersection;
    if union == 0 {
        0.0
    } else {
        intersection as f64 / union as f64
    }
}

/// Weighted sum of per-segment cosines. A segment empty on either side adds 0.
pub fn schema_similarity(
    provider: &EmbeddingProvider,
    a: &ColumnText,
    b: &ColumnText,
    weights: &SegmentWeights,
) -> Result<f64> {
    let (ea, eb) = (SegmentVectors::embed(provider, a)?, SegmentVectors::embed(provider, b)?);
    ea.similarity(&eb, weights)
}

/// Combine schema similarity, instance similarity and the uniqueness of both
/// columns into omega.
pub fn combine_omega(schema: f64, instance: f64, uniqueness_a: f64, uniqueness_b: f64) -> f64 {
    ((schema + instance) * uniqueness_a.max(uniqueness_b)).max(0.0)
}

/// omega for one column pair. Instance similarity is forced to 0 when the
/// declared types cannot share values (dates against numbers).
pub fn omega(
    provider: &EmbeddingProvider,
    a: &ColumnProfile,
    b: &ColumnProfile,
    weights: &SegmentWeights,
) -> Result<f64> {
    let e = schema_similarity(provider, &a.text, &b.text, weights)?;
    Ok(combine_omega(e, gated_jaccard(a, b), a.uniqueness, b.uniqueness))
}

fn gated_jaccard(a: &ColumnProfile, b: &ColumnProfile) -> f64 {
    if a.declared_type.instance_compatible(b.declared_type) {
        instance_jaccard(a, b)
    } else {
        0.0
    }
}

/// Embeddings of a column's three schema segments; `None` for empty segments.
#[derive(Debug, Clone)]
struct SegmentVectors([Option<Arc<EmbeddingVector>>; 3]);

impl SegmentVectors {
    fn embed(provider: &EmbeddingProvider, text: &ColumnText) -> Result<Self> {
        let segments = text.segments();
        let present: Vec<&str> = segments.iter().copied().filter(|s| !s.trim().is_empty()).collect();
        let mut vectors = provider.embed_batch(&present)?.into_iter();
        let mut out: [Option<Arc<EmbeddingVector>>; 3] = Default::default();
        for (slot, segment) in out.iter_mut().zip(segments) {
            if !segment.trim().is_empty() {
                *slot = vectors.next();
            }
        }
        Ok(SegmentVectors(out))
    }

    fn similarity(&self, other: &SegmentVectors, weights: &SegmentWeights) -> Result<f64> {
        let mut total = 0.0;
        for ((a, b), w) in self.0.iter().zip(&other.0).zip(weights.as_array()) {
            if let (Some(a), Some(b)) = (a, b) {
                total += w * cosine(a, b)?;
            }
        }
        Ok(total)
    }
}

/// Highest-omega column pair between two pool tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestPair {
    /// Column of the lower pool position.
    pub left_column: usize,
    /// Column of the higher pool position.
    pub right_column: usize,
    pub omega: f64,
}

/// omega for every cross-table column pair of a candidate pool.
///
/// Tables are addressed by pool position. Each unordered table pair `(i, j)`
/// with `i < j` stores a row-major `cols(i) x cols(j)` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityGraph {
    table_names: Vec<String>,
    column_counts: Vec<usize>,
    matrices: BTreeMap<(usize, usize), Vec<f64>>,
}

impl CompatibilityGraph {
    /// Graph over explicit matrices, keyed by `(i, j)` with `i < j`.
    pub fn from_matrices(
        table_names: Vec<String>,
        column_counts: Vec<usize>,
        matrices: BTreeMap<(usize, usize), Vec<f64>>,
    ) -> Result<Self> {
        if table_names.len() != column_counts.len() {
            return Err(Error::Contract("table and column-count lists differ in length".into()));
        }
        for (&(i, j), m) in &matrices {
            if i >= j || j >= table_names.len() {
                return Err(Error::Contract(format!("bad table pair ({i}, {j})")));
            }
            if m.len() != column_counts[i] * column_counts[j] {
                return Err(Error::Contract(format!("matrix for ({i}, {j}) has the wrong size")));
            }
            if m.iter().any(|w| !(*w >= 0.0)) {
                return Err(Error::Contract(format!("negative or NaN omega for ({i}, {j})")));
            }
        }
        Ok(CompatibilityGraph {
            table_names,
            column_counts,
            matrices,
        })
    }

    pub fn table_count(&self) -> usize {
        self.table_names.len()
    }

    pub fn table_names(&self) -> &[String] {
        &self.table_names
    }

    pub fn column_count(&self, table: usize) -> usize {
        self.column_counts[table]
    }

    /// omega between column `k` of table `i` and column `l` of table `j`,
    /// in either argument order. Same-table pairs are 0.
    pub fn omega(&self, i: usize, k: usize, j: usize, l: usize) -> f64 {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Less => self.matrices.get(&(i, j)).map_or(0.0, |m| m[k * self.column_counts[j] + l]),
            Greater => self.omega(j, l, i, k),
            Equal => 0.0,
        }
    }

    /// Number of stored column-pair entries.
    pub fn entry_count(&self) -> usize {
        self.matrices.values().map(Vec::len).sum()
    }

    /// Highest omega between tables `i < j`; lower column indices win ties.
    pub fn best_pair(&self, i: usize, j: usize) -> Option<BestPair> {
        if i >= j {
            return None;
        }
        let m = self.matrices.get(&(i, j))?;
        let width = self.column_counts[j];
        let mut best: Option<BestPair> = None;
        for (idx, &w) in m.iter().enumerate() {
            if best.is_none_or(|b| w > b.omega) {
                best = Some(BestPair {
                    left_column: idx / width,
                    right_column: idx % width,
                    omega: w,
                });
            }
        }
        best
    }

    pub fn matrices(&self) -> &BTreeMap<(usize, usize), Vec<f64>> {
        &self.matrices
    }

    /// Multiply every stored entry by a non-negative `factor`.
    pub fn scaled(&self, factor: f64) -> CompatibilityGraph {
        let mut out = self.clone();
        for m in out.matrices.values_mut() {
            m.iter_mut().for_each(|w| *w *= factor);
        }
        out
    }

    /// Add `delta` to every stored entry.
    pub fn shifted(&self, delta: f64) -> CompatibilityGraph {
        let mut out = self.clone();
        for m in out.matrices.values_mut() {
            m.iter_mut().for_each(|w| *w = (*w + delta).max(0.0));
        }
        out
    }
}

/// Settings for graph construction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CompatibilityOptions {
    pub weights: SegmentWeights,
}

/// Score every cross-table column pair of the pool. Gold pairs are set to 1.
pub fn build_compatibility_graph(
    corpus: &TableCorpus,
    pool: &CandidatePool,
    profiles: &ProfileStore,
    provider: &EmbeddingProvider,
    options: &CompatibilityOptions,
    gold: Option<&GoldConstraintSet>,
    cache: Option<&mut OmegaCache>,
) -> Result<CompatibilityGraph> {
    options.weights.validate()?;
    let candidates = pool.candidates();
    let names: Vec<String> = candidates.iter().map(|c| c.name.clone()).collect();
    let counts: Vec<usize> = candidates
        .iter()
        .map(|c| corpus.tables()[c.table].columns().len())
        .collect();
    let column_profiles: Vec<&[ColumnProfile]> =
        candidates.iter().map(|c| profiles.table(c.table)).collect();

    let segment_vectors: Vec<Vec<SegmentVectors>> = column_profiles
        .par_iter()
        .map(|cols| cols.iter().map(|p| SegmentVectors::embed(provider, &p.text)).collect())
        .collect::<Result<_>>()?;

    let mut pairs = Vec::new();
    for i in 0..candidates.len() {
        for j in i + 1..candidates.len() {
            pairs.push((i, j));
        }
    }

    let cached = |i: usize, k: usize, j: usize, l: usize| {
        cache.as_deref().and_then(|c| {
            c.get(&column_key(&names[i], &column_profiles[i][k].text.header),
                  &column_key(&names[j], &column_profiles[j][l].text.header))
        })
    };
    let precomputed: HashMap<(usize, usize, usize, usize), f64> = if cache.is_some() {
        let counts = &counts;
        pairs
            .iter()
            .flat_map(|&(i, j)| (0..counts[i]).flat_map(move |k| (0..counts[j]).map(move |l| (i, k, j, l))))
            .filter_map(|(i, k, j, l)| cached(i, k, j, l).map(|w| ((i, k, j, l), w)))
            .collect()
    } else {
        HashMap::new()
    };

    let matrices: Vec<((usize, usize), Vec<f64>)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mut m = Vec::with_capacity(counts[i] * counts[j]);
            for k in 0..counts[i] {
                for l in 0..counts[j] {
                    let (a, b) = (&column_profiles[i][k], &column_profiles[j][l]);
                    let w = match precomputed.get(&(i, k, j, l)) {
                        Some(&w) => w,
                        None => {
                            let e = segment_vectors[i][k].similarity(&segment_vectors[j][l], &options.weights)?;
                            combine_omega(e, gated_jaccard(a, b), a.uniqueness, b.uniqueness)
                        }
                    };
                    m.push(w);
                }
            }
            Ok(((i, j), m))
        })
        .collect::<Result<_>>()?;

    let mut matrices: BTreeMap<(usize, usize), Vec<f64>> = matrices.into_iter().collect();

    if let Some(cache) = cache {
        for (&(i, j), m) in &matrices {
            for k in 0..counts[i] {
                for l in 0..counts[j] {
                    cache.insert(
                        &column_key(&names[i], &column_profiles[i][k].text.header),
                        &column_key(&names[j], &column_profiles[j][l].text.header),
                        m[k * counts[j] + l],
                    );
                }
            }
        }
    }

    if let Some(gold) = gold {
        for (&(i, j), m) in matrices.iter_mut() {
            for k in 0..counts[i] {
                for l in 0..counts[j] {
                    let a = ColumnRef::new(&names[i], &column_profiles[i][k].text.header);
                    let b = ColumnRef::new(&names[j], &column_profiles[j][l].text.header);
                    if gold.contains(&a, &b) {
                        m[k * counts[j] + l] = 1.0;
                    }
                }
            }
        }
    }

    CompatibilityGraph::from_matrices(names, counts, matrices)
}

fn column_key(table: &str, header: &str) -> String {
    text_hash(&format!("{table}\u{1f}{header}"))
}

/// Persisted omega values keyed by column hashes, valid for one corpus
/// content hash and one scoring fingerprint.
///
/// ```text
/// corpus=<hash> config=<fingerprint>
/// <hash(a)> <hash(b)> <omega>
/// ```
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OmegaCache {
    corpus_hash: String,
    fingerprint: String,
    entries: HashMap<(String, String), f64>,
}

impl OmegaCache {
    pub fn new(corpus_hash: impl Into<String>, fingerprint: impl Into<String>) -> Self {
        OmegaCache {
            corpus_hash: corpus_hash.into(),
            fingerprint: fingerprint.into(),
            entries: HashMap::new(),
        }
    }

    /// Load a cache file; a stale or missing file yields an empty cache.
    pub fn load(path: &Path, corpus_hash: &str, fingerprint: &str) -> Result<Self> {
        let mut cache = OmegaCache::new(corpus_hash, fingerprint);
        if !path.exists() {
            return Ok(cache);
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines().enumerate();
        let expected = cache.header();
        match lines.next() {
            Some((_, header)) if header == expected => {}
            _ => {
                log::info!("omega cache {} is stale; ignoring it", path.display());
                return Ok(cache);
            }
        }
        for (index, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [a, b, w] = fields[..] else {
                return Err(Error::parse(path.display(), index + 1, "expected `hash hash omega`"));
            };
            let w: f64 = w
                .parse()
                .map_err(|e| Error::parse(path.display(), index + 1, e))?;
            cache.insert(a, b, w);
        }
        Ok(cache)
    }

    fn header(&self) -> String {
        format!("corpus={} config={}", self.corpus_hash, self.fingerprint)
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        self.entries.get(&ordered(a, b)).copied()
    }

    pub fn insert(&mut self, a: &str, b: &str, omega: f64) {
        self.entries.insert(ordered(a, b), omega);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut rows: Vec<_> = self.entries.iter().collect();
        rows.sort_by(|x, y| x.0.cmp(y.0));
        let mut out = self.header();
        out.push('\n');
        for ((a, b), w) in rows {
            let _ = writeln!(out, "{a} {b} {w}");
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}
