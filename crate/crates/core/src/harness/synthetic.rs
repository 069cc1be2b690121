//! Generated retrieval suite. Every database holds a three-table chain
//! that answers its query through key joins, plus two decoy tables the base
//! ranking scores highest but that share no values or schema vocabulary with
//! anything else, so they cannot be joined.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::Config;
use super::dataset::{EvalDataset, EvalQuery};
use super::pipeline::Pipeline;
use super::report::{QueryRow, RetrievalReport};
use crate::compatibility::{build_compatibility_graph, CompatibilityGraph, CompatibilityOptions};
use crate::corpus::{corpus_to_json, ColumnType, ProfileStore, Table, TableCorpus};
use crate::decompose::{DecompositionCache, DecompositionClient, DecompositionSource, QueryDecomposition, SubQuery};
use crate::embedding::EmbeddingProvider;
use crate::error::{Error, Result};
use crate::relevance::CandidatePool;

pub const DEFAULT_SUITE_SIZE: usize = 60;
pub const DEFAULT_SUITE_SEED: u64 = 20_240_601;
const MAX_ATTEMPTS: usize = 200;

/// Entity, link and second entity of a chain, with attributes for the
/// entities.
struct Theme {
    left: &'static str,
    left_attrs: [&'static str; 2],
    link: &'static str,
    right: &'static str,
    right_attrs: [&'static str; 2],
}

const THEMES: [Theme; 10] = [
    Theme { left: "client", left_attrs: ["gender", "district"], link: "disp", right: "loan", right_attrs: ["amount", "duration"] },
    Theme { left: "student", left_attrs: ["major", "city"], link: "enrollment", right: "course", right_attrs: ["title", "credits"] },
    Theme { left: "customer", left_attrs: ["segment", "country"], link: "orders", right: "product", right_attrs: ["price", "category"] },
    Theme { left: "author", left_attrs: ["nationality", "born"], link: "writes", right: "book", right_attrs: ["genre", "pages"] },
    Theme { left: "patient", left_attrs: ["sex", "age"], link: "visit", right: "doctor", right_attrs: ["specialty", "hospital"] },
    Theme { left: "player", left_attrs: ["position", "height"], link: "roster", right: "team", right_attrs: ["league", "founded"] },
    Theme { left: "employee", left_attrs: ["salary", "title"], link: "assignment", right: "project", right_attrs: ["budget", "deadline"] },
    Theme { left: "singer", left_attrs: ["nation", "genre"], link: "performance", right: "concert", right_attrs: ["venue", "theme"] },
    Theme { left: "member", left_attrs: ["tier", "region"], link: "booking", right: "flight", right_attrs: ["origin", "destination"] },
    Theme { left: "farmer", left_attrs: ["county", "acres"], link: "harvest", right: "crop", right_attrs: ["season", "yield"] },
];

/// Decoy vocabularies use disjoint letter sets, and none of the gold
/// vocabulary's trigrams, so only hash collisions can relate them.
const DECOY_ALPHABETS: [&[u8]; 2] = [b"qxzj", b"vwky"];

#[derive(Debug, Clone)]
pub struct SyntheticDatabase {
    pub corpus: TableCorpus,
    pub query: EvalQuery,
    pub decomposition: QueryDecomposition,
    /// `(table, base score)`; the decoys hold the highest score.
    pub base_scores: Vec<(String, f64)>,
    /// Chain order: left entity, link, right entity.
    pub gold_chain: [String; 3],
    pub decoys: [String; 2],
}

impl SyntheticDatabase {
    pub fn pool(&self, pool_size: usize) -> Result<CandidatePool> {
        let scores: Vec<(&str, f64)> = self.base_scores.iter().map(|(n, s)| (n.as_str(), *s)).collect();
        CandidatePool::from_scores(&self.corpus, &self.query.id, &self.query.question, &scores, pool_size)
    }

    /// Whether the chain edges are positive and every decoy edge is zero
    /// under `graph`, which must follow the order of [`Self::pool`].
    pub fn separation_holds(&self, pool: &CandidatePool, graph: &CompatibilityGraph) -> bool {
        let index = |name: &str| pool.candidates().iter().position(|c| c.name == name);
        let (Some(a), Some(b), Some(c)) = (index(&self.gold_chain[0]), index(&self.gold_chain[1]), index(&self.gold_chain[2]))
        else {
            return false;
        };
        let positive = |i: usize, j: usize| graph.best_pair(i.min(j), i.max(j)).is_some_and(|p| p.omega > 0.0);
        if !positive(a, b) || !positive(b, c) {
            return false;
        }
        let decoys: Vec<usize> = self.decoys.iter().filter_map(|d| index(d)).collect();
        graph
            .matrices()
            .iter()
            .filter(|((i, j), _)| decoys.contains(i) || decoys.contains(j))
            .all(|(_, m)| m.iter().all(|&w| w == 0.0))
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticSuite {
    pub databases: Vec<SyntheticDatabase>,
}

fn pseudo_word<R: Rng>(rng: &mut R, alphabet: &[u8], min_len: usize, max_len: usize) -> String {
    let len = rng.random_range(min_len..=max_len);
    (0..len).map(|_| *alphabet.choose(rng).expect("non-empty alphabet") as char).collect()
}

fn int_column(header: &str, values: impl IntoIterator<Item = u32>) -> (String, ColumnType, Vec<String>) {
    (header.to_string(), ColumnType::Integer, values.into_iter().map(|v| v.to_string()).collect())
}

fn text_column(header: &str, values: Vec<String>) -> (String, ColumnType, Vec<String>) {
    (header.to_string(), ColumnType::Text, values)
}

fn table(name: &str, columns: Vec<(String, ColumnType, Vec<String>)>) -> Result<Table> {
    Table::new(
        name,
        columns
            .into_iter()
            .map(|(h, t, v)| crate::corpus::Column::new(h, t, v))
            .collect(),
    )
}

fn attribute_values<R: Rng>(rng: &mut R, attr: &str, rows: usize) -> Vec<String> {
    let pool: Vec<String> = (0..4).map(|i| format!("{attr} {}", ["alpha", "beta", "gamma", "delta"][i])).collect();
    (0..rows).map(|_| pool.choose(rng).expect("non-empty").clone()).collect()
}

fn draw_database<R: Rng>(rng: &mut R, index: usize) -> Result<SyntheticDatabase> {
    let theme = &THEMES[rng.random_range(0..THEMES.len())];
    let left_key = format!("{}_id", theme.left);
    let right_key = format!("{}_id", theme.right);
    let link_key = format!("{}_id", theme.link);

    let left_rows = rng.random_range(6..=10);
    let right_rows = rng.random_range(6..=10);
    let link_rows = rng.random_range(8..=14);
    let left_base = rng.random_range(1..50) * 10;
    let right_base = rng.random_range(1..50) * 10 + 500;
    let left_ids: Vec<u32> = (0..left_rows).map(|i| left_base + i).collect();
    let right_ids: Vec<u32> = (0..right_rows).map(|i| right_base + i).collect();

    let left = table(
        theme.left,
        vec![
            int_column(&left_key, left_ids.clone()),
            text_column(theme.left_attrs[0], attribute_values(rng, theme.left_attrs[0], left_rows as usize)),
            text_column(theme.left_attrs[1], attribute_values(rng, theme.left_attrs[1], left_rows as usize)),
        ],
    )?;
    let right = table(
        theme.right,
        vec![
            int_column(&right_key, right_ids.clone()),
            text_column(theme.right_attrs[0], attribute_values(rng, theme.right_attrs[0], right_rows as usize)),
            text_column(theme.right_attrs[1], attribute_values(rng, theme.right_attrs[1], right_rows as usize)),
        ],
    )?;
    let link = table(
        theme.link,
        vec![
            int_column(&link_key, (0..link_rows).map(|i| 9000 + i)),
            int_column(&left_key, (0..link_rows).map(|_| *left_ids.choose(rng).expect("ids"))),
            int_column(&right_key, (0..link_rows).map(|_| *right_ids.choose(rng).expect("ids"))),
        ],
    )?;

    let mut decoy_tables = Vec::new();
    let mut decoy_names = Vec::new();
    for alphabet in DECOY_ALPHABETS {
        let name = pseudo_word(rng, alphabet, 5, 7);
        let rows = rng.random_range(5..=8);
        let columns = (0..2)
            .map(|_| {
                let header = pseudo_word(rng, alphabet, 4, 6);
                let values = (0..rows).map(|_| pseudo_word(rng, alphabet, 6, 6)).collect();
                text_column(&header, values)
            })
            .collect();
        decoy_tables.push(table(&name, columns)?);
        decoy_names.push(name);
    }
    if decoy_names[0] == decoy_names[1] {
        return Err(Error::Corpus("decoy names collide".into()));
    }

    let gold_chain = [theme.left.to_string(), theme.link.to_string(), theme.right.to_string()];
    let mut tables = vec![left, link, right];
    tables.extend(decoy_tables);
    let corpus = TableCorpus::new(tables)?;

    let query = EvalQuery {
        id: format!("syn{index:03}"),
        question: format!(
            "What is the {} of each {} with a {} and the {} of that {}?",
            theme.left_attrs[0], theme.left, theme.link, theme.right_attrs[0], theme.right
        ),
        gold_tables: gold_chain.iter().cloned().collect(),
        external_knowledge: None,
    };
    let subs = [
        format!("{}:{}", theme.left, theme.left_attrs[0]),
        format!("{}:{}", theme.right, theme.right_attrs[0]),
    ]
    .iter()
    .filter_map(|t| SubQuery::from_tag(t))
    .collect();
    let decomposition = QueryDecomposition::new(query.question.clone(), subs, DecompositionSource::Manual);

    // Decoys always lead; in some databases one chain table sits between them.
    let mut gold_scores = [0.6, 0.55, 0.5];
    gold_scores.shuffle(rng);
    let mut base_scores = vec![(decoy_names[0].clone(), 0.9), (decoy_names[1].clone(), 0.85)];
    if rng.random_bool(0.5) {
        base_scores[1].1 = 0.7;
        gold_scores[0] = 0.8;
    }
    base_scores.extend(gold_chain.iter().cloned().zip(gold_scores));

    Ok(SyntheticDatabase {
        corpus,
        query,
        decomposition,
        base_scores,
        gold_chain,
        decoys: [decoy_names[0].clone(), decoy_names[1].clone()],
    })
}

/// `count` databases from `seed`. Draws whose compatibility graph relates a
/// decoy to anything, or leaves a chain edge at zero, are rejected and
/// redrawn; `provider` and `config` must match the evaluation settings.
pub fn generate_suite(count: usize, seed: u64, provider: &EmbeddingProvider, config: &Config) -> Result<SyntheticSuite> {
    let options = CompatibilityOptions {
        weights: config.segment_weights()?,
    };
    let mut databases = Vec::with_capacity(count);
    for index in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut accepted = None;
        for _ in 0..MAX_ATTEMPTS {
            let Ok(db) = draw_database(&mut rng, index) else { continue };
            let pool = db.pool(config.pool.size)?;
            let profiles = ProfileStore::build(&db.corpus);
            let graph = build_compatibility_graph(&db.corpus, &pool, &profiles, provider, &options, None, None)?;
            if db.separation_holds(&pool, &graph) {
                accepted = Some(db);
                break;
            }
        }
        databases.push(accepted.ok_or_else(|| {
            Error::Corpus(format!("no separable draw for synthetic database {index} in {MAX_ATTEMPTS} attempts"))
        })?);
    }
    Ok(SyntheticSuite { databases })
}

/// Suite evaluation with decoy counts.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub report: RetrievalReport,
    /// Connected plans containing both decoys. Fallback plans are counted
    /// in the report instead, since they ignore joinability by definition.
    pub decoy_set_selections: usize,
    /// Connected plans containing at least one decoy.
    pub decoy_table_selections: usize,
}

impl SuiteOutcome {
    pub fn render_text(&self) -> String {
        let mut out = self.report.render_text();
        let _ = writeln!(out, "\ndecoy set in connected plans    {}", self.decoy_set_selections);
        let _ = writeln!(out, "decoy table in connected plans  {}", self.decoy_table_selections);
        out
    }
}

/// Evaluate every database with its own corpus, base pool and manual
/// decomposition, and merge the rows into one report.
pub fn run_suite(suite: &SyntheticSuite, config: &Config, provider_for: impl Fn() -> Result<EmbeddingProvider> + Sync) -> Result<SuiteOutcome> {
    let per_db: Vec<(Vec<QueryRow>, usize, usize)> = suite
        .databases
        .par_iter()
        .map(|db| {
            let cache = DecompositionCache::in_memory();
            cache.insert_decomposition(&db.decomposition)?;
            let pipeline = Pipeline::new(config.clone(), db.corpus.clone(), provider_for()?, DecompositionClient::CacheOnly, cache)?
                .with_base_pools(vec![db.pool(config.pool.size)?]);
            let dataset = EvalDataset::from_queries(vec![db.query.clone()], &db.corpus)?;
            let report = pipeline.evaluate(&dataset)?;
            let decoys: BTreeSet<&String> = db.decoys.iter().collect();
            let hits = |r: &QueryRow| r.predicted.iter().filter(|t| decoys.contains(t)).count();
            let connected = || report.rows.iter().filter(|r| !r.fallback);
            let sets = connected().filter(|r| hits(r) == decoys.len()).count();
            let tables = connected().filter(|r| hits(r) > 0).count();
            Ok((report.rows, sets, tables))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let (mut sets, mut tables) = (0, 0);
    for (r, s, t) in per_db {
        rows.extend(r);
        sets += s;
        tables += t;
    }
    Ok(SuiteOutcome {
        report: RetrievalReport::new(config.mip.ks.clone(), config.mip.alpha, config.pool.size, rows, Vec::new()),
        decoy_set_selections: sets,
        decoy_table_selections: tables,
    })
}

/// Write each database as `dir/<query id>/` holding `corpus.json`,
/// `dataset.json`, `queries.tsv`, `base_scores.tsv` and `decompositions.tsv`.
pub fn write_suite(suite: &SyntheticSuite, dir: &Path) -> Result<()> {
    for db in &suite.databases {
        let sub = dir.join(&db.query.id);
        fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
        let dataset = EvalDataset {
            queries: vec![db.query.clone()],
            skipped: Vec::new(),
        };
        let cache = DecompositionCache::in_memory();
        cache.insert_decomposition(&db.decomposition)?;
        let mut scores = String::new();
        for (t, s) in &db.base_scores {
            let _ = writeln!(scores, "{}\t{t}\t{s}", db.query.id);
        }
        let files = [
            ("corpus.json", corpus_to_json(&db.corpus)),
            ("dataset.json", dataset.to_json()),
            (
                "queries.tsv",
                format!("{}\t{}\n", db.query.id, crate::decompose::escape_field(&db.query.question)),
            ),
            ("base_scores.tsv", scores),
            ("decompositions.tsv", cache.to_text()),
        ];
        for (name, text) in files {
            let path = sub.join(name);
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::HashingEncoder;

    fn provider() -> Result<EmbeddingProvider> {
        Ok(EmbeddingProvider::hashing(HashingEncoder::default()))
    }

    #[test]
    fn generation_is_deterministic_and_separable() {
        let config = Config::default();
        let p = provider().unwrap();
        let a = generate_suite(4, 7, &p, &config).unwrap();
        let b = generate_suite(4, 7, &p, &config).unwrap();
        for (x, y) in a.databases.iter().zip(&b.databases) {
            assert_eq!(x.corpus, y.corpus);
            assert_eq!(x.base_scores, y.base_scores);
            assert_eq!(x.corpus.len(), 5);
            let top = x.pool(20).unwrap().top_k_names(1);
            assert!(x.decoys.contains(&top[0]));
        }
    }

    #[test]
    fn reranking_avoids_decoys() {
        let mut config = Config::default();
        config.mip.ks = vec![2, 3];
        let suite = generate_suite(6, 11, &provider().unwrap(), &config).unwrap();
        let outcome = run_suite(&suite, &config, provider).unwrap();
        assert_eq!(outcome.decoy_table_selections, 0);
        let s2 = outcome.report.summary(2);
        assert_eq!(s2.failures, 0);
        assert!((s2.reranked_macro.f1 - 0.8).abs() < 1e-12);
        assert!(s2.base_macro.f1 < 0.5);
        assert!((outcome.report.summary(3).reranked_macro.f1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn written_suite_loads_back() {
        let config = Config::default();
        let suite = generate_suite(2, 3, &provider().unwrap(), &config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_suite(&suite, dir.path()).unwrap();
        let db = &suite.databases[1];
        let sub = dir.path().join(&db.query.id);
        let corpus = crate::corpus::load_corpus(&sub.join("corpus.json"), crate::corpus::CorpusFormat::Json).unwrap();
        assert_eq!(corpus, db.corpus);
        let dataset = EvalDataset::load(&sub.join("dataset.json"), &corpus).unwrap();
        assert_eq!(dataset.queries[0], db.query);
        let cache = DecompositionCache::open(&sub.join("decompositions.tsv")).unwrap();
        assert_eq!(cache.get(&db.query.question).unwrap().sub_queries(), db.decomposition.sub_queries());
    }
}
