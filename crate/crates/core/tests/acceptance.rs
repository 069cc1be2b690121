//! Acceptance suite. Prints one PASS, FAIL or SKIP line per criterion and
//! exits non-zero when any criterion fails.

use std::collections::{BTreeSet, VecDeque};
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use joinrank::compatibility::{
    build_compatibility_graph, combine_omega, instance_jaccard, omega, schema_similarity, CompatibilityOptions,
    SegmentWeights,
};
use joinrank::corpus::{
    load_corpus, profile_column, ColumnRef, ColumnText, ColumnType, CorpusFormat, GoldConstraintSet, ProfileStore,
    Table, TableCorpus,
};
use joinrank::decompose::{
    build_decomposition_prompt, parse_decomposition, DecompositionCache, DecompositionClient, DecompositionSource,
};
use joinrank::embedding::{EmbeddingProvider, HashingEncoder};
use joinrank::harness::synthetic::{generate_suite, run_suite, DEFAULT_SUITE_SEED, DEFAULT_SUITE_SIZE};
use joinrank::harness::{Config, EvalDataset, Pipeline, RetrievalReport};
use joinrank::mip::{oracle_solve, random_instance, solve, RandomInstanceSpec, RerankInstance, Selection, SolveOptions};
use joinrank::relevance::{load_base_scores, CandidatePool};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const RANDOM_INSTANCES: usize = 600;
const RANDOM_SEED: u64 = 7_001;
const FORMULA_TOLERANCE: f64 = 1e-9;
const REAL_DATA_ENV: &str = "JOINRANK_REALDATA_DIR";

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn provider() -> EmbeddingProvider {
    EmbeddingProvider::hashing(HashingEncoder::default())
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/running_example")
}

fn random_instances() -> Vec<RerankInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED);
    let spec = RandomInstanceSpec::default();
    (0..RANDOM_INSTANCES).map(|_| random_instance(&mut rng, &spec)).collect()
}

fn oracle_equivalence() -> Verdict {
    let limit = Duration::from_secs(120);
    let start = Instant::now();
    let options = SolveOptions::default();
    let mut mismatches = Vec::new();
    let (mut fallbacks, mut cross_checked) = (0, 0);
    let mut alphas = BTreeSet::new();
    let mut ks = BTreeSet::new();
    for (n, inst) in random_instances().iter().enumerate() {
        alphas.insert(inst.alpha().to_bits());
        ks.insert(inst.k());
        let solved = solve(inst, &options).expect("solve");
        let reference = oracle_solve(inst).expect("oracle");
        cross_checked += usize::from(solved.cross_checked);
        fallbacks += usize::from(reference.fallback);
        let same_value = inst.objective(&solved.selection) == inst.objective(&reference)
            && solved.plan.objective == inst.objective(&reference);
        if !same_value || solved.selection != reference {
            mismatches.push(n);
        }
    }
    let elapsed = start.elapsed();
    verdict(
        mismatches.is_empty() && elapsed <= limit && alphas.len() == 4 && ks.len() == 3,
        format!(
            "{RANDOM_INSTANCES} instances, {} mismatches {:?}, {fallbacks} fallbacks, {cross_checked} also confirmed by branch-and-bound, {} alphas, k in {ks:?}, {:.1}s of {}s",
            mismatches.len(),
            &mismatches[..mismatches.len().min(5)],
            alphas.len(),
            elapsed.as_secs_f64(),
            limit.as_secs()
        ),
    )
}

/// Breadth-first reachability over the selected tables.
fn bfs_connected(tables: &[usize], links: &[(usize, usize)]) -> bool {
    let Some(&root) = tables.first() else {
        return true;
    };
    let mut seen = BTreeSet::from([root]);
    let mut queue = VecDeque::from([root]);
    while let Some(t) = queue.pop_front() {
        for &(a, b) in links {
            let next = if a == t { b } else if b == t { a } else { continue };
            if tables.contains(&next) && seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    seen.len() == tables.len()
}

/// Edmonds-Karp on a dense capacity matrix.
fn max_flow(mut cap: Vec<Vec<u64>>, source: usize, sink: usize) -> u64 {
    let n = cap.len();
    let mut total = 0;
    loop {
        let mut parent = vec![usize::MAX; n];
        parent[source] = source;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if parent[v] == usize::MAX && cap[u][v] > 0 {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[sink] == usize::MAX {
            return total;
        }
        let mut push = u64::MAX;
        let mut v = sink;
        while v != source {
            push = push.min(cap[parent[v]][v]);
            v = parent[v];
        }
        let mut v = sink;
        while v != source {
            let u = parent[v];
            cap[u][v] -= push;
            cap[v][u] += push;
            v = u;
        }
        total += push;
    }
}

/// Flow network on the selected tables: source to `root` with capacity K,
/// every table to the sink with capacity 1, each chosen join with capacity
/// K in both directions.
fn selected_flow(tables: &[usize], links: &[(usize, usize)], root: usize) -> u64 {
    let k = tables.len() as u64;
    let (source, sink) = (tables.len(), tables.len() + 1);
    let mut cap = vec![vec![0; tables.len() + 2]; tables.len() + 2];
    let at = |t: usize| tables.iter().position(|&x| x == t).unwrap();
    cap[source][at(root)] = k;
    for row in cap.iter_mut().take(tables.len()) {
        row[sink] = 1;
    }
    for &(a, b) in links {
        cap[at(a)][at(b)] += k;
        cap[at(b)][at(a)] += k;
    }
    max_flow(cap, source, sink)
}

fn selection_violations(inst: &RerankInstance, selection: &Selection) -> Vec<String> {
    let mut out = Vec::new();
    let tables = &selection.tables;
    if tables.len() != inst.k() {
        out.push(format!("{} tables selected, K = {}", tables.len(), inst.k()));
    }
    if selection.edges.len() > inst.k().saturating_sub(1) {
        out.push(format!("{} joins for K = {}", selection.edges.len(), inst.k()));
    }
    let mut pairs = BTreeSet::new();
    for e in &selection.edges {
        if !tables.contains(&e.i) || !tables.contains(&e.j) {
            out.push(format!("join {}-{} leaves the selection", e.i, e.j));
        }
        if inst.omega(e.i, e.k, e.j, e.l) <= 0.0 {
            out.push(format!("join {}-{} has no positive compatibility", e.i, e.j));
        }
        if !pairs.insert((e.i.min(e.j), e.i.max(e.j))) {
            out.push(format!("table pair {}-{} joined twice", e.i, e.j));
        }
    }
    let links: Vec<(usize, usize)> = selection.edges.iter().map(|e| (e.i, e.j)).collect();
    if out.is_empty() {
        if !bfs_connected(tables, &links) {
            out.push("graph search finds the selection disconnected".into());
        }
        for &root in tables {
            let flow = selected_flow(tables, &links, root);
            if flow != inst.k() as u64 {
                out.push(format!("max flow from root {root} is {flow}, K = {}", inst.k()));
            }
        }
    }
    out
}

fn connectedness() -> Verdict {
    let options = SolveOptions::default();
    let (mut checked, mut violations) = (0, Vec::new());
    for (n, inst) in random_instances().iter().enumerate() {
        let solved = solve(inst, &options).expect("solve");
        if solved.selection.fallback {
            continue;
        }
        checked += 1;
        for v in selection_violations(inst, &solved.selection) {
            violations.push(format!("instance {n}: {v}"));
        }
    }
    verdict(
        violations.is_empty() && checked > 0,
        format!(
            "{checked} connected plans checked by graph search and max flow, {} violations {:?}",
            violations.len(),
            &violations[..violations.len().min(3)]
        ),
    )
}

fn table(name: &str, headers: &[(&str, ColumnType)], rows: &[&[&str]]) -> Table {
    let rows: Vec<Vec<&str>> = rows.iter().map(|r| r.to_vec()).collect();
    Table::from_rows(name, headers, &rows).unwrap()
}

struct Checks {
    failures: Vec<String>,
    count: usize,
}

impl Checks {
    fn close(&mut self, label: &str, got: f64, want: f64) {
        self.count += 1;
        if (got - want).abs() > FORMULA_TOLERANCE {
            self.failures.push(format!("{label}: got {got}, want {want}"));
        }
    }

    fn holds(&mut self, label: &str, ok: bool) {
        self.count += 1;
        if !ok {
            self.failures.push(label.to_string());
        }
    }
}

fn formulas() -> Verdict {
    use ColumnType::{Integer, Text};
    let mut c = Checks {
        failures: Vec::new(),
        count: 0,
    };
    let p = provider();
    let weights = SegmentWeights::default();

    let left = table("left", &[("v", Integer)], &[&["1"], &["2"], &["3"]]);
    let right = table("right", &[("v", Integer)], &[&["2"], &["3"], &["4"]]);
    let (a, b) = (profile_column(&left, 0), profile_column(&right, 0));
    c.close("jaccard of {1,2,3} and {2,3,4}", instance_jaccard(&a, &b), 0.5);
    c.close("jaccard of a column with itself", instance_jaccard(&a, &a), 1.0);

    let students = table(
        "students",
        &[("student_id", Integer), ("city", Text)],
        &[&["1", "BOS"], &["2", "BOS"]],
    );
    let teachers = table(
        "teachers",
        &[("teacher_id", Integer), ("student_id", Integer), ("city", Text)],
        &[&["1", "1", "BOS"], &["2", "1", "BOS"], &["2", "2", "BOS"]],
    );
    let (s_id, s_city) = (profile_column(&students, 0), profile_column(&students, 1));
    let (t_id, t_city) = (profile_column(&teachers, 1), profile_column(&teachers, 2));
    c.close("city jaccard", instance_jaccard(&s_city, &t_city), 1.0);
    c.close("student_id jaccard", instance_jaccard(&s_id, &t_id), 1.0);
    c.close("uniqueness of the first city column", s_city.uniqueness, 0.5);
    c.close("uniqueness of the second city column", t_city.uniqueness, 1.0 / 3.0);
    c.close("city key factor", s_city.uniqueness.max(t_city.uniqueness), 0.5);
    c.close("student_id key factor", s_id.uniqueness.max(t_id.uniqueness), 1.0);
    let e_city = schema_similarity(&p, &s_city.text, &t_city.text, &weights).unwrap();
    let e_id = schema_similarity(&p, &s_id.text, &t_id.text, &weights).unwrap();
    let w_city = omega(&p, &s_city, &t_city, &weights).unwrap();
    let w_id = omega(&p, &s_id, &t_id, &weights).unwrap();
    c.close("city omega", w_city, (e_city + 1.0) * 0.5);
    c.close("student_id omega", w_id, e_id + 1.0);
    c.holds("student_id join outranks the city join", w_id > w_city);
    for sum in [0.1, 0.5, 1.0, 1.5, 2.0] {
        let by_key = combine_omega(sum, 0.0, s_id.uniqueness, t_id.uniqueness);
        let by_city = combine_omega(sum, 0.0, s_city.uniqueness, t_city.uniqueness);
        c.holds(&format!("equal e + j = {sum}: key join outranks city join"), by_key > by_city);
    }

    c.close("omega arithmetic", combine_omega(0.8, 0.5, 1.0, 0.5), 1.3);
    c.close("omega with zero uniqueness", combine_omega(0.8, 0.5, 0.0, 0.0), 0.0);

    let text = |h: &str, t: &str, o: &str| ColumnText {
        header: h.into(),
        table: t.into(),
        others: o.into(),
    };
    let x = text("account_id", "loan", "loan_id, amount");
    c.close("identical columns", schema_similarity(&p, &x, &x, &weights).unwrap(), 1.0);
    let y = text("account", "disposition", "disp_id, client_id");
    let header_only = SegmentWeights::new(1.0, 0.0, 0.0).unwrap();
    c.close(
        "header-only weights",
        schema_similarity(&p, &x, &y, &header_only).unwrap(),
        p.similarity(&x.header, &y.header).unwrap(),
    );
    for (h, t) in [("account_id", "loan"), ("amount", "loan"), ("id", "card")] {
        let bare = text(h, t, "");
        let e = schema_similarity(&p, &x, &bare, &weights).unwrap();
        c.holds(&format!("empty other-columns segment bounds e ({e})"), e <= 0.75 + FORMULA_TOLERANCE);
    }

    let corpus = TableCorpus::new(vec![
        table(
            "three",
            &[("a_id", Integer), ("name", Text), ("city", Text)],
            &[&["1", "x", "BOS"], &["2", "y", "NYC"]],
        ),
        table(
            "four",
            &[("b_id", Integer), ("a_id", Integer), ("note", Text), ("when", Text)],
            &[&["7", "1", "n", "mon"], &["8", "2", "m", "tue"]],
        ),
    ])
    .unwrap();
    let profiles = ProfileStore::build(&corpus);
    let options = CompatibilityOptions::default();
    let pool = CandidatePool::from_scores(&corpus, "q", "q", &[("three", 0.5), ("four", 0.4)], 20).unwrap();
    let graph = build_compatibility_graph(&corpus, &pool, &profiles, &p, &options, None, None).unwrap();
    c.holds("3 x 4 columns give 12 entries", graph.entry_count() == 12);
    let mut gold = GoldConstraintSet::default();
    gold.insert(ColumnRef::new("three", "name"), ColumnRef::new("four", "note"));
    let gold_graph = build_compatibility_graph(&corpus, &pool, &profiles, &p, &options, Some(&gold), None).unwrap();
    let (i, j) = (pool.candidates().iter().position(|c| c.name == "three").unwrap(), pool.candidates().iter().position(|c| c.name == "four").unwrap());
    c.close("gold pair omega", gold_graph.omega(i, 1, j, 2), 1.0);
    c.close("gold pair omega reversed", gold_graph.omega(j, 2, i, 1), 1.0);
    let single = CandidatePool::from_scores(&corpus, "q", "q", &[("three", 0.5)], 20).unwrap();
    let empty = build_compatibility_graph(&corpus, &single, &profiles, &p, &options, None, None).unwrap();
    c.holds("one-table pool gives an empty graph", empty.entry_count() == 0);

    verdict(
        c.failures.is_empty(),
        format!("{} checks at tolerance {FORMULA_TOLERANCE:e}, failures {:?}", c.count, c.failures),
    )
}

/// Macro F1 at `k` recomputed from the report rows.
fn recount_macro_f1(report: &RetrievalReport, k: usize, reranked: bool) -> f64 {
    let rows: Vec<_> = report.rows.iter().filter(|r| r.k == k).collect();
    let total: f64 = rows
        .iter()
        .map(|r| {
            let list = if reranked { &r.predicted } else { &r.baseline };
            let hits = list.iter().collect::<BTreeSet<_>>().iter().filter(|t| r.gold.contains(**t)).count() as f64;
            let (p, rc) = (hits / k as f64, hits / r.gold.len() as f64);
            if p + rc == 0.0 {
                0.0
            } else {
                2.0 * p * rc / (p + rc)
            }
        })
        .sum();
    total / rows.len() as f64
}

fn synthetic_gain() -> Verdict {
    let limit = Duration::from_secs(300);
    let start = Instant::now();
    let mut config = Config::default();
    config.mip.ks = vec![2];
    let suite = generate_suite(DEFAULT_SUITE_SIZE, DEFAULT_SUITE_SEED, &provider(), &config).expect("suite");
    let outcome = run_suite(&suite, &config, || Ok(provider())).expect("run");

    let mut separated = 0;
    let mut decoy_sets = 0;
    for db in &suite.databases {
        let cache = DecompositionCache::in_memory();
        cache.insert_decomposition(&db.decomposition).unwrap();
        let pool = db.pool(config.pool.size).unwrap();
        let pipeline = Pipeline::new(config.clone(), db.corpus.clone(), provider(), DecompositionClient::CacheOnly, cache)
            .unwrap()
            .with_base_pools(vec![pool.clone()]);
        let prepared = pipeline.prepare(&db.query.id, &db.query.question).unwrap();
        if !db.separation_holds(&prepared.pool, &prepared.graph) {
            continue;
        }
        separated += 1;
        let row = outcome.report.rows.iter().find(|r| r.query_id == db.query.id && r.k == 2).unwrap();
        if !row.fallback && db.decoys.iter().all(|d| row.predicted.contains(d)) {
            decoy_sets += 1;
        }
    }
    let reranked = recount_macro_f1(&outcome.report, 2, true);
    let base = recount_macro_f1(&outcome.report, 2, false);
    let summary = outcome.report.summary(2);
    let consistent = (summary.reranked_macro.f1 - reranked).abs() < 1e-9 && (summary.base_macro.f1 - base).abs() < 1e-9;
    let gain = reranked - base;
    let elapsed = start.elapsed();
    verdict(
        suite.databases.len() >= 50
            && gain >= 0.10
            && decoy_sets == 0
            && outcome.decoy_set_selections == 0
            && consistent
            && elapsed <= limit,
        format!(
            "{} databases, macro F1@2 {reranked:.4} vs base {base:.4} (gain {gain:.4}, need 0.10), {separated} with separated compatibility, {decoy_sets} decoy sets chosen, {} fallbacks, {:.1}s of {}s",
            suite.databases.len(),
            summary.fallbacks,
            elapsed.as_secs_f64(),
            limit.as_secs()
        ),
    )
}

fn decomposition_goldens() -> Verdict {
    let fixture = include_str!("fixtures/decomposition_prompt.txt").trim_end_matches('\n');
    let mut failures = Vec::new();
    let query = "Which stations are busiest?";
    let prompt = build_decomposition_prompt(query);
    if prompt != format!("{fixture} {query}\n\nAnswer:") {
        failures.push("prompt differs from the golden template".to_string());
    }
    if build_decomposition_prompt(query) != prompt {
        failures.push("prompt is not deterministic".into());
    }

    let expected: [&[(Option<&str>, &str)]; 5] = [
        &[(Some("movies"), "keyword"), (Some("movies"), "revenue")],
        &[(Some("customers"), "credit limit"), (Some("customers"), "payment amount"), (None, "year")],
        &[(Some("aircraft"), "name"), (Some("flight"), "number")],
        &[(None, "zip code"), (None, "weather")],
        &[(Some("trip"), "id"), (Some("station"), "dock count")],
    ];
    let answers: Vec<&str> = fixture
        .split("Answer:\n")
        .skip(1)
        .map(|block| &block[..block.find("<FIN></FIN>").unwrap() + "<FIN></FIN>".len()])
        .collect();
    if answers.len() != 5 {
        failures.push(format!("{} answer blocks in the golden template", answers.len()));
    }
    for (n, (answer, want)) in answers.iter().zip(expected).enumerate() {
        let parsed = parse_decomposition("q", answer, DecompositionSource::Llm);
        let got: Vec<(Option<&str>, &str)> =
            parsed.sub_queries().iter().map(|s| (s.concept.as_deref(), s.attribute.as_str())).collect();
        if got != want {
            failures.push(format!("example {}: {got:?}", n + 1));
        }
    }
    let trailing = parse_decomposition("q", "<sub_c>a:b</sub_c><FIN></FIN><sub_c>c:d</sub_c>", DecompositionSource::Llm);
    if trailing.len() != 1 {
        failures.push("tags after the end marker were parsed".into());
    }
    verdict(failures.is_empty(), format!("5 examples and the prompt layout, failures {failures:?}"))
}

fn real_data() -> Verdict {
    let Ok(dir) = std::env::var(REAL_DATA_ENV) else {
        return Verdict::Skip(format!("{REAL_DATA_ENV} is not set"));
    };
    let dir = PathBuf::from(dir);
    let needed = ["corpus.json", "dataset.json", "base_scores.tsv", "decompositions.tsv", "vectors.txt"];
    if let Some(missing) = needed.iter().find(|f| !dir.join(f).exists()) {
        return Verdict::Skip(format!("{} is missing", dir.join(missing).display()));
    }
    let mut config = Config::default();
    config.mip.ks = vec![2];
    config.providers.embedding = "precomputed".into();
    config.providers.embedding_store = Some(dir.join("vectors.txt"));
    let corpus = load_corpus(&dir.join("corpus.json"), CorpusFormat::Json).expect("corpus");
    let dataset = EvalDataset::load(&dir.join("dataset.json"), &corpus).expect("dataset");
    let queries: Vec<(String, String)> = dataset.queries.iter().map(|q| (q.id.clone(), q.question.clone())).collect();
    let pools = load_base_scores(&dir.join("base_scores.tsv"), &queries, &corpus, config.pool.size).expect("scores");
    let cache = DecompositionCache::open(&dir.join("decompositions.tsv")).expect("cache");
    let provider = joinrank::harness::provider_from_config(&config).expect("vectors");
    let report = Pipeline::new(config, corpus, provider, DecompositionClient::CacheOnly, cache)
        .expect("pipeline")
        .with_base_pools(pools)
        .evaluate(&dataset)
        .expect("evaluate");
    let s = report.summary(2);
    verdict(
        s.reranked_macro.f1 > s.base_macro.f1,
        format!(
            "{} multi-table queries, F1@2 {:.4} vs base {:.4}, {} failures",
            s.queries, s.reranked_macro.f1, s.base_macro.f1, s.failures
        ),
    )
}

fn run_eval_cli(out: &Path, tag: &str) -> (Vec<u8>, Vec<u8>) {
    let (report, rows) = (out.join(format!("{tag}.txt")), out.join(format!("{tag}.tsv")));
    let arg = |p: &Path| p.to_str().unwrap().to_string();
    let status = Command::new(env!("CARGO_BIN_EXE_joinrank"))
        .args(["eval", "--corpus", &arg(&data_dir().join("corpus.json"))])
        .args(["--dataset", &arg(&data_dir().join("dataset.json"))])
        .args(["--base-scores", &arg(&data_dir().join("base_scores.tsv"))])
        .args(["--decomp-cache", &arg(&data_dir().join("decompositions.tsv"))])
        .args(["--k", "1", "--k", "2", "--k", "3", "--k", "5"])
        .args(["--report", &arg(&report), "--rows", &arg(&rows)])
        .status()
        .expect("spawn");
    assert!(status.success(), "eval exited with {status}");
    (std::fs::read(report).unwrap(), std::fs::read(rows).unwrap())
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let first = run_eval_cli(dir.path(), "a");
    let second = run_eval_cli(dir.path(), "b");

    let mut config = Config::default();
    config.mip.ks = vec![2, 3];
    let suite = generate_suite(8, 3, &provider(), &config).unwrap();
    let a = run_suite(&suite, &config, || Ok(provider())).unwrap();
    let b = run_suite(&suite, &config, || Ok(provider())).unwrap();
    let suite_same = a.render_text() == b.render_text() && a.report.render_tsv() == b.report.render_tsv();

    verdict(
        first == second && suite_same && !first.0.is_empty(),
        format!(
            "cli reports identical: {}, row tables identical: {}, synthetic reports identical: {suite_same}",
            first.0 == second.0,
            first.1 == second.1
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 7] = [
        ("oracle equivalence", oracle_equivalence),
        ("connectedness", connectedness),
        ("formula suite", formulas),
        ("synthetic retrieval gain", synthetic_gain),
        ("decomposition goldens", decomposition_goldens),
        ("real-data direction", real_data),
        ("determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let message = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Verdict::Fail(format!("panicked: {message}"))
        });
        let (label, detail) = match outcome {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Verdict::Skip(d) => ("SKIP", d),
        };
        println!("{label} {} {name}: {detail} [{:.1}s]", n + 1, start.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
