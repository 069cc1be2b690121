use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use joinrank::corpus::{load_corpus, load_gold_constraints, CorpusFormat, ProfileStore, TableCorpus};
use joinrank::decompose::{escape_field, DecompositionCache};
use joinrank::harness::synthetic::{generate_suite, run_suite, write_suite, DEFAULT_SUITE_SEED, DEFAULT_SUITE_SIZE};
use joinrank::harness::{decomposer_from_config, emit_sql_prompt, provider_from_config, Config, EvalDataset, Pipeline};
use joinrank::mip::{build_model, write_lp};
use joinrank::relevance::load_base_scores;

#[derive(Parser)]
#[command(name = "joinrank", version, about = "Join-aware table retrieval re-ranking")]
struct Cli {
    /// Log level filter, e.g. warn, info, debug.
    #[arg(long, global = true, default_value = "warn")]
    log: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate and profile a corpus, writing the profile cache.
    Ingest {
        #[arg(long)]
        corpus: PathBuf,
        /// Output path for the profile cache.
        #[arg(long)]
        out: PathBuf,
    },
    /// Rerank the pool of one query and print its join plan.
    Rerank {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        query: String,
        /// Id used to look up base scores.
        #[arg(long, default_value = "q")]
        query_id: String,
        /// Also write the program in LP format.
        #[arg(long)]
        lp_out: Option<PathBuf>,
    },
    /// Evaluate a dataset and report precision, recall and F1 at each k.
    Eval {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        dataset: PathBuf,
        /// Write the summary here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write per-query rows as TSV.
        #[arg(long)]
        rows: Option<PathBuf>,
    },
    /// Write one text-to-SQL prompt per dataset query from its plan at the first k.
    EmitPrompts {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Generate the synthetic suite and evaluate it.
    Synth {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value_t = DEFAULT_SUITE_SIZE)]
        count: usize,
        #[arg(long, default_value_t = DEFAULT_SUITE_SEED)]
        seed: u64,
        /// Also write the generated databases here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cutoff; repeat for several.
    #[arg(long = "k")]
    ks: Vec<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    pool_size: Option<usize>,
    /// top-k or error.
    #[arg(long)]
    fallback_policy: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    gold_constraints: Option<PathBuf>,
    /// `query-id <TAB> table <TAB> score` lines from a base retriever.
    #[arg(long)]
    base_scores: Option<PathBuf>,
    #[arg(long)]
    decomp_cache: Option<PathBuf>,
}

impl Overrides {
    fn config(&self) -> Result<Config> {
        let mut config = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        if !self.ks.is_empty() {
            config.mip.ks = self.ks.clone();
        }
        if let Some(a) = self.alpha {
            config.mip.alpha = a;
        }
        if let Some(n) = self.pool_size {
            config.pool.size = n;
        }
        if let Some(p) = &self.fallback_policy {
            config.mip.fallback = p.clone();
        }
        config.validate()?;
        Ok(config)
    }
}

fn read_corpus(path: &Path) -> Result<TableCorpus> {
    load_corpus(path, CorpusFormat::detect(path)).with_context(|| format!("loading corpus {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

impl RunArgs {
    /// Config, corpus and pipeline. `queries` select which base-score lines
    /// are kept.
    fn pipeline(&self, corpus: TableCorpus, queries: &[(String, String)]) -> Result<Pipeline> {
        let config = self.overrides.config()?;
        let gold = self
            .gold_constraints
            .as_ref()
            .map(|p| load_gold_constraints(p, &corpus))
            .transpose()
            .context("gold constraints")?;
        let pools = self
            .base_scores
            .as_ref()
            .map(|p| load_base_scores(p, queries, &corpus, config.pool.size))
            .transpose()
            .context("base scores")?;
        let cache = match &self.decomp_cache {
            Some(p) => DecompositionCache::open(p)?,
            None => DecompositionCache::in_memory(),
        };
        let provider = provider_from_config(&config)?;
        let decomposer = decomposer_from_config(&config)?;
        let mut pipeline = Pipeline::new(config, corpus, provider, decomposer, cache)?;
        if let Some(gold) = gold {
            pipeline = pipeline.with_gold_constraints(gold);
        }
        if let Some(pools) = pools {
            pipeline = pipeline.with_base_pools(pools);
        }
        Ok(pipeline)
    }
}

fn dataset_queries(dataset: &EvalDataset) -> Vec<(String, String)> {
    dataset.queries.iter().map(|q| (q.id.clone(), q.question.clone())).collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { corpus, out } => {
            let corpus = read_corpus(&corpus)?;
            let profiles = ProfileStore::build(&corpus);
            write_text(&out, &serde_json::to_string(&profiles)?)?;
            let columns: usize = corpus.tables().iter().map(|t| t.columns().len()).sum();
            println!("tables\t{}\ncolumns\t{columns}\ncorpus_hash\t{}", corpus.len(), profiles.corpus_hash);
        }
        Command::Rerank {
            run,
            query,
            query_id,
            lp_out,
        } => {
            let corpus = read_corpus(&run.corpus)?;
            let pipeline = run.pipeline(corpus, &[(query_id.clone(), query.clone())])?;
            let k = pipeline.config.mip.ks[0];
            let prepared = pipeline.prepare(&query_id, &query)?;
            if let Some(path) = lp_out {
                write_text(&path, &write_lp(&build_model(&pipeline.instance(&prepared, k)?)))?;
            }
            let solved = pipeline.solve_prepared(&prepared, k)?;
            println!("{}", serde_json::to_string_pretty(&solved.plan)?);
        }
        Command::Eval {
            run,
            dataset,
            report,
            rows,
        } => {
            let corpus = read_corpus(&run.corpus)?;
            let dataset = EvalDataset::load(&dataset, &corpus)?;
            let pipeline = run.pipeline(corpus, &dataset_queries(&dataset))?;
            let result = pipeline.evaluate(&dataset)?;
            match report {
                Some(path) => write_text(&path, &result.render_text())?,
                None => print!("{}", result.render_text()),
            }
            if let Some(path) = rows {
                write_text(&path, &result.render_tsv())?;
            }
        }
        Command::EmitPrompts { run, dataset, out_dir } => {
            let corpus = read_corpus(&run.corpus)?;
            let dataset = EvalDataset::load(&dataset, &corpus)?;
            let pipeline = run.pipeline(corpus, &dataset_queries(&dataset))?;
            let k = pipeline.config.mip.ks[0];
            fs::create_dir_all(&out_dir)?;
            let mut failed = 0;
            for q in &dataset.queries {
                match pipeline.rerank_one(&q.id, &q.question, k) {
                    Ok(solved) => {
                        let prompt = emit_sql_prompt(
                            pipeline.corpus(),
                            &solved.plan,
                            &q.question,
                            q.external_knowledge.as_deref(),
                            pipeline.config.corpus.row_limit,
                        );
                        let name = escape_field(&q.id).replace(['/', '\\'], "_");
                        write_text(&out_dir.join(format!("{name}.txt")), &prompt)?;
                    }
                    Err(e) => {
                        failed += 1;
                        log::warn!("query {}: {e}", q.id);
                    }
                }
            }
            println!("prompts\t{}\nfailed\t{failed}", dataset.queries.len() - failed);
        }
        Command::Synth {
            overrides,
            count,
            seed,
            out_dir,
        } => {
            let config = overrides.config()?;
            if config.providers.embedding != "hashing" {
                bail!("the synthetic suite runs with the hashing embedding provider");
            }
            let provider = provider_from_config(&config)?;
            let suite = generate_suite(count, seed, &provider, &config)?;
            if let Some(dir) = out_dir {
                write_suite(&suite, &dir)?;
            }
            let outcome = run_suite(&suite, &config, || provider_from_config(&config))?;
            print!("{}", outcome.render_text());
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log).init();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
