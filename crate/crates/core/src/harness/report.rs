use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::metrics::{macro_average, micro_average, score, Prf};
use crate::decompose::escape_field;

/// One query at one cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryRow {
    pub query_id: String,
    pub k: usize,
    pub gold: BTreeSet<String>,
    /// Plan tables; empty when the query failed.
    pub predicted: Vec<String>,
    /// First `k` tables of the base ranking.
    pub baseline: Vec<String>,
    pub fallback: bool,
    pub objective: Option<f64>,
    pub error: Option<String>,
}

impl QueryRow {
    pub fn reranked(&self) -> Prf {
        score(&self.predicted, &self.gold, self.k)
    }

    pub fn base(&self) -> Prf {
        score(&self.baseline, &self.gold, self.k)
    }

    fn counts(&self, predicted: &[String]) -> (usize, usize, usize) {
        (super::metrics::hits(predicted, &self.gold), self.k, self.gold.len())
    }
}

/// Aggregate scores at one cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffSummary {
    pub k: usize,
    pub queries: usize,
    pub reranked_macro: Prf,
    pub reranked_micro: Prf,
    pub base_macro: Prf,
    pub base_micro: Prf,
    pub fallbacks: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalReport {
    pub ks: Vec<usize>,
    pub alpha: f64,
    pub pool_size: usize,
    /// Sorted by query id, then cutoff.
    pub rows: Vec<QueryRow>,
    pub skipped: Vec<String>,
}

impl RetrievalReport {
    pub fn new(ks: Vec<usize>, alpha: f64, pool_size: usize, mut rows: Vec<QueryRow>, skipped: Vec<String>) -> Self {
        rows.sort_by(|a, b| a.query_id.cmp(&b.query_id).then(a.k.cmp(&b.k)));
        RetrievalReport {
            ks,
            alpha,
            pool_size,
            rows,
            skipped,
        }
    }

    pub fn rows_at(&self, k: usize) -> impl Iterator<Item = &QueryRow> {
        self.rows.iter().filter(move |r| r.k == k)
    }

    pub fn summary(&self, k: usize) -> CutoffSummary {
        let rows: Vec<&QueryRow> = self.rows_at(k).collect();
        let reranked: Vec<Prf> = rows.iter().map(|r| r.reranked()).collect();
        let base: Vec<Prf> = rows.iter().map(|r| r.base()).collect();
        let reranked_counts: Vec<_> = rows.iter().map(|r| r.counts(&r.predicted)).collect();
        let base_counts: Vec<_> = rows.iter().map(|r| r.counts(&r.baseline)).collect();
        CutoffSummary {
            k,
            queries: rows.len(),
            reranked_macro: macro_average(&reranked),
            reranked_micro: micro_average(&reranked_counts),
            base_macro: macro_average(&base),
            base_micro: micro_average(&base_counts),
            fallbacks: rows.iter().filter(|r| r.fallback).count(),
            failures: rows.iter().filter(|r| r.error.is_some()).count(),
        }
    }

    pub fn summaries(&self) -> Vec<CutoffSummary> {
        self.ks.iter().map(|&k| self.summary(k)).collect()
    }

    /// Human-readable summary. Contains no timings, so identical runs give
    /// identical text.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let queries: BTreeSet<&str> = self.rows.iter().map(|r| r.query_id.as_str()).collect();
        let _ = writeln!(out, "# table retrieval report");
        let _ = writeln!(out, "# averaging: macro over queries (micro pooled counts shown for reference)");
        let _ = writeln!(out, "# precision at k divides hits by k; failed queries count as empty predictions");
        let _ = writeln!(out, "queries\t{}", queries.len());
        let _ = writeln!(out, "skipped_single_table\t{}", self.skipped.len());
        let _ = writeln!(out, "alpha\t{:.6}", self.alpha);
        let _ = writeln!(out, "pool_size\t{}", self.pool_size);
        for s in self.summaries() {
            let _ = writeln!(out);
            let _ = writeln!(out, "[k = {}]", s.k);
            let line = |out: &mut String, label: &str, p: &Prf| {
                let _ = writeln!(
                    out,
                    "{label:<16} precision {:.6}  recall {:.6}  f1 {:.6}",
                    p.precision, p.recall, p.f1
                );
            };
            line(&mut out, "reranked macro", &s.reranked_macro);
            line(&mut out, "reranked micro", &s.reranked_micro);
            line(&mut out, "base macro", &s.base_macro);
            line(&mut out, "base micro", &s.base_micro);
            let _ = writeln!(out, "fallback plans   {}", s.fallbacks);
            let _ = writeln!(out, "failed queries   {}", s.failures);
        }
        out
    }

    /// One tab-separated line per query and cutoff, with a header.
    pub fn render_tsv(&self) -> String {
        let mut out = String::from(
            "query_id\tk\tgold\tpredicted\tbaseline\tprecision\trecall\tf1\tbase_precision\tbase_recall\tbase_f1\tfallback\tobjective\terror\n",
        );
        let join = |names: &mut dyn Iterator<Item = &String>| {
            names.map(|n| escape_field(n)).collect::<Vec<_>>().join("|")
        };
        for r in &self.rows {
            let (p, b) = (r.reranked(), r.base());
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}",
                escape_field(&r.query_id),
                r.k,
                join(&mut r.gold.iter()),
                join(&mut r.predicted.iter()),
                join(&mut r.baseline.iter()),
                p.precision,
                p.recall,
                p.f1,
                b.precision,
                b.recall,
                b.f1,
                r.fallback,
                r.objective.map(|v| format!("{v:.9}")).unwrap_or_default(),
                r.error.as_deref().map(escape_field).unwrap_or_default(),
            );
        }
        out
    }
}
