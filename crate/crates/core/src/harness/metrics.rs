use std::collections::BTreeSet;

/// Precision, recall and F1 of one prediction, or an average of several.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Correct predictions among the distinct predicted names.
pub fn hits(predicted: &[String], gold: &BTreeSet<String>) -> usize {
    let distinct: BTreeSet<&String> = predicted.iter().collect();
    distinct.into_iter().filter(|t| gold.contains(*t)).count()
}

/// Scores at cutoff `k`: precision divides by `k`, so a short prediction
/// (a failed query, or a pool smaller than `k`) is not rewarded.
pub fn score(predicted: &[String], gold: &BTreeSet<String>, k: usize) -> Prf {
    let h = hits(predicted, gold) as f64;
    let precision = if k == 0 { 0.0 } else { h / k as f64 };
    let recall = if gold.is_empty() { 0.0 } else { h / gold.len() as f64 };
    Prf {
        precision,
        recall,
        f1: f1(precision, recall),
    }
}

/// Mean of per-query scores.
pub fn macro_average(rows: &[Prf]) -> Prf {
    if rows.is_empty() {
        return Prf::default();
    }
    let n = rows.len() as f64;
    Prf {
        precision: rows.iter().map(|r| r.precision).sum::<f64>() / n,
        recall: rows.iter().map(|r| r.recall).sum::<f64>() / n,
        f1: rows.iter().map(|r| r.f1).sum::<f64>() / n,
    }
}

/// Scores from hit, prediction and gold counts pooled over all queries.
pub fn micro_average(counts: &[(usize, usize, usize)]) -> Prf {
    let (h, p, g) = counts
        .iter()
        .fold((0, 0, 0), |(h, p, g), &(a, b, c)| (h + a, p + b, g + c));
    let precision = if p == 0 { 0.0 } else { h as f64 / p as f64 };
    let recall = if g == 0 { 0.0 } else { h as f64 / g as f64 };
    Prf {
        precision,
        recall,
        f1: f1(precision, recall),
    }
}
