//! Brute-force reference solver for small instances.

use std::cmp::Ordering;

use itertools::Itertools;

use super::flow::is_connected;
use super::instance::{canonical_sum, CoverageItem, Edge, RerankInstance, Selection};
use crate::error::{Error, Result};

/// Largest pool the oracle accepts.
pub const ORACLE_MAX_TABLES: usize = 12;

/// Enumerate every table subset, every join set and every coverage
/// assignment, and return the best under the same ordering as the solver.
pub fn oracle_solve(inst: &RerankInstance) -> Result<Selection> {
    let n = inst.table_count();
    if n > ORACLE_MAX_TABLES {
        return Err(Error::OracleRefused {
            pool: n,
            limit: ORACLE_MAX_TABLES,
        });
    }
    let mut best: Option<(f64, Selection)> = None;
    for subset in (0..n).combinations(inst.k()) {
        let Some(edges) = best_joins(inst, &subset) else {
            continue;
        };
        let coverage = best_coverage(inst, &subset);
        let relevance = canonical_sum(subset.iter().map(|&i| inst.relevance(i)));
        let compat = canonical_sum(edges.iter().map(|e| e.omega));
        let total = (relevance + compat) + inst.coverage_value(&coverage);
        let better = match &best {
            None => true,
            Some((b, s)) => total > *b || (total == *b && inst.compare_names(&subset, &s.tables) == Ordering::Less),
        };
        if better {
            best = Some((
                total,
                Selection {
                    tables: subset,
                    edges,
                    coverage,
                    fallback: false,
                },
            ));
        }
    }
    Ok(match best {
        Some((_, s)) => s,
        None => {
            let tables = inst.top_by_relevance();
            Selection {
                coverage: best_coverage(inst, &tables),
                tables,
                edges: Vec::new(),
                fallback: true,
            }
        }
    })
}

/// Best connected join set of at most K-1 edges, at most one per table pair.
fn best_joins(inst: &RerankInstance, subset: &[usize]) -> Option<Vec<Edge>> {
    let pairs: Vec<Vec<Edge>> = subset
        .iter()
        .tuple_combinations()
        .map(|(&i, &j)| {
            let mut options = Vec::new();
            for k in 0..inst.tables()[i].columns.len() {
                for l in 0..inst.tables()[j].columns.len() {
                    let e = inst.edge(i, k, j, l);
                    if inst.usable(e.omega) {
                        options.push(e);
                    }
                }
            }
            options
        })
        .collect();
    let mut best: Option<(f64, Vec<Edge>)> = None;
    let mut current = Vec::new();
    choose_joins(inst, subset, &pairs, 0, &mut current, &mut best);
    best.map(|(_, e)| e)
}

fn choose_joins(
    inst: &RerankInstance,
    subset: &[usize],
    pairs: &[Vec<Edge>],
    at: usize,
    current: &mut Vec<Edge>,
    best: &mut Option<(f64, Vec<Edge>)>,
) {
    if at == pairs.len() {
        let links: Vec<(usize, usize)> = current.iter().map(|e| (e.i, e.j)).collect();
        if !is_connected(subset, &links) {
            return;
        }
        let mut edges = current.clone();
        edges.sort_by(|a, b| inst.edge_order(a, b));
        let value = canonical_sum(edges.iter().map(|e| e.omega));
        let better = match best {
            None => true,
            Some((b, e)) => value > *b || (value == *b && inst.compare_edges(&edges, e) == Ordering::Less),
        };
        if better {
            *best = Some((value, edges));
        }
        return;
    }
    choose_joins(inst, subset, pairs, at + 1, current, best);
    if current.len() + 1 < subset.len() {
        for e in &pairs[at] {
            current.push(*e);
            choose_joins(inst, subset, pairs, at + 1, current, best);
            current.pop();
        }
    }
}

/// Best coverage: each (sub-query, table) slot takes no column or one
/// column, with at most |Q| items overall. A sub-query counts as covered
/// whenever it has an item, which is optimal because alpha is non-negative.
fn best_coverage(inst: &RerankInstance, subset: &[usize]) -> Vec<CoverageItem> {
    let slots: Vec<(usize, usize)> = (0..inst.sub_query_count())
        .flat_map(|q| subset.iter().map(move |&i| (q, i)))
        .collect();
    let mut best: Option<(f64, Vec<CoverageItem>)> = None;
    let mut current = Vec::new();
    choose_coverage(inst, &slots, 0, &mut current, &mut best);
    best.map(|(_, c)| c).unwrap_or_default()
}

fn choose_coverage(
    inst: &RerankInstance,
    slots: &[(usize, usize)],
    at: usize,
    current: &mut Vec<CoverageItem>,
    best: &mut Option<(f64, Vec<CoverageItem>)>,
) {
    if at == slots.len() {
        let mut items = current.clone();
        items.sort_by(|a, b| inst.item_order(a, b));
        let value = inst.coverage_value(&items);
        let better = match best {
            None => true,
            Some((b, c)) => value > *b || (value == *b && inst.compare_items(&items, c) == Ordering::Less),
        };
        if better {
            *best = Some((value, items));
        }
        return;
    }
    choose_coverage(inst, slots, at + 1, current, best);
    if current.len() < inst.sub_query_count() {
        let (q, i) = slots[at];
        for k in 0..inst.tables()[i].columns.len() {
            current.push((q, i, k));
            choose_coverage(inst, slots, at + 1, current, best);
            current.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mip::instance::tests::toy_instance;

    #[test]
    fn k_equals_n_selects_everything() {
        let inst = toy_instance(
            &[0.1, 0.2, 0.3],
            &[1, 1, 1],
            vec![vec![vec![0.0], vec![0.0], vec![0.0]]],
            &[((0, 0, 1, 0), 0.5), ((0, 0, 2, 0), 0.5)],
            3,
            1.0,
        );
        let sel = oracle_solve(&inst).unwrap();
        assert_eq!(sel.tables, vec![0, 1, 2]);
        assert_eq!(sel.edges.len(), 2);
        assert!(!sel.fallback);
    }

    #[test]
    fn path_never_picks_the_ends() {
        let inst = toy_instance(
            &[1.0, 1.0, 1.0],
            &[1, 1, 1],
            vec![vec![vec![0.0], vec![0.0], vec![0.0]]],
            &[((0, 0, 1, 0), 1.0), ((1, 0, 2, 0), 1.0)],
            2,
            0.0,
        );
        let sel = oracle_solve(&inst).unwrap();
        assert_ne!(sel.tables, vec![0, 2]);
        assert_eq!(sel.tables, vec![0, 1]);
    }

    #[test]
    fn refuses_large_pools() {
        let n = ORACLE_MAX_TABLES + 1;
        let inst = toy_instance(&vec![0.0; n], &vec![1; n], vec![vec![vec![0.0]; n]], &[], 1, 1.0);
        assert!(matches!(oracle_solve(&inst), Err(Error::OracleRefused { .. })));
    }
}
