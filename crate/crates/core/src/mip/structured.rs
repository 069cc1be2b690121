//! Exact solver exploiting the structure of the program.
//!
//! Once the selected tables are fixed the three remaining parts separate:
//! the joins must form a spanning tree over usable edges, so the best choice
//! is a maximum spanning tree on per-pair best edges; and sub-query coverage
//! is a budgeted choice with concave per-sub-query gains, so taking the
//! largest positive marginal gains is optimal. The table set itself is found
//! by depth-first enumeration with an upper-bound cut.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::time::{Duration, Instant};

use petgraph::unionfind::UnionFind;

use super::instance::{canonical_sum, CoverageItem, Edge, RerankInstance, Selection};
use crate::error::{Error, Result};

pub(crate) struct Prepared<'a> {
    inst: &'a RerankInstance,
    /// Best usable edge per table pair, in edge order.
    best_edges: Vec<Edge>,
    max_edge: f64,
    /// Per sub-query: `(table, best column, value)` by descending value.
    by_value: Vec<Vec<(usize, usize, f64)>>,
    /// Relevance of tables `s..`, sorted descending, for each `s`.
    suffix_relevance: Vec<Vec<f64>>,
}

impl<'a> Prepared<'a> {
    pub(crate) fn new(inst: &'a RerankInstance) -> Self {
        let n = inst.table_count();
        let mut seen = HashSet::new();
        let best_edges: Vec<Edge> = inst
            .usable_edges()
            .into_iter()
            .filter(|e| seen.insert((e.i, e.j)))
            .collect();
        let max_edge = best_edges.first().map_or(0.0, |e| e.omega);
        let by_value = (0..inst.sub_query_count())
            .map(|q| {
                let mut v: Vec<(usize, usize, f64)> = (0..n)
                    .map(|i| {
                        let (k, w) = inst.best_column(q, i);
                        (i, k, w)
                    })
                    .collect();
                v.sort_by(|a, b| b.2.total_cmp(&a.2).then(inst.name_rank(a.0).cmp(&inst.name_rank(b.0))));
                v
            })
            .collect();
        let suffix_relevance = (0..=n)
            .map(|s| {
                let mut r: Vec<f64> = (s..n).map(|i| inst.relevance(i)).collect();
                r.sort_by(|a, b| b.total_cmp(a));
                r
            })
            .collect();
        Prepared {
            inst,
            best_edges,
            max_edge,
            by_value,
            suffix_relevance,
        }
    }

    /// Maximum spanning tree over the members, or `None` if they are not
    /// connected by usable edges.
    pub(crate) fn spanning_tree(&self, members: &[bool]) -> Option<Vec<Edge>> {
        let need = members.iter().filter(|&&m| m).count().saturating_sub(1);
        let mut tree = Vec::with_capacity(need);
        if need == 0 {
            return Some(tree);
        }
        let mut uf = UnionFind::<usize>::new(members.len());
        for e in &self.best_edges {
            if members[e.i] && members[e.j] && uf.union(e.i, e.j) {
                tree.push(*e);
                if tree.len() == need {
                    return Some(tree);
                }
            }
        }
        None
    }

    /// Optimal coverage items over the member tables.
    pub(crate) fn greedy_coverage(&self, members: &[bool]) -> Vec<CoverageItem> {
        let alpha = self.inst.alpha();
        let mut gains = Vec::new();
        for (q, list) in self.by_value.iter().enumerate() {
            let mut first = true;
            for (rank, &(i, k, v)) in list.iter().enumerate() {
                if members[i] {
                    let gain = if first { alpha + v } else { v };
                    first = false;
                    gains.push((gain, q, rank, (q, i, k)));
                }
            }
        }
        gains.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut items: Vec<CoverageItem> = gains
            .into_iter()
            .take(self.inst.sub_query_count())
            .take_while(|g| g.0 > 0.0)
            .map(|g| g.3)
            .collect();
        items.sort_by(|a, b| self.inst.item_order(a, b));
        items
    }

    /// Best coverage value when `forced` items must be used and `forbidden`
    /// items may not. `None` when the forced items are themselves infeasible.
    pub(crate) fn constrained_coverage(
        &self,
        members: &[bool],
        forced: &[CoverageItem],
        forbidden: &HashSet<CoverageItem>,
    ) -> Option<f64> {
        let inst = self.inst;
        let budget = inst.sub_query_count();
        if forced.len() > budget {
            return None;
        }
        let mut used = HashSet::new();
        let mut covered = vec![false; budget];
        for &(q, i, _) in forced {
            if !members[i] || !used.insert((q, i)) {
                return None;
            }
            covered[q] = true;
        }
        let mut gains = Vec::new();
        for (q, &is_covered) in covered.iter().enumerate() {
            let mut options: Vec<(f64, CoverageItem)> = Vec::new();
            for i in (0..inst.table_count()).filter(|&i| members[i] && !used.contains(&(q, i))) {
                let mut best: Option<(f64, usize)> = None;
                for k in 0..inst.tables()[i].columns.len() {
                    let v = inst.fine(q, i, k);
                    if !forbidden.contains(&(q, i, k)) && best.is_none_or(|b| v > b.0) {
                        best = Some((v, k));
                    }
                }
                if let Some((v, k)) = best {
                    options.push((v, (q, i, k)));
                }
            }
            options.sort_by(|a, b| b.0.total_cmp(&a.0));
            for (n, (v, item)) in options.into_iter().enumerate() {
                let gain = if n == 0 && !is_covered { inst.alpha() + v } else { v };
                gains.push((gain, item));
            }
        }
        gains.sort_by(|a, b| b.0.total_cmp(&a.0).then(inst.item_order(&a.1, &b.1)));
        let mut items: Vec<CoverageItem> = forced.to_vec();
        items.extend(
            gains
                .into_iter()
                .take(budget - forced.len())
                .take_while(|g| g.0 > 0.0)
                .map(|g| g.1),
        );
        Some(inst.coverage_value(&items))
    }

    /// Among optimal coverages of the members, the one whose sorted item list
    /// is lexicographically smallest.
    pub(crate) fn refined_coverage(&self, members: &[bool]) -> Vec<CoverageItem> {
        let inst = self.inst;
        let none = HashSet::new();
        let target = self
            .constrained_coverage(members, &[], &none)
            .expect("empty forced set is feasible");
        let tol = 1e-9 * (1.0 + target.abs());
        let mut candidates: Vec<CoverageItem> = Vec::new();
        for q in 0..inst.sub_query_count() {
            for i in (0..inst.table_count()).filter(|&i| members[i]) {
                for k in 0..inst.tables()[i].columns.len() {
                    candidates.push((q, i, k));
                }
            }
        }
        candidates.sort_by(|a, b| inst.item_order(a, b));

        let mut forced: Vec<CoverageItem> = Vec::new();
        let mut forbidden: HashSet<CoverageItem> = HashSet::new();
        for c in candidates {
            if inst.coverage_value(&forced) >= target - tol {
                break;
            }
            forced.push(c);
            match self.constrained_coverage(members, &forced, &forbidden) {
                Some(v) if v >= target - tol => {}
                _ => {
                    forced.pop();
                    forbidden.insert(c);
                }
            }
        }
        forced
    }

    fn upper_bound(&self, chosen: &[usize], members: &mut [bool], start: usize) -> f64 {
        let inst = self.inst;
        let missing = inst.k() - chosen.len();
        let relevance: f64 = chosen.iter().map(|&i| inst.relevance(i)).sum::<f64>()
            + self.suffix_relevance[start][..missing].iter().sum::<f64>();
        let compat = (inst.k() - 1) as f64 * self.max_edge;
        for m in &mut members[start..] {
            *m = true;
        }
        let coverage = inst.coverage_value(&self.greedy_coverage(members));
        for m in &mut members[start..] {
            *m = false;
        }
        relevance + compat + coverage
    }
}

struct Search<'p, 'a> {
    prep: &'p Prepared<'a>,
    chosen: Vec<usize>,
    members: Vec<bool>,
    best: Option<(f64, Vec<usize>)>,
    deadline: Option<(Instant, Duration)>,
    visited: u64,
}

impl Search<'_, '_> {
    fn run(&mut self, start: usize) -> Result<()> {
        let inst = self.prep.inst;
        let (n, k) = (inst.table_count(), inst.k());
        self.visited += 1;
        if self.visited.is_multiple_of(1024) {
            if let Some((at, limit)) = self.deadline {
                if Instant::now() >= at {
                    return Err(Error::TimeLimit(limit));
                }
            }
        }
        if self.chosen.len() == k {
            self.evaluate();
            return Ok(());
        }
        if n - start < k - self.chosen.len() {
            return Ok(());
        }
        if let Some((best, _)) = &self.best {
            let slack = 1e-9 * (1.0 + best.abs());
            if self.prep.upper_bound(&self.chosen, &mut self.members, start) < best - slack {
                return Ok(());
            }
        }
        for i in start..n {
            if n - i < k - self.chosen.len() {
                break;
            }
            self.chosen.push(i);
            self.members[i] = true;
            let r = self.run(i + 1);
            self.members[i] = false;
            self.chosen.pop();
            r?;
        }
        Ok(())
    }

    fn evaluate(&mut self) {
        let inst = self.prep.inst;
        let Some(tree) = self.prep.spanning_tree(&self.members) else {
            return;
        };
        let relevance = canonical_sum(self.chosen.iter().map(|&i| inst.relevance(i)));
        let compat = canonical_sum(tree.iter().map(|e| e.omega));
        let coverage = inst.coverage_value(&self.prep.greedy_coverage(&self.members));
        let total = (relevance + compat) + coverage;
        let better = match &self.best {
            None => true,
            Some((b, names)) => {
                total > *b || (total == *b && inst.compare_names(&self.chosen, names) == Ordering::Less)
            }
        };
        if better {
            self.best = Some((total, self.chosen.clone()));
        }
    }
}

/// Optimal selection, or `None` when no K tables are connected by usable edges.
pub(crate) fn solve_structured(inst: &RerankInstance, time_limit: Option<Duration>) -> Result<Option<Selection>> {
    let prep = Prepared::new(inst);
    let n = inst.table_count();
    let mut search = Search {
        prep: &prep,
        chosen: Vec::with_capacity(inst.k()),
        members: vec![false; n],
        best: None,
        deadline: time_limit.map(|t| (Instant::now() + t, t)),
        visited: 0,
    };
    search.run(0)?;
    let Some((_, tables)) = search.best else {
        return Ok(None);
    };
    let mut members = vec![false; n];
    for &i in &tables {
        members[i] = true;
    }
    let edges = prep.spanning_tree(&members).expect("winning subset is connected");
    let coverage = prep.refined_coverage(&members);
    Ok(Some(Selection {
        tables,
        edges,
        coverage,
        fallback: false,
    }))
}

/// Top-K by relevance with no joins and the best coverage over those tables.
pub(crate) fn fallback_selection(inst: &RerankInstance) -> Selection {
    let prep = Prepared::new(inst);
    let tables = inst.top_by_relevance();
    let mut members = vec![false; inst.table_count()];
    for &i in &tables {
        members[i] = true;
    }
    Selection {
        coverage: prep.refined_coverage(&members),
        tables,
        edges: Vec::new(),
        fallback: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mip::instance::tests::toy_instance;

    #[test]
    fn path_picks_adjacent_pair() {
        let inst = toy_instance(
            &[1.0, 1.0, 1.0],
            &[1, 1, 1],
            vec![vec![vec![0.0], vec![0.0], vec![0.0]]],
            &[((0, 0, 1, 0), 1.0), ((1, 0, 2, 0), 1.0)],
            2,
            1.0,
        );
        let sel = solve_structured(&inst, None).unwrap().unwrap();
        assert_eq!(sel.tables, vec![0, 1]);
        assert_eq!(sel.edges.len(), 1);
    }

    #[test]
    fn disconnected_pool_has_no_solution() {
        let inst = toy_instance(
            &[1.0, 1.0, 1.0],
            &[1, 1, 1],
            vec![vec![vec![0.0], vec![0.0], vec![0.0]]],
            &[],
            2,
            1.0,
        );
        assert!(solve_structured(&inst, None).unwrap().is_none());
        let fb = fallback_selection(&inst);
        assert_eq!(fb.tables, vec![0, 1]);
        assert!(fb.fallback && fb.edges.is_empty());
    }

    #[test]
    fn coverage_respects_budget_and_bonus() {
        // two sub-queries, budget 2; q0 has two strong columns, q1 one weak
        let inst = toy_instance(
            &[0.0, 0.0],
            &[1, 1],
            vec![vec![vec![0.5], vec![0.5]], vec![vec![0.125], vec![0.0]]],
            &[((0, 0, 1, 0), 1.0)],
            2,
            1.0,
        );
        let prep = Prepared::new(&inst);
        let items = prep.greedy_coverage(&[true, true]);
        // q0 first item 1.5, q1 first item 1.125, q0 second item 0.5
        assert_eq!(items, vec![(0, 0, 0), (1, 0, 0)]);
        assert_eq!(prep.refined_coverage(&[true, true]), items);
    }

    #[test]
    fn refinement_prefers_smaller_items_on_ties() {
        let inst = toy_instance(
            &[0.0, 0.0],
            &[2, 1],
            vec![vec![vec![0.5, 0.5], vec![0.5]]],
            &[((0, 0, 1, 0), 1.0)],
            2,
            0.0,
        );
        let prep = Prepared::new(&inst);
        assert_eq!(prep.refined_coverage(&[true, true]), vec![(0, 0, 0)]);
    }

    #[test]
    fn zero_value_item_included_when_lexicographically_smaller() {
        // budget 2; q0 on T0 scores 0, q1 on T1 scores 1
        let inst = toy_instance(
            &[0.0, 0.0],
            &[1, 1],
            vec![vec![vec![0.0], vec![-1.0]], vec![vec![-1.0], vec![1.0]]],
            &[((0, 0, 1, 0), 1.0)],
            2,
            0.0,
        );
        let prep = Prepared::new(&inst);
        assert_eq!(prep.refined_coverage(&[true, true]), vec![(0, 0, 0), (1, 1, 0)]);
    }
}
