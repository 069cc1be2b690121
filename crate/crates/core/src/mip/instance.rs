use std::cmp::Ordering;

use crate::compatibility::CompatibilityGraph;
use crate::corpus::TableCorpus;
use crate::decompose::QueryDecomposition;
use crate::error::{Error, Result};
use crate::relevance::{CandidatePool, RelevanceScores};

/// One pool table as the optimizer sees it.
#[derive(Debug, Clone, PartialEq)]
pub struct TableEntry {
    pub name: String,
    pub columns: Vec<String>,
    /// Coarse relevance r_i.
    pub relevance: f64,
}

/// Everything the re-ranking program needs for one query.
///
/// Tables are addressed by pool position, sub-queries by their index.
#[derive(Debug, Clone, PartialEq)]
pub struct RerankInstance {
    k: usize,
    alpha: f64,
    epsilon: f64,
    tables: Vec<TableEntry>,
    sub_queries: Vec<String>,
    /// r_qik as `[q][i][k]`.
    fine: Vec<Vec<Vec<f64>>>,
    graph: CompatibilityGraph,
    name_rank: Vec<usize>,
}

/// A join candidate between column `k` of table `i` and column `l` of table
/// `j`, oriented so that table `i` has the smaller name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub k: usize,
    pub j: usize,
    pub l: usize,
    pub omega: f64,
}

/// `(q, i, k)`: sub-query `q` is answered by column `k` of table `i`.
pub type CoverageItem = (usize, usize, usize);

impl RerankInstance {
    pub fn new(
        tables: Vec<TableEntry>,
        sub_queries: Vec<String>,
        fine: Vec<Vec<Vec<f64>>>,
        graph: CompatibilityGraph,
        k: usize,
        alpha: f64,
    ) -> Result<Self> {
        let n = tables.len();
        if k == 0 {
            return Err(Error::Contract("K must be positive".into()));
        }
        if k > n {
            return Err(Error::PoolTooSmall { k, pool: n });
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Contract(format!("alpha must be a non-negative number, got {alpha}")));
        }
        if sub_queries.is_empty() || fine.len() != sub_queries.len() {
            return Err(Error::Contract("fine scores need one block per sub-query, and at least one sub-query".into()));
        }
        if graph.table_count() != n {
            return Err(Error::Contract("compatibility graph does not match the pool".into()));
        }
        for (i, t) in tables.iter().enumerate() {
            if !t.relevance.is_finite() {
                return Err(Error::Contract(format!("non-finite relevance for {}", t.name)));
            }
            if graph.table_names()[i] != t.name || graph.column_count(i) != t.columns.len() {
                return Err(Error::Contract(format!("graph disagrees with pool at table {}", t.name)));
            }
        }
        for block in &fine {
            if block.len() != n
                || block.iter().zip(&tables).any(|(row, t)| row.len() != t.columns.len())
                || block.iter().flatten().any(|v| !v.is_finite())
            {
                return Err(Error::Contract("fine scores have the wrong shape or non-finite values".into()));
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| tables[a].name.cmp(&tables[b].name));
        let mut name_rank = vec![0; n];
        for (rank, &i) in order.iter().enumerate() {
            name_rank[i] = rank;
        }
        Ok(RerankInstance {
            k,
            alpha,
            epsilon: 0.0,
            tables,
            sub_queries,
            fine,
            graph,
            name_rank,
        })
    }

    /// Assemble an instance from the outputs of the earlier pipeline stages.
    pub fn from_pool(
        corpus: &TableCorpus,
        pool: &CandidatePool,
        scores: &RelevanceScores,
        graph: CompatibilityGraph,
        decomposition: &QueryDecomposition,
        k: usize,
        alpha: f64,
    ) -> Result<Self> {
        let tables = pool
            .candidates()
            .iter()
            .zip(&scores.coarse)
            .map(|(c, &r)| TableEntry {
                name: c.name.clone(),
                columns: corpus.tables()[c.table]
                    .columns()
                    .iter()
                    .map(|col| col.header.clone())
                    .collect(),
                relevance: r,
            })
            .collect();
        let sub_queries = decomposition.sub_queries().iter().map(|s| s.text()).collect();
        RerankInstance::new(tables, sub_queries, scores.fine.as_nested().to_vec(), graph, k, alpha)
    }

    /// Edges with omega at or below `epsilon` cannot connect tables.
    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::Contract(format!("epsilon must be a non-negative number, got {epsilon}")));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn tables(&self) -> &[TableEntry] {
        &self.tables
    }

    pub fn table_count(&self) -> usize {
        self.tables.len()
    }

    pub fn sub_queries(&self) -> &[String] {
        &self.sub_queries
    }

    pub fn sub_query_count(&self) -> usize {
        self.sub_queries.len()
    }

    pub fn graph(&self) -> &CompatibilityGraph {
        &self.graph
    }

    pub fn relevance(&self, i: usize) -> f64 {
        self.tables[i].relevance
    }

    pub fn fine(&self, q: usize, i: usize, k: usize) -> f64 {
        self.fine[q][i][k]
    }

    pub fn omega(&self, i: usize, k: usize, j: usize, l: usize) -> f64 {
        self.graph.omega(i, k, j, l)
    }

    /// Position of table `i` in table-name order.
    pub fn name_rank(&self, i: usize) -> usize {
        self.name_rank[i]
    }

    /// Whether an edge may carry connectivity.
    pub fn usable(&self, omega: f64) -> bool {
        omega > self.epsilon
    }

    /// Orient a column pair so the table with the smaller name comes first.
    pub fn edge(&self, i: usize, k: usize, j: usize, l: usize) -> Edge {
        let omega = self.omega(i, k, j, l);
        if self.name_rank[i] <= self.name_rank[j] {
            Edge { i, k, j, l, omega }
        } else {
            Edge { i: j, k: l, j: i, l: k, omega }
        }
    }

    /// Total order on edges: higher omega first, then by table names and
    /// column positions.
    pub fn edge_order(&self, a: &Edge, b: &Edge) -> Ordering {
        b.omega
            .total_cmp(&a.omega)
            .then(self.name_rank[a.i].cmp(&self.name_rank[b.i]))
            .then(self.name_rank[a.j].cmp(&self.name_rank[b.j]))
            .then(a.k.cmp(&b.k))
            .then(a.l.cmp(&b.l))
    }

    /// Every usable column-pair edge, sorted by [`Self::edge_order`].
    pub fn usable_edges(&self) -> Vec<Edge> {
        let n = self.table_count();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in 0..self.tables[i].columns.len() {
                    for l in 0..self.tables[j].columns.len() {
                        let e = self.edge(i, k, j, l);
                        if self.usable(e.omega) {
                            edges.push(e);
                        }
                    }
                }
            }
        }
        edges.sort_by(|a, b| self.edge_order(a, b));
        edges
    }

    /// Order on coverage items: sub-query, then table name, then column.
    pub fn item_order(&self, a: &CoverageItem, b: &CoverageItem) -> Ordering {
        a.0.cmp(&b.0)
            .then(self.name_rank[a.1].cmp(&self.name_rank[b.1]))
            .then(a.2.cmp(&b.2))
    }

    /// Best column of table `i` for sub-query `q`; the lowest index wins ties.
    pub fn best_column(&self, q: usize, i: usize) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (k, &v) in self.fine[q][i].iter().enumerate() {
            if v > best.1 {
                best = (k, v);
            }
        }
        best
    }

    /// Objective value of a selection, summed in a fixed order so that equal
    /// selections always produce bit-identical values.
    pub fn objective(&self, selection: &Selection) -> f64 {
        let relevance = canonical_sum(selection.tables.iter().map(|&i| self.relevance(i)));
        let compat = canonical_sum(selection.edges.iter().map(|e| e.omega));
        (relevance + compat) + self.coverage_value(&selection.coverage)
    }

    /// Fine-relevance plus coverage-bonus part of the objective.
    pub fn coverage_value(&self, items: &[CoverageItem]) -> f64 {
        let fine = canonical_sum(items.iter().map(|&(q, i, k)| self.fine(q, i, k)));
        let mut covered: Vec<usize> = items.iter().map(|it| it.0).collect();
        covered.sort_unstable();
        covered.dedup();
        fine + self.alpha * covered.len() as f64
    }

    /// Lexicographic comparison of sorted table-name lists.
    pub fn compare_names(&self, a: &[usize], b: &[usize]) -> Ordering {
        let key = |s: &[usize]| {
            let mut v: Vec<&str> = s.iter().map(|&i| self.tables[i].name.as_str()).collect();
            v.sort_unstable();
            v
        };
        key(a).cmp(&key(b))
    }

    pub fn compare_items(&self, a: &[CoverageItem], b: &[CoverageItem]) -> Ordering {
        for (x, y) in a.iter().zip(b) {
            let o = self.item_order(x, y);
            if o != Ordering::Equal {
                return o;
            }
        }
        a.len().cmp(&b.len())
    }

    pub fn compare_edges(&self, a: &[Edge], b: &[Edge]) -> Ordering {
        for (x, y) in a.iter().zip(b) {
            let o = self.edge_order(x, y);
            if o != Ordering::Equal {
                return o;
            }
        }
        a.len().cmp(&b.len())
    }

    /// Top-K pool positions by relevance, ties broken by name.
    pub fn top_by_relevance(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.table_count()).collect();
        order.sort_by(|&a, &b| {
            self.relevance(b)
                .total_cmp(&self.relevance(a))
                .then(self.name_rank[a].cmp(&self.name_rank[b]))
        });
        order.truncate(self.k);
        order.sort_unstable();
        order
    }
}

/// Sum in descending order.
pub fn canonical_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v.into_iter().sum()
}

/// A candidate answer to one instance in solver terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Pool positions, ascending.
    pub tables: Vec<usize>,
    /// Sorted by edge order.
    pub edges: Vec<Edge>,
    /// Sorted by item order.
    pub coverage: Vec<CoverageItem>,
    pub fallback: bool,
}
