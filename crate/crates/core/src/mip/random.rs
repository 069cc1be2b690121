//! Seeded random instances for solver testing.
//!
//! Scores lie on a grid of quarters so that sums are exact in binary
//! floating point and ties between different selections occur often.

use std::collections::BTreeMap;

use rand::Rng;

use super::instance::{RerankInstance, TableEntry};
use crate::compatibility::CompatibilityGraph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomInstanceSpec {
    pub max_tables: usize,
    pub max_columns: usize,
    pub max_sub_queries: usize,
    pub max_k: usize,
    /// Probability that a table pair has any positive omega.
    pub edge_density: f64,
    pub alphas: &'static [f64],
}

impl Default for RandomInstanceSpec {
    fn default() -> Self {
        RandomInstanceSpec {
            max_tables: 8,
            max_columns: 4,
            max_sub_queries: 3,
            max_k: 3,
            edge_density: 0.5,
            alphas: &[0.0, 0.5, 1.0, 5.0],
        }
    }
}

fn quarter<R: Rng>(rng: &mut R, lo: i32, hi: i32) -> f64 {
    rng.random_range(lo..=hi) as f64 / 4.0
}

pub fn random_instance<R: Rng>(rng: &mut R, spec: &RandomInstanceSpec) -> RerankInstance {
    let k = rng.random_range(1..=spec.max_k);
    let n = rng.random_range(k.max(1)..=spec.max_tables.max(k));
    let nq = rng.random_range(1..=spec.max_sub_queries);
    let alpha = spec.alphas[rng.random_range(0..spec.alphas.len())];
    let columns: Vec<usize> = (0..n).map(|_| rng.random_range(1..=spec.max_columns)).collect();
    let names: Vec<String> = (0..n).map(|i| format!("t{}", (b'a' + i as u8) as char)).collect();
    let tables = names
        .iter()
        .zip(&columns)
        .map(|(name, &c)| TableEntry {
            name: name.clone(),
            columns: (0..c).map(|x| format!("c{x}")).collect(),
            relevance: quarter(rng, 0, 4),
        })
        .collect();
    let fine = (0..nq)
        .map(|_| columns.iter().map(|&c| (0..c).map(|_| quarter(rng, -1, 4)).collect()).collect())
        .collect();
    let mut matrices = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut m = vec![0.0; columns[i] * columns[j]];
            if rng.random_bool(spec.edge_density) {
                for w in m.iter_mut() {
                    if rng.random_bool(0.5) {
                        *w = quarter(rng, 0, 8);
                    }
                }
            }
            matrices.insert((i, j), m);
        }
    }
    let graph = CompatibilityGraph::from_matrices(names, columns, matrices).expect("valid random graph");
    let sub_queries = (0..nq).map(|q| format!("sub-query {q}")).collect();
    RerankInstance::new(tables, sub_queries, fine, graph, k, alpha).expect("valid random instance")
}
