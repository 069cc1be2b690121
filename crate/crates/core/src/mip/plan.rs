use serde::{Deserialize, Serialize};

use super::instance::{CoverageItem, Edge, RerankInstance, Selection};
use super::model::{MipModel, VarRole};
use crate::corpus::ColumnRef;

/// One join condition, reported without direction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JoinCondition {
    pub left: ColumnRef,
    pub right: ColumnRef,
}

/// Columns chosen for one sub-query; empty when it is not covered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubQueryCoverage {
    pub sub_query: String,
    pub columns: Vec<ColumnRef>,
}

/// Retrieved tables with the join conditions that connect them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JoinPlan {
    /// Descending coarse relevance, ties by name.
    pub tables: Vec<String>,
    pub joins: Vec<JoinCondition>,
    pub coverage: Vec<SubQueryCoverage>,
    pub objective: f64,
    /// Set when no connected selection existed and the plan is the top-K
    /// tables by relevance.
    pub fallback: bool,
}

impl JoinPlan {
    pub fn from_selection(inst: &RerankInstance, selection: &Selection) -> JoinPlan {
        let mut tables = selection.tables.clone();
        tables.sort_by(|&a, &b| {
            inst.relevance(b)
                .total_cmp(&inst.relevance(a))
                .then(inst.name_rank(a).cmp(&inst.name_rank(b)))
        });
        let column = |i: usize, k: usize| ColumnRef::new(&inst.tables()[i].name, &inst.tables()[i].columns[k]);
        let mut joins: Vec<JoinCondition> = selection
            .edges
            .iter()
            .map(|e| JoinCondition {
                left: column(e.i, e.k),
                right: column(e.j, e.l),
            })
            .collect();
        joins.sort();
        let coverage = inst
            .sub_queries()
            .iter()
            .enumerate()
            .map(|(q, text)| SubQueryCoverage {
                sub_query: text.clone(),
                columns: selection
                    .coverage
                    .iter()
                    .filter(|item| item.0 == q)
                    .map(|&(_, i, k)| column(i, k))
                    .collect(),
            })
            .collect();
        JoinPlan {
            tables: tables.iter().map(|&i| inst.tables()[i].name.clone()).collect(),
            joins,
            coverage,
            objective: inst.objective(selection),
            fallback: selection.fallback,
        }
    }
}

/// Read a selection off a model solution vector. A join chosen in both
/// directions is reported once.
pub fn extract_selection(inst: &RerankInstance, model: &MipModel, values: &[f64]) -> Selection {
    let mut tables = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut coverage: Vec<CoverageItem> = Vec::new();
    for (v, &x) in model.variables.iter().zip(values) {
        if x < 0.5 {
            continue;
        }
        match v.role {
            VarRole::Table(i) => tables.push(i),
            VarRole::Join { i, k, j, l } => {
                let e = inst.edge(i, k, j, l);
                if !edges.iter().any(|f| (f.i, f.k, f.j, f.l) == (e.i, e.k, e.j, e.l)) {
                    edges.push(e);
                }
            }
            VarRole::Cover { q, i, k } => coverage.push((q, i, k)),
            _ => {}
        }
    }
    tables.sort_unstable();
    edges.sort_by(|a, b| inst.edge_order(a, b));
    coverage.sort_by(|a, b| inst.item_order(a, b));
    Selection {
        tables,
        edges,
        coverage,
        fallback: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mip::instance::tests::toy_instance;
    use crate::mip::model::build_model;

    fn instance() -> RerankInstance {
        toy_instance(
            &[0.25, 0.5, 0.125],
            &[3, 2, 1],
            vec![vec![vec![0.0; 3], vec![0.0; 2], vec![0.0]]],
            &[((0, 2, 1, 0), 0.5)],
            2,
            1.0,
        )
    }

    #[test]
    fn direct_extraction() {
        let inst = instance();
        let model = build_model(&inst);
        let mut x = vec![0.0; model.variables.len()];
        x[model.var(VarRole::Table(0)).unwrap()] = 1.0;
        x[model.var(VarRole::Table(1)).unwrap()] = 1.0;
        x[model.var(VarRole::Join { i: 0, k: 2, j: 1, l: 0 }).unwrap()] = 1.0;
        let plan = JoinPlan::from_selection(&inst, &extract_selection(&inst, &model, &x));
        assert_eq!(plan.tables, ["T1", "T0"]);
        assert_eq!(
            plan.joins,
            vec![JoinCondition {
                left: ColumnRef::new("T0", "c2"),
                right: ColumnRef::new("T1", "c0"),
            }]
        );
        assert!(plan.coverage[0].columns.is_empty());
    }

    #[test]
    fn both_directions_collapse() {
        let inst = instance();
        let model = build_model(&inst);
        let mut x = vec![0.0; model.variables.len()];
        x[model.var(VarRole::Join { i: 0, k: 2, j: 1, l: 0 }).unwrap()] = 1.0;
        x[model.var(VarRole::Join { i: 1, k: 0, j: 0, l: 2 }).unwrap()] = 1.0;
        assert_eq!(extract_selection(&inst, &model, &x).edges.len(), 1);
    }
}
