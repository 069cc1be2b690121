//! The re-ranking program: choose K tables, the joins connecting them and
//! the columns answering each sub-query so that total relevance,
//! compatibility and coverage are maximal.
//!
//! Two exact paths exist. The structured solver is used for every query;
//! branch-and-bound over the explicit [`MipModel`] can re-solve small
//! instances as a cross-check. [`oracle_solve`] enumerates everything and
//! serves as the reference in tests.
//!
//! Among equal objectives the preferred answer has the lexicographically
//! smallest sorted table-name list, then the greedy spanning tree under
//! [`RerankInstance::edge_order`], then the smallest sorted coverage list.

mod branch_bound;
mod flow;
mod instance;
mod lp;
mod lp_format;
mod model;
mod oracle;
mod plan;
mod random;
mod structured;

use std::str::FromStr;
use std::time::Duration;

pub use branch_bound::{branch_and_bound, BranchBoundOptions, BranchBoundResult};
pub use flow::{connectivity_flow, is_connected};
pub use instance::{canonical_sum, CoverageItem, Edge, RerankInstance, Selection, TableEntry};
pub use lp::{solve_relaxation, LpOutcome};
pub use lp_format::write_lp;
pub use model::{build_model, Constraint, MipModel, Sense, VarKind, VarRole, Variable};
pub use oracle::{oracle_solve, ORACLE_MAX_TABLES};
pub use plan::{extract_selection, JoinCondition, JoinPlan, SubQueryCoverage};
pub use random::{random_instance, RandomInstanceSpec};

use crate::error::{Error, Result};

pub const DEFAULT_TIME_LIMIT: Duration = Duration::from_secs(10);

/// What to return when no K tables can be connected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FallbackPolicy {
    /// Top-K tables by relevance with no joins, flagged as fallback.
    #[default]
    TopK,
    /// Report [`Error::Infeasible`].
    Error,
}

impl FromStr for FallbackPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "top-k" | "topk" => Ok(FallbackPolicy::TopK),
            "error" => Ok(FallbackPolicy::Error),
            other => Err(Error::Config(format!("unknown fallback policy {other:?}"))),
        }
    }
}

/// When to confirm the structured result with branch-and-bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossCheck {
    Off,
    /// Only for models with at most this many variables.
    Auto { max_variables: usize },
    Always,
}

impl Default for CrossCheck {
    fn default() -> Self {
        CrossCheck::Auto { max_variables: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub time_limit: Option<Duration>,
    pub fallback: FallbackPolicy,
    pub cross_check: CrossCheck,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            time_limit: Some(DEFAULT_TIME_LIMIT),
            fallback: FallbackPolicy::default(),
            cross_check: CrossCheck::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solved {
    pub selection: Selection,
    pub plan: JoinPlan,
    /// Whether branch-and-bound confirmed the objective.
    pub cross_checked: bool,
}

/// Solve one instance exactly.
pub fn solve(inst: &RerankInstance, options: &SolveOptions) -> Result<Solved> {
    let found = structured::solve_structured(inst, options.time_limit)?;
    let cross_checked = match options.cross_check {
        CrossCheck::Off => false,
        CrossCheck::Always => true,
        CrossCheck::Auto { max_variables } => model_size(inst) <= max_variables,
    };
    if cross_checked {
        confirm(inst, found.as_ref(), options.time_limit)?;
    }
    let selection = match found {
        Some(s) => s,
        None => match options.fallback {
            FallbackPolicy::TopK => structured::fallback_selection(inst),
            FallbackPolicy::Error => return Err(Error::Infeasible { k: inst.k() }),
        },
    };
    let plan = JoinPlan::from_selection(inst, &selection);
    Ok(Solved {
        selection,
        plan,
        cross_checked,
    })
}

/// Number of variables [`build_model`] would emit.
pub fn model_size(inst: &RerankInstance) -> usize {
    let n = inst.table_count();
    let cols: Vec<usize> = inst.tables().iter().map(|t| t.columns.len()).collect();
    let total: usize = cols.iter().sum();
    let ordered: usize = (0..n)
        .map(|i| cols[i] * (total - cols[i]))
        .sum();
    n * 4 + 2 * ordered + inst.sub_query_count() * (total + 1)
}

/// Re-solve with branch-and-bound, seeded just below the structured value,
/// and require the same optimum.
fn confirm(inst: &RerankInstance, found: Option<&Selection>, time_limit: Option<Duration>) -> Result<()> {
    let model = build_model(inst);
    let structured = found.map(|s| inst.objective(s));
    let tol = |v: f64| 1e-6 * (1.0 + v.abs());
    let options = BranchBoundOptions {
        floor: structured.map(|v| v - tol(v)),
        time_limit,
        ..BranchBoundOptions::default()
    };
    let result = branch_and_bound(&model, &options)?;
    let bb = result.best.as_ref().map(|b| b.0);
    let agree = match (structured, bb) {
        (Some(s), Some(b)) => (s - b).abs() <= tol(s),
        (None, None) => true,
        _ => false,
    };
    if !agree {
        return Err(Error::SolverDisagreement {
            structured: structured.unwrap_or(f64::NEG_INFINITY),
            branch_and_bound: bb.unwrap_or(f64::NEG_INFINITY),
        });
    }
    log::debug!("branch-and-bound confirmed the optimum in {} nodes", result.nodes);
    Ok(())
}

/// Violations of the plan invariants, as readable messages. Empty for a
/// valid plan.
pub fn check_selection(inst: &RerankInstance, selection: &Selection) -> Vec<String> {
    let mut problems = Vec::new();
    let k = inst.k();
    if selection.tables.len() != k {
        problems.push(format!("{} tables selected, expected {k}", selection.tables.len()));
    }
    if selection.edges.len() > k.saturating_sub(1) {
        problems.push(format!("{} joins exceed K-1", selection.edges.len()));
    }
    let mut pairs: Vec<(usize, usize)> = selection.edges.iter().map(|e| (e.i, e.j)).collect();
    pairs.sort_unstable();
    pairs.dedup();
    if pairs.len() != selection.edges.len() {
        problems.push("a table pair is joined more than once".into());
    }
    for e in &selection.edges {
        if !selection.tables.contains(&e.i) || !selection.tables.contains(&e.j) {
            problems.push("a join touches an unselected table".into());
        }
        if !inst.usable(e.omega) {
            problems.push("a join has unusable omega".into());
        }
    }
    if !selection.fallback {
        if !is_connected(&selection.tables, &pairs) {
            problems.push("selected tables are not connected".into());
        }
        if connectivity_flow(&selection.tables, &pairs) != k as u64 {
            problems.push("connectivity flow is below K".into());
        }
    }
    let mut slots: Vec<(usize, usize)> = selection.coverage.iter().map(|c| (c.0, c.1)).collect();
    slots.sort_unstable();
    slots.dedup();
    if slots.len() != selection.coverage.len() {
        problems.push("a table covers a sub-query twice".into());
    }
    if selection.coverage.len() > inst.sub_query_count() {
        problems.push("coverage exceeds the sub-query count".into());
    }
    if selection.coverage.iter().any(|c| !selection.tables.contains(&c.1)) {
        problems.push("coverage uses an unselected table".into());
    }
    problems
}

/// Objective recomputed from a plan by name lookup, independent of the
/// solver's bookkeeping.
pub fn plan_objective(inst: &RerankInstance, plan: &JoinPlan) -> f64 {
    let index = |name: &str| inst.tables().iter().position(|t| t.name == name).expect("plan table in pool");
    let column = |i: usize, c: &str| inst.tables()[i].columns.iter().position(|h| h == c).expect("plan column");
    let mut total = 0.0;
    for t in &plan.tables {
        total += inst.relevance(index(t));
    }
    for j in &plan.joins {
        let (i, jj) = (index(&j.left.table), index(&j.right.table));
        total += inst.omega(i, column(i, &j.left.column), jj, column(jj, &j.right.column));
    }
    for (q, cov) in plan.coverage.iter().enumerate() {
        for c in &cov.columns {
            let i = index(&c.table);
            total += inst.fine(q, i, column(i, &c.column));
        }
        if !cov.columns.is_empty() {
            total += inst.alpha();
        }
    }
    total
}
