//! Depth-first branch-and-bound over the binary variables of a [`MipModel`],
//! bounded by the linear relaxation.

use std::time::{Duration, Instant};

use super::lp::{solve_relaxation, LpOutcome};
use super::model::{MipModel, VarKind};
use crate::error::{Error, Result};

const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct BranchBoundOptions {
    /// Only solutions strictly above this value are of interest.
    pub floor: Option<f64>,
    pub node_limit: usize,
    pub time_limit: Option<Duration>,
}

impl Default for BranchBoundOptions {
    fn default() -> Self {
        BranchBoundOptions {
            floor: None,
            node_limit: 200_000,
            time_limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchBoundResult {
    /// Best integral solution found above the floor, if any.
    pub best: Option<(f64, Vec<f64>)>,
    pub nodes: usize,
}

pub fn branch_and_bound(model: &MipModel, options: &BranchBoundOptions) -> Result<BranchBoundResult> {
    let deadline = options.time_limit.map(|t| (Instant::now() + t, t));
    let lower: Vec<f64> = model.variables.iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = model.variables.iter().map(|v| v.upper).collect();
    let mut stack = vec![(lower, upper)];
    let mut incumbent = options.floor.unwrap_or(f64::NEG_INFINITY);
    let mut best = None;
    let mut nodes = 0;

    while let Some((lower, upper)) = stack.pop() {
        nodes += 1;
        if nodes > options.node_limit {
            return Err(Error::SearchLimit(format!(
                "branch-and-bound exceeded {} nodes",
                options.node_limit
            )));
        }
        if let Some((at, limit)) = deadline {
            if Instant::now() >= at {
                return Err(Error::TimeLimit(limit));
            }
        }
        let (bound, values) = match solve_relaxation(model, &lower, &upper) {
            LpOutcome::Optimal { objective, values } => (objective, values),
            LpOutcome::Infeasible => continue,
            LpOutcome::Unbounded => return Err(Error::Contract("linear relaxation is unbounded".into())),
            LpOutcome::PivotLimit => return Err(Error::SearchLimit("simplex pivot limit".into())),
        };
        if bound <= incumbent + 1e-9 * (1.0 + incumbent.abs()) {
            continue;
        }
        let branch = model.variables.iter().enumerate().find(|(j, v)| {
            v.kind == VarKind::Binary && (values[*j] - values[*j].round()).abs() > INTEGRALITY_TOL
        });
        match branch {
            None => {
                let mut x = values;
                for (xj, v) in x.iter_mut().zip(&model.variables) {
                    if v.kind == VarKind::Binary {
                        *xj = xj.round();
                    }
                }
                let value = model.objective_value(&x);
                if value > incumbent {
                    incumbent = value;
                    best = Some((value, x));
                }
            }
            Some((j, _)) => {
                let (mut down_upper, mut up_lower) = (upper.clone(), lower.clone());
                down_upper[j] = 0.0;
                up_lower[j] = 1.0;
                stack.push((lower, down_upper));
                stack.push((up_lower, upper));
            }
        }
    }
    Ok(BranchBoundResult { best, nodes })
}
