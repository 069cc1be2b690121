//! Dense two-phase primal simplex for the linear relaxation.
//!
//! Variables are shifted to a zero lower bound, fixed variables are
//! substituted out, and finite upper bounds become explicit rows. Dantzig
//! pricing switches to Bland's rule after a run of degenerate pivots.

use super::model::{MipModel, Sense};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;
const MAX_PIVOTS: usize = 100_000;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { objective: f64, values: Vec<f64> },
    Infeasible,
    Unbounded,
    PivotLimit,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

enum Run {
    Done,
    Unbounded,
    Limit,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.width - 1]
    }

    fn pivot(&mut self, obj: &mut [f64], r: usize, c: usize) {
        let p = self.rows[r][c];
        self.rows[r].iter_mut().for_each(|x| *x /= p);
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                row.iter_mut().zip(&pivot_row).for_each(|(x, y)| *x -= f * y);
                row[c] = 0.0;
            }
        }
        let f = obj[c];
        if f != 0.0 {
            obj.iter_mut().zip(&pivot_row).for_each(|(x, y)| *x -= f * y);
            obj[c] = 0.0;
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Reduced-profit row for `cost`, with the negated objective in the last slot.
    fn objective_row(&self, cost: &[f64]) -> Vec<f64> {
        let mut obj: Vec<f64> = cost.to_vec();
        obj.push(0.0);
        for (r, row) in self.rows.iter().enumerate() {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                obj.iter_mut().zip(row).for_each(|(x, y)| *x -= cb * y);
            }
        }
        obj
    }

    fn run(&mut self, obj: &mut [f64], allowed: &[bool], pivots: &mut usize) -> Run {
        let mut degenerate = 0;
        loop {
            let bland = degenerate >= DEGENERATE_RUN;
            let mut entering = None;
            let mut best = COST_TOL;
            for (j, &d) in obj[..self.width - 1].iter().enumerate() {
                if allowed[j] && d > best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(c) = entering else {
                return Run::Done;
            };
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][c];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r).max(0.0) / a;
                    let replace = match leaving {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - 1e-12
                                || (ratio <= lratio + 1e-12 && self.basis[r] < self.basis[lr])
                        }
                    };
                    if replace {
                        leaving = Some((r, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leaving else {
                return Run::Unbounded;
            };
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(obj, r, c);
            *pivots += 1;
            if *pivots > MAX_PIVOTS {
                return Run::Limit;
            }
        }
    }
}

/// Maximize the model's objective over its linear relaxation with the given
/// per-variable bounds.
pub fn solve_relaxation(model: &MipModel, lower: &[f64], upper: &[f64]) -> LpOutcome {
    let nv = model.variables.len();
    let mut column = vec![usize::MAX; nv];
    let mut free = Vec::new();
    for j in 0..nv {
        if upper[j] < lower[j] - FEAS_TOL {
            return LpOutcome::Infeasible;
        }
        if upper[j] - lower[j] > 1e-12 {
            column[j] = free.len();
            free.push(j);
        }
    }
    let nf = free.len();

    // rows as (terms over free columns, sense, rhs)
    let mut rows: Vec<(Vec<(usize, f64)>, Sense, f64)> = Vec::new();
    for c in &model.constraints {
        let mut rhs = c.rhs;
        let mut terms = Vec::new();
        for &(j, a) in &c.terms {
            rhs -= a * lower[j];
            if column[j] != usize::MAX && a != 0.0 {
                terms.push((column[j], a));
            }
        }
        if terms.is_empty() {
            let ok = match c.sense {
                Sense::Le => rhs >= -FEAS_TOL,
                Sense::Ge => rhs <= FEAS_TOL,
                Sense::Eq => rhs.abs() <= FEAS_TOL,
            };
            if !ok {
                return LpOutcome::Infeasible;
            }
            continue;
        }
        rows.push((terms, c.sense, rhs));
    }
    for (col, &j) in free.iter().enumerate() {
        if upper[j].is_finite() {
            rows.push((vec![(col, 1.0)], Sense::Le, upper[j] - lower[j]));
        }
    }
    for row in &mut rows {
        if row.2 < 0.0 {
            row.0.iter_mut().for_each(|t| t.1 = -t.1);
            row.2 = -row.2;
            row.1 = match row.1 {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }

    let m = rows.len();
    let slacks = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let artificials = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let ncols = nf + slacks + artificials;
    let width = ncols + 1;
    let mut tableau = Tableau {
        rows: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        width,
    };
    let mut is_artificial = vec![false; ncols];
    let (mut next_slack, mut next_art) = (nf, nf + slacks);
    for (terms, sense, rhs) in &rows {
        let mut row = vec![0.0; width];
        for &(c, a) in terms {
            row[c] += a;
        }
        row[width - 1] = *rhs;
        match sense {
            Sense::Le => {
                row[next_slack] = 1.0;
                tableau.basis.push(next_slack);
                next_slack += 1;
            }
            Sense::Ge => {
                row[next_slack] = -1.0;
                next_slack += 1;
                row[next_art] = 1.0;
                is_artificial[next_art] = true;
                tableau.basis.push(next_art);
                next_art += 1;
            }
            Sense::Eq => {
                row[next_art] = 1.0;
                is_artificial[next_art] = true;
                tableau.basis.push(next_art);
                next_art += 1;
            }
        }
        tableau.rows.push(row);
    }

    let mut pivots = 0;
    if artificials > 0 {
        let cost: Vec<f64> = is_artificial.iter().map(|&a| if a { -1.0 } else { 0.0 }).collect();
        let mut obj = tableau.objective_row(&cost);
        let all = vec![true; ncols];
        match tableau.run(&mut obj, &all, &mut pivots) {
            Run::Done => {}
            Run::Limit => return LpOutcome::PivotLimit,
            Run::Unbounded => unreachable!("phase one is bounded"),
        }
        let infeasibility: f64 = (0..m)
            .filter(|&r| is_artificial[tableau.basis[r]])
            .map(|r| tableau.rhs(r))
            .sum();
        if infeasibility > FEAS_TOL {
            return LpOutcome::Infeasible;
        }
        for r in 0..m {
            if is_artificial[tableau.basis[r]] {
                let c = (0..ncols).find(|&c| !is_artificial[c] && tableau.rows[r][c].abs() > PIVOT_TOL);
                if let Some(c) = c {
                    tableau.pivot(&mut obj, r, c);
                }
            }
        }
    }

    let mut cost = vec![0.0; ncols];
    for (col, &j) in free.iter().enumerate() {
        cost[col] = model.variables[j].objective;
    }
    let mut obj = tableau.objective_row(&cost);
    let allowed: Vec<bool> = is_artificial.iter().map(|a| !a).collect();
    match tableau.run(&mut obj, &allowed, &mut pivots) {
        Run::Done => {}
        Run::Limit => return LpOutcome::PivotLimit,
        Run::Unbounded => return LpOutcome::Unbounded,
    }

    let mut values = lower.to_vec();
    for r in 0..m {
        let c = tableau.basis[r];
        if c < nf {
            values[free[c]] = lower[free[c]] + tableau.rhs(r).max(0.0);
        }
    }
    LpOutcome::Optimal {
        objective: model.objective_value(&values),
        values,
    }
}
