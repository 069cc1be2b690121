//! The re-ranking program as an explicit mixed-integer linear model.

use std::collections::HashMap;

use super::instance::RerankInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

/// What a variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarRole {
    /// Table `i` selected.
    Table(usize),
    /// Column `k` of `i` joins column `l` of `j` (directed).
    Join { i: usize, k: usize, j: usize, l: usize },
    /// Flow along a join variable.
    Flow { i: usize, k: usize, j: usize, l: usize },
    /// Column `k` of table `i` answers sub-query `q`.
    Cover { q: usize, i: usize, k: usize },
    /// Sub-query `q` is answered at all.
    Covered(usize),
    /// Table `i` is the flow root.
    Root(usize),
    /// Flow injected at `i`.
    Supply(usize),
    /// Flow absorbed at `i`.
    Absorb(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub role: VarRole,
    pub kind: VarKind,
    pub lower: f64,
    /// `f64::INFINITY` when unbounded.
    pub upper: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Maximization model.
#[derive(Debug, Clone, PartialEq)]
pub struct MipModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    index: HashMap<VarRole, usize>,
}

impl MipModel {
    pub fn from_parts(variables: Vec<Variable>, constraints: Vec<Constraint>) -> Self {
        let index = variables.iter().enumerate().map(|(i, v)| (v.role, i)).collect();
        MipModel {
            variables,
            constraints,
            index,
        }
    }

    pub fn var(&self, role: VarRole) -> Option<usize> {
        self.index.get(&role).copied()
    }

    pub fn count(&self, pred: impl Fn(&VarRole) -> bool) -> usize {
        self.variables.iter().filter(|v| pred(&v.role)).count()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.variables.iter().zip(values).map(|(v, x)| v.objective * x).sum()
    }

    /// Largest violation of any bound or constraint.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &x) in self.variables.iter().zip(values) {
            worst = worst.max(v.lower - x).max(x - v.upper);
            if v.kind == VarKind::Binary {
                worst = worst.max((x - x.round()).abs());
            }
        }
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|&(j, a)| a * values[j]).sum();
            let gap = match c.sense {
                Sense::Le => lhs - c.rhs,
                Sense::Ge => c.rhs - lhs,
                Sense::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        worst
    }

    fn add_var(&mut self, name: String, role: VarRole, kind: VarKind, upper: f64, objective: f64) -> usize {
        let id = self.variables.len();
        self.variables.push(Variable {
            name,
            role,
            kind,
            lower: 0.0,
            upper,
            objective,
        });
        self.index.insert(role, id);
        id
    }

    fn add(&mut self, name: String, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint { name, terms, sense, rhs });
    }
}

/// Emit the full model. Joins whose omega is not usable keep their
/// variables but are fixed to 0.
pub fn build_model(inst: &RerankInstance) -> MipModel {
    let n = inst.table_count();
    let nq = inst.sub_query_count();
    let kk = inst.k() as f64;
    let big_m = kk;
    let cols: Vec<usize> = inst.tables().iter().map(|t| t.columns.len()).collect();
    let mut m = MipModel {
        variables: Vec::new(),
        constraints: Vec::new(),
        index: HashMap::new(),
    };

    let b: Vec<usize> = (0..n)
        .map(|i| m.add_var(format!("b_{i}"), VarRole::Table(i), VarKind::Binary, 1.0, inst.relevance(i)))
        .collect();
    let mut joins = Vec::new();
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            for k in 0..cols[i] {
                for l in 0..cols[j] {
                    let w = inst.omega(i, k, j, l);
                    let upper = if inst.usable(w) { 1.0 } else { 0.0 };
                    let c = m.add_var(
                        format!("c_{i}_{j}_{k}_{l}"),
                        VarRole::Join { i, k, j, l },
                        VarKind::Binary,
                        upper,
                        w,
                    );
                    joins.push((i, k, j, l, c));
                }
            }
        }
    }
    let mut cover = Vec::new();
    for q in 0..nq {
        for i in 0..n {
            for k in 0..cols[i] {
                let d = m.add_var(
                    format!("d_{q}_{i}_{k}"),
                    VarRole::Cover { q, i, k },
                    VarKind::Binary,
                    1.0,
                    inst.fine(q, i, k),
                );
                cover.push((q, i, k, d));
            }
        }
    }
    let covered: Vec<usize> = (0..nq)
        .map(|q| m.add_var(format!("dq_{q}"), VarRole::Covered(q), VarKind::Binary, 1.0, inst.alpha()))
        .collect();
    let root: Vec<usize> = (0..n)
        .map(|i| m.add_var(format!("e_{i}"), VarRole::Root(i), VarKind::Binary, 1.0, 0.0))
        .collect();
    let supply: Vec<usize> = (0..n)
        .map(|i| m.add_var(format!("s_{i}"), VarRole::Supply(i), VarKind::Continuous, f64::INFINITY, 0.0))
        .collect();
    let absorb: Vec<usize> = (0..n)
        .map(|i| m.add_var(format!("t_{i}"), VarRole::Absorb(i), VarKind::Continuous, 1.0, 0.0))
        .collect();
    let flows: Vec<(usize, usize, usize, usize, usize)> = joins
        .iter()
        .map(|&(i, k, j, l, _)| {
            let f = m.add_var(
                format!("f_{i}_{j}_{k}_{l}"),
                VarRole::Flow { i, k, j, l },
                VarKind::Continuous,
                f64::INFINITY,
                0.0,
            );
            (i, k, j, l, f)
        })
        .collect();

    m.add("c2_tables".into(), b.iter().map(|&v| (v, 1.0)).collect(), Sense::Eq, kk);
    m.add(
        "c2_joins".into(),
        joins.iter().map(|j| (j.4, 1.0)).collect(),
        Sense::Le,
        kk - 1.0,
    );
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..cols[i] {
                for l in 0..cols[j] {
                    let c_ij = m.var(VarRole::Join { i, k, j, l }).unwrap();
                    let c_ji = m.var(VarRole::Join { i: j, k: l, j: i, l: k }).unwrap();
                    m.add(
                        format!("c3_{i}_{j}_{k}_{l}"),
                        vec![(c_ij, 2.0), (c_ji, 2.0), (b[i], -1.0), (b[j], -1.0)],
                        Sense::Le,
                        0.0,
                    );
                }
            }
        }
    }
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let terms = joins
                .iter()
                .filter(|x| x.0 == i && x.2 == j)
                .map(|x| (x.4, 1.0))
                .collect();
            m.add(format!("c4_{i}_{j}"), terms, Sense::Le, 1.0);
        }
    }
    for q in 0..nq {
        for i in 0..n {
            let terms = cover
                .iter()
                .filter(|x| x.0 == q && x.1 == i)
                .map(|x| (x.3, 1.0))
                .collect();
            m.add(format!("c5_{q}_{i}"), terms, Sense::Le, 1.0);
        }
    }
    for i in 0..n {
        for k in 0..cols[i] {
            let mut terms: Vec<(usize, f64)> = cover
                .iter()
                .filter(|x| x.1 == i && x.2 == k)
                .map(|x| (x.3, 1.0 / nq as f64))
                .collect();
            terms.push((b[i], -1.0));
            m.add(format!("c6_{i}_{k}"), terms, Sense::Le, 0.0);
        }
    }
    for q in 0..nq {
        let mut terms = vec![(covered[q], 1.0)];
        terms.extend(cover.iter().filter(|x| x.0 == q).map(|x| (x.3, -1.0)));
        m.add(format!("cover_{q}"), terms, Sense::Le, 0.0);
    }
    m.add(
        "cover_budget".into(),
        cover.iter().map(|x| (x.3, 1.0)).collect(),
        Sense::Le,
        nq as f64,
    );

    for i in 0..n {
        let mut terms = vec![(supply[i], 1.0), (absorb[i], -1.0)];
        for &(a, _, z, _, f) in &flows {
            if z == i {
                terms.push((f, 1.0));
            }
            if a == i {
                terms.push((f, -1.0));
            }
        }
        m.add(format!("flow_balance_{i}"), terms, Sense::Eq, 0.0);
    }
    m.add("flow_sink".into(), absorb.iter().map(|&v| (v, 1.0)).collect(), Sense::Eq, kk);
    m.add("flow_root".into(), root.iter().map(|&v| (v, 1.0)).collect(), Sense::Eq, 1.0);
    for i in 0..n {
        m.add(format!("root_selected_{i}"), vec![(root[i], 1.0), (b[i], -big_m)], Sense::Le, 0.0);
        m.add(format!("root_supply_{i}"), vec![(supply[i], 1.0), (root[i], -kk)], Sense::Eq, 0.0);
    }
    for (&(i, k, j, l, c), &(_, _, _, _, f)) in joins.iter().zip(&flows) {
        m.add(format!("link_lo_{i}_{j}_{k}_{l}"), vec![(f, 1.0 / kk), (c, -1.0)], Sense::Le, 0.0);
        m.add(format!("link_hi_{i}_{j}_{k}_{l}"), vec![(c, 1.0), (f, -big_m)], Sense::Le, 0.0);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mip::instance::tests::toy_instance;

    fn three_by_two() -> RerankInstance {
        toy_instance(
            &[0.5, 0.25, 0.125],
            &[2, 2, 2],
            vec![vec![vec![0.0; 2]; 3]; 2],
            &[((0, 0, 1, 1), 0.5)],
            2,
            0.0,
        )
    }

    #[test]
    fn variable_counts() {
        let m = build_model(&three_by_two());
        assert_eq!(m.count(|r| matches!(r, VarRole::Table(_))), 3);
        assert_eq!(m.count(|r| matches!(r, VarRole::Join { .. })), 24);
        assert_eq!(m.count(|r| matches!(r, VarRole::Flow { .. })), 24);
        assert_eq!(m.count(|r| matches!(r, VarRole::Cover { .. })), 12);
        assert_eq!(m.count(|r| matches!(r, VarRole::Covered(_))), 2);
        assert_eq!(m.count(|r| matches!(r, VarRole::Root(_))), 3);
    }

    #[test]
    fn zero_alpha_removes_coverage_bonus() {
        let m = build_model(&three_by_two());
        assert!(m
            .variables
            .iter()
            .filter(|v| matches!(v.role, VarRole::Covered(_)))
            .all(|v| v.objective == 0.0));
    }

    #[test]
    fn unusable_joins_are_fixed_to_zero() {
        let m = build_model(&three_by_two());
        let open = m
            .variables
            .iter()
            .filter(|v| matches!(v.role, VarRole::Join { .. }) && v.upper > 0.0)
            .count();
        assert_eq!(open, 2);
    }

    #[test]
    fn c3_once_per_unordered_pair() {
        let m = build_model(&three_by_two());
        assert_eq!(m.constraints.iter().filter(|c| c.name.starts_with("c3_")).count(), 12);
        assert_eq!(m.constraints.iter().filter(|c| c.name.starts_with("c4_")).count(), 6);
    }
}
