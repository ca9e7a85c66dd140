use std::collections::BTreeSet;
use std::fmt::Write as _;

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use super::{EnergyError, EnergyModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    /// Cell occupancy `x`.
    Occupancy,
    /// Primitive slack `s`.
    Slack,
    /// Visibility absolute value `t`.
    Difference,
    /// Isolated ring position `y`.
    RingCrease,
    /// Edge has a crease, `k`.
    EdgeCrease,
    /// Vertex is a corner, `z`.
    Corner,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Ge,
    Le,
    Eq,
}

/// `sum(coef * var) cmp rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(usize, f64)>,
    pub cmp: Comparison,
    pub rhs: f64,
}

/// Minimization problem with bounded variables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub vars: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Variable index of each cell occupancy.
    pub occupancy: Vec<usize>,
    pub hard_empty: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    /// Value of every variable.
    pub values: Vec<f64>,
    pub objective: f64,
}

/// Anything that can minimize a [`LinearProgram`].
pub trait LpSolver {
    fn minimize(&self, lp: &LinearProgram) -> Result<LpSolution, String>;
}

/// Embedded sparse simplex solver.
#[derive(Debug, Clone, Copy, Default)]
pub struct MicroLp;

impl LpSolver for MicroLp {
    fn minimize(&self, lp: &LinearProgram) -> Result<LpSolution, String> {
        let mut problem = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = lp.vars.iter().map(|v| problem.add_var(v.cost, (v.lower, v.upper))).collect();
        for c in &lp.constraints {
            let expr: Vec<_> = c.terms.iter().map(|&(i, a)| (vars[i], a)).collect();
            let op = match c.cmp {
                Comparison::Ge => ComparisonOp::Ge,
                Comparison::Le => ComparisonOp::Le,
                Comparison::Eq => ComparisonOp::Eq,
            };
            problem.add_constraint(expr.as_slice(), op, c.rhs);
        }
        let outcome = problem.solve().map_err(|e| e.to_string())?;
        let solution = outcome.into_solution().map_err(|_| "solve interrupted".to_string())?;
        let values: Vec<f64> = vars.iter().map(|&v| solution.var_value(v)).collect();
        let objective = lp.objective_of(&values);
        Ok(LpSolution { values, objective })
    }
}

impl LinearProgram {
    fn add_var(&mut self, name: String, kind: VarKind, lower: f64, upper: f64, cost: f64) -> usize {
        self.vars.push(Variable { name, kind, lower, upper, cost });
        self.vars.len() - 1
    }

    fn add(&mut self, terms: Vec<(usize, f64)>, cmp: Comparison, rhs: f64) {
        self.constraints.push(Constraint { terms, cmp, rhs });
    }

    pub fn objective_of(&self, values: &[f64]) -> f64 {
        self.vars.iter().zip(values).map(|(v, x)| v.cost * x).sum()
    }

    /// Occupancy values of a solution.
    pub fn occupancies(&self, sol: &LpSolution) -> Vec<f64> {
        self.occupancy.iter().map(|&i| sol.values[i].clamp(0.0, 1.0)).collect()
    }

    /// CPLEX LP text format.
    pub fn to_lp_text(&self) -> String {
        let mut out = String::new();
        let term = |out: &mut String, first: bool, coef: f64, name: &str| {
            let sign = if coef < 0.0 { " -" } else if first { "" } else { " +" };
            let _ = write!(out, "{sign} {} {name}", coef.abs());
        };
        out.push_str("\\ occupancy labeling relaxation\nMinimize\n obj:");
        let mut first = true;
        for v in self.vars.iter().filter(|v| v.cost != 0.0) {
            term(&mut out, first, v.cost, &v.name);
            first = false;
        }
        if first {
            out.push_str(" 0");
        }
        out.push_str("\nSubject To\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let _ = write!(out, " c{i}:");
            for (j, &(v, a)) in c.terms.iter().enumerate() {
                term(&mut out, j == 0, a, &self.vars[v].name);
            }
            let op = match c.cmp {
                Comparison::Ge => ">=",
                Comparison::Le => "<=",
                Comparison::Eq => "=",
            };
            let _ = writeln!(out, " {op} {}", c.rhs);
        }
        out.push_str("Bounds\n");
        for v in &self.vars {
            if v.upper.is_finite() {
                let _ = writeln!(out, " {} <= {} <= {}", v.lower, v.name, v.upper);
            } else {
                let _ = writeln!(out, " {} >= {}", v.name, v.lower);
            }
        }
        out.push_str("End\n");
        out
    }
}

/// Relaxed labeling problem: occupancies in `[0, 1]`, one slack per
/// primitive group, two-sided differences per visibility pair, ring-crease
/// variables per edge position and corner variables per vertex.
pub fn to_lp(model: &EnergyModel) -> LinearProgram {
    let mut lp = LinearProgram { hard_empty: model.hard_empty.clone(), ..Default::default() };
    for c in 0..model.cell_count {
        let upper = if model.hard_empty.contains(&c) { 0.0 } else { 1.0 };
        let v = lp.add_var(format!("x{c}"), VarKind::Occupancy, 0.0, upper, 0.0);
        lp.occupancy.push(v);
    }
    let x = lp.occupancy.clone();
    for (k, g) in model.primitive.iter().enumerate() {
        let s = lp.add_var(format!("s{k}"), VarKind::Slack, 0.0, f64::INFINITY, g.weight);
        let mut terms = vec![(s, 1.0)];
        terms.extend(g.cells.iter().map(|&c| (x[c], 1.0)));
        lp.add(terms, Comparison::Ge, 1.0);
    }
    for (j, p) in model.visibility.iter().enumerate() {
        let t = lp.add_var(format!("t{j}"), VarKind::Difference, 0.0, f64::INFINITY, p.weight);
        lp.add(vec![(t, 1.0), (x[p.a], -1.0), (x[p.b], 1.0)], Comparison::Ge, 0.0);
        lp.add(vec![(t, 1.0), (x[p.a], 1.0), (x[p.b], -1.0)], Comparison::Ge, 0.0);
    }
    let mut in_corner = vec![false; model.edges.len()];
    for c in &model.corners {
        for &(a, b) in &c.pairs {
            in_corner[a] = true;
            in_corner[b] = true;
        }
    }
    let mut crease = vec![usize::MAX; model.edges.len()];
    for (e, term) in model.edges.iter().enumerate() {
        let m = term.ring.len();
        let k = in_corner[e].then(|| lp.add_var(format!("k{e}"), VarKind::EdgeCrease, 0.0, 1.0, 0.0));
        for i in 0..m {
            let prev = x[term.ring[(i + m - 1) % m]];
            let cur = x[term.ring[i]];
            let next = x[term.ring[(i + 1) % m]];
            let y = lp.add_var(format!("y{e}_{i}"), VarKind::RingCrease, 0.0, f64::INFINITY, term.weight);
            lp.add(vec![(y, 1.0), (cur, -2.0), (prev, 1.0), (next, 1.0)], Comparison::Ge, -1.0);
            lp.add(vec![(y, 1.0), (cur, 2.0), (prev, -1.0), (next, -1.0)], Comparison::Ge, -1.0);
            if let Some(k) = k {
                lp.add(vec![(k, 1.0), (y, -1.0)], Comparison::Ge, 0.0);
            }
        }
        if let Some(k) = k {
            crease[e] = k;
        }
    }
    for c in &model.corners {
        let z = lp.add_var(format!("z{}", c.vertex), VarKind::Corner, 0.0, 1.0, c.weight);
        for &(a, b) in &c.pairs {
            lp.add(vec![(z, 1.0), (crease[a], -1.0), (crease[b], -1.0)], Comparison::Ge, -1.0);
        }
    }
    lp
}

/// Solves the relaxation with the embedded solver.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, EnergyError> {
    solve_lp_with(lp, &MicroLp)
}

pub fn solve_lp_with(lp: &LinearProgram, solver: &dyn LpSolver) -> Result<LpSolution, EnergyError> {
    solver.minimize(lp).map_err(EnergyError::SolverFailure)
}

/// `x >= 0.5` becomes full; hard-empty cells stay empty.
pub fn round(x: &[f64], hard_empty: &BTreeSet<usize>) -> Vec<bool> {
    x.iter().enumerate().map(|(c, &v)| v >= 0.5 && !hard_empty.contains(&c)).collect()
}
