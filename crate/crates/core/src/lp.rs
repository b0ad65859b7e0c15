//! Linear programs for the restricted master problems, solved by a revised simplex.
//!
//! All variables are nonnegative; upper bounds are expressed as rows.

use std::collections::BTreeMap;

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, SolveOutcome};

use crate::error::{Error, Result};

/// Row residual accepted on a returned solution, relative to the largest right-hand side.
pub const FEASIBILITY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    /// Sparse `(variable, coefficient)` pairs.
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> Self {
        Constraint { coeffs, relation, rhs }
    }
}

/// `minimize objective · x` subject to the constraints and `x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}


impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram { num_vars, objective: vec![0.0; num_vars], constraints: Vec::new() }
    }

    pub fn add(&mut self, c: Constraint) {
        self.constraints.push(c);
    }

    /// Largest violation of any row or sign constraint at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = x.iter().map(|&v| (-v).max(0.0)).fold(0.0, f64::max);
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Solves to an optimal basic solution.
    ///
    /// Errors: [`Error::Infeasible`], [`Error::Unbounded`], or [`Error::NumericalInstability`]
    /// when the solver fails or its answer violates a row beyond [`FEASIBILITY_TOL`].
    pub fn solve(&self) -> Result<LpSolution> {
        let mut problem = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = self.objective.iter().map(|&c| problem.add_var(c, (0.0, f64::INFINITY))).collect();
        for c in &self.constraints {
            let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
            for &(j, a) in &c.coeffs {
                *merged.entry(j).or_default() += a;
            }
            let mut expr = LinearExpr::empty();
            for (j, a) in merged {
                if a != 0.0 {
                    expr.add(vars[j], a);
                }
            }
            let op = match c.relation {
                Relation::Le => ComparisonOp::Le,
                Relation::Ge => ComparisonOp::Ge,
                Relation::Eq => ComparisonOp::Eq,
            };
            problem.add_constraint(expr, op, c.rhs);
        }
        let solution = match problem.solve() {
            Ok(SolveOutcome::Solution(s)) => s,
            Ok(SolveOutcome::Interrupted(_)) => return Err(Error::NumericalInstability("solve interrupted".into())),
            Err(microlp::Error::Infeasible) => return Err(Error::Infeasible),
            Err(microlp::Error::Unbounded) => return Err(Error::Unbounded),
            Err(e) => return Err(Error::NumericalInstability(e.to_string())),
        };
        let x: Vec<f64> = vars.iter().map(|&v| solution.var_value_raw(v).max(0.0)).collect();
        let scale = 1.0 + self.constraints.iter().map(|c| c.rhs.abs()).fold(0.0, f64::max);
        let viol = self.max_violation(&x);
        if viol > FEASIBILITY_TOL * scale {
            return Err(Error::NumericalInstability(format!("row residual {viol:e}")));
        }
        let objective = x.iter().zip(&self.objective).map(|(a, b)| a * b).sum();
        Ok(LpSolution { x, objective, pivots: solution.stats().lp_iterations as usize })
    }
}
