use std::time::{Duration, Instant};

use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOutcome};

use super::{LpProblem, LpSettings, LpSolveResult, LpSolver, LpStatus, Sense};
use crate::error::{Error, Result};

/// Dual simplex backend on `microlp`. Returns vertex solutions.
#[derive(Debug, Clone)]
pub struct SimplexBackend {
    settings: LpSettings,
}

impl SimplexBackend {
    pub fn new(settings: LpSettings) -> Self {
        Self { settings }
    }
}

impl LpSolver for SimplexBackend {
    fn name(&self) -> &'static str {
        "simplex"
    }

    fn solve(&mut self, problem: &LpProblem) -> Result<LpSolveResult> {
        let start = Instant::now();
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        if let Some(t) = self.settings.time_limit {
            lp.set_time_limit(Duration::from_secs_f64(t.max(0.0)));
        }
        let vars: Vec<_> = problem.columns().iter().map(|c| lp.add_var(c.cost, (c.lower, c.upper))).collect();
        for (_, row) in problem.rows() {
            let op = match row.sense {
                Sense::Le => ComparisonOp::Le,
                Sense::Ge => ComparisonOp::Ge,
                Sense::Eq => ComparisonOp::Eq,
            };
            let mut terms: Vec<(usize, f64)> = row.terms.clone();
            terms.sort_by_key(|&(j, _)| j);
            terms.dedup_by(|a, b| {
                if a.0 == b.0 {
                    b.1 += a.1;
                    true
                } else {
                    false
                }
            });
            lp.add_constraint(terms.iter().map(|&(j, a)| (vars[j], a)).collect::<Vec<_>>(), op, row.rhs);
        }
        let elapsed = |s: Instant| s.elapsed().as_secs_f64();
        match lp.solve() {
            Ok(SolveOutcome::Solution(sol)) => Ok(LpSolveResult {
                status: LpStatus::Optimal,
                objective: sol.objective(),
                primal: vars.iter().map(|&v| sol.var_value(v)).collect(),
                dual_infeasibility: None,
                solve_time: elapsed(start),
            }),
            Ok(SolveOutcome::Interrupted(_)) => Ok(LpSolveResult {
                status: LpStatus::Limit,
                objective: f64::NAN,
                primal: vec![],
                dual_infeasibility: None,
                solve_time: elapsed(start),
            }),
            Err(microlp::Error::Infeasible) => Ok(empty(LpStatus::Infeasible, elapsed(start))),
            Err(microlp::Error::Unbounded) => Ok(empty(LpStatus::Unbounded, elapsed(start))),
            Err(e) => Err(Error::Backend { backend: "simplex".into(), message: e.to_string() }),
        }
    }
}

fn empty(status: LpStatus, t: f64) -> LpSolveResult {
    LpSolveResult { status, objective: f64::NAN, primal: vec![], dual_infeasibility: None, solve_time: t }
}
