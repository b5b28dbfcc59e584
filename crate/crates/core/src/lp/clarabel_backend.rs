use std::time::Instant;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SolverStatus, SupportedConeT, ZeroConeT,
};

use super::{LpProblem, LpSettings, LpSolveResult, LpSolver, LpStatus, Sense};
use crate::error::{Error, Result};

/// Interior-point backend on the Clarabel conic solver.
///
/// Equalities go into a zero cone; inequalities and finite column bounds are
/// written as `a x + s = b, s >= 0`.
#[derive(Debug, Clone)]
pub struct ClarabelBackend {
    settings: LpSettings,
}

impl ClarabelBackend {
    pub fn new(settings: LpSettings) -> Self {
        Self { settings }
    }
}

impl LpSolver for ClarabelBackend {
    fn name(&self) -> &'static str {
        "clarabel"
    }

    fn solve(&mut self, problem: &LpProblem) -> Result<LpSolveResult> {
        let start = Instant::now();
        let n = problem.column_count();
        let mut eq_rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
        let mut ineq_rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
        for (_, row) in problem.rows() {
            match row.sense {
                Sense::Eq => eq_rows.push((row.terms.clone(), row.rhs)),
                Sense::Le => ineq_rows.push((row.terms.clone(), row.rhs)),
                Sense::Ge => ineq_rows.push((row.terms.iter().map(|&(j, a)| (j, -a)).collect(), -row.rhs)),
            }
        }
        for (j, col) in problem.columns().iter().enumerate() {
            if col.upper.is_finite() {
                ineq_rows.push((vec![(j, 1.0)], col.upper));
            }
            if col.lower.is_finite() {
                ineq_rows.push((vec![(j, -1.0)], -col.lower));
            }
        }
        if ineq_rows.is_empty() {
            ineq_rows.push((vec![], 1.0));
        }

        let m = eq_rows.len() + ineq_rows.len();
        let mut triplets: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut b = Vec::with_capacity(m);
        for (i, (terms, rhs)) in eq_rows.iter().chain(ineq_rows.iter()).enumerate() {
            for &(j, a) in terms {
                if a != 0.0 {
                    triplets[j].push((i, a));
                }
            }
            b.push(*rhs);
        }
        let mut colptr = Vec::with_capacity(n + 1);
        let mut rowval = Vec::new();
        let mut nzval = Vec::new();
        colptr.push(0);
        for col in &mut triplets {
            col.sort_by_key(|&(i, _)| i);
            // merge duplicate entries
            let mut last: Option<usize> = None;
            for &(i, a) in col.iter() {
                if last == Some(i) {
                    *nzval.last_mut().expect("entry") += a;
                } else {
                    rowval.push(i);
                    nzval.push(a);
                    last = Some(i);
                }
            }
            colptr.push(rowval.len());
        }
        let a = CscMatrix::new(m, n, colptr, rowval, nzval);
        let p = CscMatrix::<f64>::zeros((n, n));
        let q: Vec<f64> = problem.columns().iter().map(|c| c.cost).collect();
        let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
        if !eq_rows.is_empty() {
            cones.push(ZeroConeT(eq_rows.len()));
        }
        cones.push(NonnegativeConeT(ineq_rows.len()));

        let s = &self.settings;
        let mut builder = DefaultSettingsBuilder::default();
        builder
            .verbose(false)
            .max_iter(s.max_iter)
            .tol_feas(s.feasibility_tol)
            .tol_gap_abs(s.optimality_tol)
            .tol_gap_rel(s.optimality_tol)
            .tol_infeas_abs(s.feasibility_tol.min(1e-8))
            .tol_infeas_rel(s.feasibility_tol.min(1e-8));
        if let Some(t) = s.time_limit {
            builder.time_limit(t);
        }
        let settings = builder.build().map_err(|e| backend_err(format!("settings: {e}")))?;
        let mut solver =
            DefaultSolver::new(&p, &q, &a, &b, &cones, settings).map_err(|e| backend_err(format!("setup: {e:?}")))?;
        solver.solve();
        let sol = &solver.solution;
        let status = match sol.status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => LpStatus::Optimal,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => LpStatus::Infeasible,
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => LpStatus::Unbounded,
            SolverStatus::MaxIterations | SolverStatus::MaxTime => LpStatus::Limit,
            other => return Err(backend_err(format!("solver status {other:?}"))),
        };
        if sol.status == SolverStatus::AlmostSolved {
            log::debug!("clarabel returned reduced-accuracy solution");
        }
        Ok(LpSolveResult {
            status,
            objective: if status == LpStatus::Optimal { sol.obj_val } else { f64::NAN },
            primal: sol.x.clone(),
            dual_infeasibility: Some(sol.r_dual),
            solve_time: start.elapsed().as_secs_f64(),
        })
    }
}

fn backend_err(message: String) -> Error {
    Error::Backend { backend: "clarabel".into(), message }
}
