//! LP backend abstraction.
//!
//! [`LpProblem`] is the solver-neutral model snapshot: bounded columns, an
//! objective, and rows addressed by stable [`RowId`]s so that cuts can be
//! added and removed between solves. Backends rebuild their internal model
//! from the snapshot on each solve.

mod clarabel_backend;
mod simplex_backend;

use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub use clarabel_backend::ClarabelBackend;
pub use simplex_backend::SimplexBackend;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn new(terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Self {
        Self { terms, sense, rhs }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which the row is violated at `x` (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, Default)]
pub struct LpProblem {
    columns: Vec<Column>,
    rows: BTreeMap<RowId, Row>,
    next_row: u64,
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_column(&mut self, lower: f64, upper: f64, cost: f64) -> usize {
        self.columns.push(Column { lower, upper, cost });
        self.columns.len() - 1
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn set_cost(&mut self, col: usize, cost: f64) {
        self.columns[col].cost = cost;
    }

    pub fn add_row(&mut self, row: Row) -> RowId {
        debug_assert!(row.terms.iter().all(|&(j, _)| j < self.columns.len()));
        let id = RowId(self.next_row);
        self.next_row += 1;
        self.rows.insert(id, row);
        id
    }

    pub fn add_rows(&mut self, rows: impl IntoIterator<Item = Row>) -> Vec<RowId> {
        rows.into_iter().map(|r| self.add_row(r)).collect()
    }

    pub fn remove_row(&mut self, id: RowId) -> Result<Row> {
        self.rows.remove(&id).ok_or(Error::UnknownRow(id.0))
    }

    pub fn remove_rows(&mut self, ids: &[RowId]) -> Result<()> {
        if let Some(bad) = ids.iter().find(|id| !self.rows.contains_key(id)) {
            return Err(Error::UnknownRow(bad.0));
        }
        for id in ids {
            self.rows.remove(id);
        }
        Ok(())
    }

    pub fn row(&self, id: RowId) -> Option<&Row> {
        self.rows.get(&id)
    }

    pub fn rows(&self) -> impl Iterator<Item = (RowId, &Row)> {
        self.rows.iter().map(|(id, r)| (*id, r))
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.columns.iter().zip(x).map(|(c, v)| c.cost * v).sum()
    }

    /// Largest row or bound violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.rows.values().map(|r| r.violation(x)).fold(0.0, f64::max);
        let bounds = self
            .columns
            .iter()
            .zip(x)
            .map(|(c, &v)| (c.lower - v).max(v - c.upper).max(0.0))
            .fold(0.0, f64::max);
        rows.max(bounds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    Limit,
}

#[derive(Debug, Clone)]
pub struct LpSolveResult {
    pub status: LpStatus,
    pub objective: f64,
    pub primal: Vec<f64>,
    /// Dual residual reported by the backend, when it exposes one.
    pub dual_infeasibility: Option<f64>,
    pub solve_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpSettings {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub time_limit: Option<f64>,
    pub max_iter: u32,
}

impl Default for LpSettings {
    fn default() -> Self {
        Self { feasibility_tol: 1e-6, optimality_tol: 1e-6, time_limit: None, max_iter: 500 }
    }
}

pub trait LpSolver: Send {
    fn name(&self) -> &'static str;

    fn solve(&mut self, problem: &LpProblem) -> Result<LpSolveResult>;
}

pub const BACKENDS: &[&str] = &["clarabel", "simplex"];

/// Instantiates a backend by name.
pub fn backend_by_name(name: &str, settings: LpSettings) -> Result<Box<dyn LpSolver>> {
    match name {
        "clarabel" | "ipm" => Ok(Box::new(ClarabelBackend::new(settings))),
        "simplex" | "microlp" => Ok(Box::new(SimplexBackend::new(settings))),
        other => Err(Error::Backend {
            backend: other.to_string(),
            message: format!("unknown backend; available: {}", BACKENDS.join(", ")),
        }),
    }
}
