//! The solve / separate / manage loop and its report.

use std::fmt;
use std::io::BufRead;
use std::time::Instant;

use serde::Serialize;

use crate::case_io::CaseData;
use crate::cut_pool::{load_cuts, CutPool, LoadStats, PoolSettings};
use crate::error::{Error, Result};
use crate::linalg::eigen;
use crate::lp::{backend_by_name, LpSettings, LpStatus};
use crate::network::{chordal_cliques, enumerate_three_cycles, format_counts, CliqueSet};
use crate::relaxation::{ModelOptions, RelaxationModel};
use crate::separation::{separate, ExtraSeparator, SeparationSettings};

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Wall-clock budget in seconds.
    pub time_limit: f64,
    /// Consecutive rounds of insufficient improvement before stopping.
    pub stall_limit: usize,
    /// Relative improvement below which a round counts as stalled.
    pub improve_tol: f64,
    /// Threshold from which chordal cliques join the 3-cycles.
    pub hierarchy_round: usize,
    pub escalation: Escalation,
    pub max_clique_size: usize,
    pub max_rounds: Option<usize>,
    pub pool: PoolSettings,
    pub separation: SeparationSettings,
    pub model: ModelOptions,
    pub lp_backend: String,
    pub lp: LpSettings,
    /// Known AC optimum; rounds above it are logged as suspicious.
    pub known_ac: Option<f64>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            time_limit: 1200.0,
            stall_limit: 5,
            improve_tol: 1e-5,
            hierarchy_round: 5,
            escalation: Escalation::Round,
            max_clique_size: 5,
            max_rounds: None,
            pool: PoolSettings::default(),
            separation: SeparationSettings::default(),
            model: ModelOptions::default(),
            lp_backend: "clarabel".into(),
            lp: LpSettings::default(),
            known_ac: None,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Invariant(format!("invalid run config: {m}")));
        if !(self.time_limit >= 0.0) {
            return bad("time limit must be nonnegative");
        }
        if self.hierarchy_round < 1 {
            return bad("hierarchy round must be at least 1");
        }
        if !(3..=5).contains(&self.max_clique_size) {
            return bad("max clique size must be 3, 4 or 5");
        }
        if self.stall_limit == 0 || !(self.improve_tol > 0.0) {
            return bad("stall limit and improvement tolerance must be positive");
        }
        Ok(())
    }
}

/// What `hierarchy_round` is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Escalation {
    /// Zero-based round index plus one, i.e. rounds completed.
    Round,
    /// The stall counter. Never fires when `stall_limit <= hierarchy_round`.
    Stall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Time,
    Stall,
    NoCuts,
    RoundLimit,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Time => "time",
            Termination::Stall => "stall",
            Termination::NoCuts => "no_cuts",
            Termination::RoundLimit => "round_limit",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub objective: f64,
    pub added: usize,
    pub dropped: usize,
    pub active_cuts: usize,
    pub max_violation: f64,
    pub lp_time: f64,
    pub wall_time: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub case_name: String,
    pub rounds: Vec<RoundRecord>,
    pub best_bound: f64,
    pub clique_counts: (usize, usize, usize),
    pub eig_ratio: Option<f64>,
    pub dual_infeasibility: Option<f64>,
    pub termination: Termination,
    pub total_time: f64,
    pub warm: Option<WarmInfo>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WarmInfo {
    pub loaded: usize,
    pub skipped: usize,
}

impl RunReport {
    pub fn total_added(&self) -> usize {
        self.rounds.iter().map(|r| r.added).sum()
    }

    /// First round whose objective reaches `target`.
    pub fn rounds_to_reach(&self, target: f64) -> Option<usize> {
        self.rounds.iter().position(|r| r.objective >= target)
    }
}

/// Final state of a run; `model` carries the last solution.
#[derive(Debug)]
pub struct Run {
    pub report: RunReport,
    pub model: RelaxationModel,
    pub pool: CutPool,
    pub cliques: CliqueSet,
}

pub fn cutplane(case: &CaseData, config: &RunConfig, warm: Option<&mut dyn BufRead>) -> Result<Run> {
    cutplane_with(case, config, warm, &[])
}

/// Runs the cutting-plane loop. Each round: solve, separate, admit, drop,
/// possibly extend the clique family, then test the stopping rules.
pub fn cutplane_with(
    case: &CaseData,
    config: &RunConfig,
    warm: Option<&mut dyn BufRead>,
    extra: &[&dyn ExtraSeparator],
) -> Result<Run> {
    config.validate()?;
    case.validate()?;
    let start = Instant::now();
    let mut model = RelaxationModel::build(case, config.model)?;
    let (mut pool, warm_info) = match warm {
        Some(input) => {
            let (pool, LoadStats { loaded, skipped, .. }) = load_cuts(input, &mut model, config.pool)?;
            log::info!("warm start: {loaded} cuts loaded, {skipped} skipped");
            (pool, Some(WarmInfo { loaded, skipped }))
        }
        None => (CutPool::new(config.pool), None),
    };
    let mut cliques = enumerate_three_cycles(&model.graph);
    let mut escalated = false;
    let mut solver = backend_by_name(&config.lp_backend, config.lp)?;

    let mut rounds = Vec::new();
    let mut best = f64::NEG_INFINITY;
    let mut stall = 0;
    let mut z_prev: Option<f64> = None;
    let mut dinf;
    let termination;
    let mut round = 0;
    loop {
        let round_start = Instant::now();
        let res = solver.solve(&model.lp)?;
        match res.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Err(Error::Infeasible { round }),
            LpStatus::Unbounded => return Err(Error::Unbounded { round }),
            LpStatus::Limit => {
                return Err(Error::Backend {
                    backend: solver.name().into(),
                    message: format!("iteration or time limit hit in round {round}"),
                })
            }
        }
        let z = res.objective;
        dinf = res.dual_infeasibility;
        model.solution = Some(res.primal);
        model.round = round;
        best = best.max(z);
        if let Some(ac) = config.known_ac {
            if z > ac * (1.0 + 1e-6) {
                log::warn!("round {round}: objective {z} exceeds the known AC value {ac}");
            }
        }
        let mut record = RoundRecord {
            round,
            objective: z,
            added: 0,
            dropped: 0,
            active_cuts: pool.len(),
            max_violation: 0.0,
            lp_time: res.solve_time,
            wall_time: 0.0,
        };

        if start.elapsed().as_secs_f64() >= config.time_limit {
            record.wall_time = round_start.elapsed().as_secs_f64();
            rounds.push(record);
            termination = Termination::Time;
            break;
        }

        let point = model.solution.clone().expect("just solved");
        let sep = separate(&model, &point, &cliques, round, &config.separation, extra)?;
        record.max_violation = sep.max_violation;
        let found = sep.cuts.len();
        let admitted = pool.admit(&mut model.lp, sep.cuts);
        let dropped = pool.age_and_drop(&mut model.lp, &point)?;
        record.added = admitted.len();
        record.dropped = dropped.len();
        record.active_cuts = pool.len();

        let mut widened = false;
        let level = match config.escalation {
            Escalation::Round => round + 1,
            Escalation::Stall => stall,
        };
        if !escalated && level >= config.hierarchy_round {
            let chordal = chordal_cliques(&model.graph, config.max_clique_size);
            let pairs = model.add_aux_pairs(chordal.aux_pairs.iter().copied());
            let before = cliques.len();
            cliques.merge(chordal);
            escalated = true;
            widened = cliques.len() > before;
            log::info!("round {round}: clique family now {} ({pairs} auxiliary pairs)", format_counts(cliques.counts()));
        }

        if let Some(prev) = z_prev {
            if z - prev < prev.abs() * config.improve_tol {
                stall += 1;
            } else {
                stall = 0;
            }
        }
        z_prev = Some(z);
        record.wall_time = round_start.elapsed().as_secs_f64();
        log::info!(
            "round {round}: z = {z:.6} found {found} added {} dropped {} active {}",
            record.added,
            record.dropped,
            record.active_cuts
        );
        rounds.push(record);

        if admitted.is_empty() && !widened {
            termination = Termination::NoCuts;
            break;
        }
        if stall >= config.stall_limit {
            termination = Termination::Stall;
            break;
        }
        if config.max_rounds.is_some_and(|m| round + 1 >= m) {
            termination = Termination::RoundLimit;
            break;
        }
        round += 1;
    }

    let point = model.solution.as_deref().expect("at least one solve");
    let eig_ratio = eig_ratio(&model, point, &cliques)?;
    let report = RunReport {
        case_name: case.name.clone(),
        rounds,
        best_bound: best,
        clique_counts: cliques.counts(),
        eig_ratio,
        dual_infeasibility: dinf,
        termination,
        total_time: start.elapsed().as_secs_f64(),
        warm: warm_info,
    };
    Ok(Run { report, model, pool, cliques })
}

/// `min lambda_1 / max(lambda_2, 1e-12)` over the clique matrices at `point`.
pub fn eig_ratio(model: &RelaxationModel, point: &[f64], cliques: &CliqueSet) -> Result<Option<f64>> {
    let mut ratio: Option<f64> = None;
    for c in &cliques.cliques {
        let e = eigen(&model.clique_matrix(point, &c.buses)?)?;
        let r = e.values[0] / e.values[1].max(1e-12);
        ratio = Some(ratio.map_or(r, |x| x.min(r)));
    }
    Ok(ratio)
}

const HEADER: [&str; 8] = ["Case", "Objective", "#Cliques", "DInf", "EigRatio", "Time", "Added", "Termination"];

fn row_cells(r: &RunReport) -> [String; 8] {
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.2e}"));
    [
        r.case_name.clone(),
        format!("{:.2}", r.best_bound),
        format_counts(r.clique_counts),
        opt(r.dual_infeasibility),
        opt(r.eig_ratio),
        format!("{:.2}", r.total_time),
        r.total_added().to_string(),
        r.termination.to_string(),
    ]
}

/// Summary table, one row per report, as CSV or aligned text.
pub fn report_table(reports: &[RunReport], csv_mode: bool) -> String {
    let rows: Vec<[String; 8]> = reports.iter().map(row_cells).collect();
    if csv_mode {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(HEADER).expect("in-memory write");
        for row in &rows {
            w.write_record(row).expect("in-memory write");
        }
        return String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input");
    }
    let mut widths: Vec<usize> = HEADER.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = cells.zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(&mut HEADER.iter().copied());
    for row in &rows {
        out += &line(&mut row.iter().map(String::as_str));
    }
    out
}
