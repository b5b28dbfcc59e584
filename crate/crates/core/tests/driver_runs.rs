mod common;

use std::process::Command;

use acopf_cutplane::driver::{cutplane, report_table, Escalation, RunConfig, Termination};
use acopf_cutplane::lp::{backend_by_name, LpProblem, LpSettings, LpStatus, Row, Sense, BACKENDS};
use acopf_cutplane::network::enumerate_three_cycles;
use acopf_cutplane::relaxation::{ModelOptions, RelaxationModel};
use common::{case14, data_path, CASE14_AC};

const BIN: &str = env!("CARGO_BIN_EXE_acopf-cutplane");

#[test]
fn zero_time_limit_returns_base_bound() {
    let case = case14();
    let config = RunConfig { time_limit: 0.0, ..RunConfig::default() };
    let run = cutplane(&case, &config, None).unwrap();
    assert_eq!(run.report.rounds.len(), 1);
    assert_eq!(run.report.termination, Termination::Time);
    let m0 = RelaxationModel::build(&case, ModelOptions::default()).unwrap();
    let z = backend_by_name("clarabel", LpSettings::default()).unwrap().solve(&m0.lp).unwrap().objective;
    assert!((run.report.best_bound - z).abs() <= 1e-6 * z.abs().max(1.0));
}

#[test]
fn base_model_bound_is_below_ac_value_on_every_backend() {
    let m0 = RelaxationModel::build(&case14(), ModelOptions::default()).unwrap();
    for name in BACKENDS {
        let r = backend_by_name(name, LpSettings::default()).unwrap().solve(&m0.lp).unwrap();
        assert_eq!(r.status, LpStatus::Optimal, "{name}");
        assert!(r.objective <= CASE14_AC, "{name}: {}", r.objective);
    }
}

#[test]
fn thousand_rows_added_and_removed() {
    let mut lp = LpProblem::new();
    let x = lp.add_column(0.0, 10.0, 1.0);
    lp.add_row(Row::new(vec![(x, 1.0)], Sense::Ge, 1.0));
    for name in BACKENDS {
        let mut solver = backend_by_name(name, LpSettings::default()).unwrap();
        let before = solver.solve(&lp).unwrap().objective;
        let ids = lp.add_rows((0..1000).map(|i| Row::new(vec![(x, 1.0)], Sense::Ge, 1.0 + (i % 7) as f64 * 0.1)));
        assert!((solver.solve(&lp).unwrap().objective - 1.6).abs() < 1e-5, "{name}");
        lp.remove_rows(&ids).unwrap();
        assert!((solver.solve(&lp).unwrap().objective - before).abs() < 1e-7, "{name}");
    }
}

#[test]
fn stall_trigger_keeps_three_cycle_census() {
    let config = RunConfig { escalation: Escalation::Stall, ..RunConfig::default() };
    let run = cutplane(&case14(), &config, None).unwrap();
    let table = report_table(std::slice::from_ref(&run.report), true);
    let row = table.lines().nth(1).unwrap();
    assert!(row.contains(",\"(5,"), "{row}");
    assert_eq!(run.report.clique_counts, (5, 0, 0));
}

#[test]
fn escalated_family_contains_three_cycles() {
    let run = cutplane(&case14(), &RunConfig::default(), None).unwrap();
    assert!(run.report.rounds.len() > 5);
    for t in enumerate_three_cycles(&run.model.graph).cliques {
        assert!(run.cliques.contains(&t.buses));
    }
    let best = run.report.rounds.iter().map(|r| r.objective).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(run.report.best_bound, best);
    assert!(run.report.eig_ratio.unwrap() > 1.0);
}

#[test]
fn cli_subcommands_and_exit_codes() {
    let out = Command::new(BIN).args(["cliques"]).arg(data_path("case14.m")).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().next(), Some("(5,0,0)"));

    let out = Command::new(BIN).args(["solve", "--csv", "--max-rounds", "3"]).arg(data_path("case14.m")).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("Case,Objective,#Cliques,DInf,EigRatio,Time,Added,Termination"));
    assert!(text.contains("round_limit"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.m");
    std::fs::write(&bad, "mpc.baseMVA = 100;\nmpc.bus = [ 1 3 0 0 0 0 1 1 0 0 1 1.1 0.9; ];\n").unwrap();
    let out = Command::new(BIN).arg("solve").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    let out = Command::new(BIN).args(["solve", "--lp-backend", "nope"]).arg(data_path("case14.m")).output().unwrap();
    assert_eq!(out.status.code(), Some(3));

    let out = Command::new(BIN).args(["verify", "--trials", "30"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().filter(|l| l.starts_with("PASS")).count(), 5);
}

#[test]
fn saved_cuts_warm_a_perturbed_run() {
    let dir = tempfile::tempdir().unwrap();
    let cuts = dir.path().join("cuts.jsonl");
    let out = Command::new(BIN).arg("solve").arg(data_path("case14.m")).arg("--save-cuts").arg(&cuts).output().unwrap();
    assert!(out.status.success());
    let first = std::fs::read_to_string(&cuts).unwrap();
    assert_eq!(first.lines().next(), Some("{\"fmt\":\"cutpool\",\"v\":1}"));
    let out = Command::new(BIN)
        .arg("solve")
        .arg(data_path("case14.m"))
        .args(["--perturb-seed", "5", "--perturb-sigma", "0.01", "--warm"])
        .arg(&cuts)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
