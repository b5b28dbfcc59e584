use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use acopf_cutplane::case_io::{parse_case, perturb_loads, CaseData};
use acopf_cutplane::driver::{cutplane, report_table, Escalation, RunConfig};
use acopf_cutplane::lp::LpSettings;
use acopf_cutplane::network::{chordal_cliques, enumerate_three_cycles, format_counts, PairGraph};
use acopf_cutplane::theory;
use acopf_cutplane::Error;

#[derive(Parser)]
#[command(version, about = "Linear cutting-plane lower bounds for AC optimal power flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the cutting-plane loop on a MATPOWER case.
    Solve(SolveArgs),
    /// Print the 3-cycle census `(n3,n4,n5)` of a case.
    Cliques {
        case: PathBuf,
        /// Also print the chordal family up to this size.
        #[arg(long, value_parser = clap::value_parser!(u8).range(3..=5))]
        chordal: Option<u8>,
    },
    /// Run the randomized structural checks.
    Verify {
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Run in single precision.
        #[arg(long)]
        f32: bool,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum EscalateOn {
    Round,
    Stall,
}

#[derive(clap::Args)]
struct SolveArgs {
    case: PathBuf,
    #[arg(long, default_value_t = 1200.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 5)]
    rstar: usize,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u8).range(3..=5))]
    max_clique: u8,
    /// Compare --rstar with completed rounds or with the stall counter.
    #[arg(long, value_enum, default_value_t = EscalateOn::Round)]
    escalate_on: EscalateOn,
    #[arg(long, default_value_t = 5)]
    stall_rounds: usize,
    #[arg(long, default_value_t = 1e-5)]
    ftol: f64,
    #[arg(long)]
    max_rounds: Option<usize>,
    /// Cut file to install before the first solve.
    #[arg(long)]
    warm: Option<PathBuf>,
    /// Write the final cut pool here.
    #[arg(long)]
    save_cuts: Option<PathBuf>,
    #[arg(long, requires = "perturb_sigma")]
    perturb_seed: Option<u64>,
    /// Load noise standard deviation as a fraction of each load.
    #[arg(long)]
    perturb_sigma: Option<f64>,
    /// Load noise mean as a fraction of each load.
    #[arg(long, default_value_t = 0.0)]
    perturb_mu: f64,
    #[arg(long)]
    csv: bool,
    #[arg(long, default_value = "clarabel")]
    lp_backend: String,
    /// Feasibility and optimality tolerance of the LP backend.
    #[arg(long, default_value_t = 1e-6)]
    lp_tol: f64,
    /// Restrict the real pair products to be nonnegative.
    #[arg(long)]
    c_nonneg: bool,
    /// Known AC objective; rounds that exceed it are logged.
    #[arg(long)]
    known_ac: Option<f64>,
}

fn load(path: &Path) -> Result<CaseData, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut case = parse_case(&text)?;
    if case.name.is_empty() {
        case.name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    }
    Ok(case)
}

fn solve(args: SolveArgs) -> Result<(), Error> {
    let mut case = load(&args.case)?;
    if let Some(sigma) = args.perturb_sigma {
        case = perturb_loads(&case, args.perturb_seed.unwrap_or(0), args.perturb_mu, sigma);
    }
    let mut config = RunConfig {
        time_limit: args.time_limit,
        stall_limit: args.stall_rounds,
        improve_tol: args.ftol,
        hierarchy_round: args.rstar,
        escalation: match args.escalate_on {
            EscalateOn::Round => Escalation::Round,
            EscalateOn::Stall => Escalation::Stall,
        },
        max_clique_size: args.max_clique.into(),
        max_rounds: args.max_rounds,
        lp_backend: args.lp_backend,
        lp: LpSettings { feasibility_tol: args.lp_tol, optimality_tol: args.lp_tol, ..LpSettings::default() },
        known_ac: args.known_ac,
        seed: args.perturb_seed.unwrap_or(0),
        ..RunConfig::default()
    };
    config.model.c_nonneg = args.c_nonneg;
    let run = match &args.warm {
        Some(p) => {
            let mut reader = BufReader::new(File::open(p)?);
            cutplane(&case, &config, Some(&mut reader))?
        }
        None => cutplane(&case, &config, None)?,
    };
    if let Some(p) = &args.save_cuts {
        run.pool.save_cuts(&run.model, BufWriter::new(File::create(p)?))?;
    }
    print!("{}", report_table(std::slice::from_ref(&run.report), args.csv));
    Ok(())
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Solve(args) => solve(args).map(|_| true),
        Command::Cliques { case, chordal } => {
            let case = load(&case)?;
            let g = PairGraph::from_case(&case);
            println!("{}", format_counts(enumerate_three_cycles(&g).counts()));
            if let Some(k) = chordal {
                let family = chordal_cliques(&g, k.into());
                println!("chordal {} with {} fill pairs", format_counts(family.counts()), family.aux_pairs.len());
            }
            Ok(true)
        }
        Command::Verify { trials, seed, f32 } => {
            let results =
                if f32 { theory::run_all::<f32>(trials, seed)? } else { theory::run_all::<f64>(trials, seed)? };
            let mut ok = true;
            for r in &results {
                let tag = if r.passed { "PASS" } else { "FAIL" };
                println!("{tag} {:<26} trials={:<5} max_violation={:.3e} tol={:.1e}", r.name, r.trials, r.max_violation, r.tolerance);
                ok &= r.passed;
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 3 })
        }
    }
}
