use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wave_lab::{run, ExperimentKind};

#[derive(Parser)]
#[command(name = "wave-lab", version, about = "Wave equation experiments from TOML configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Galerkin solve with energy and Gronwall series
    Solve(Common),
    /// Energy estimate and corollary ratios (single problem or seeded corpus)
    VerifyEnergy(Common),
    /// Nonhomogeneous boundary values through a lifting
    LiftSolve(Common),
    /// Moderateness of the regularized solution net
    SweepExistence(Common),
    /// Difference between two regularizations
    SweepUniqueness(Common),
    /// Convergence to the smooth-data solution
    SweepConsistency(Common),
    /// Spectral solution against the finite-difference oracle
    OracleCompare(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Solve(a) => (ExperimentKind::Solve, a),
        Command::VerifyEnergy(a) => (ExperimentKind::VerifyEnergy, a),
        Command::LiftSolve(a) => (ExperimentKind::LiftSolve, a),
        Command::SweepExistence(a) => (ExperimentKind::SweepExistence, a),
        Command::SweepUniqueness(a) => (ExperimentKind::SweepUniqueness, a),
        Command::SweepConsistency(a) => (ExperimentKind::SweepConsistency, a),
        Command::OracleCompare(a) => (ExperimentKind::OracleCompare, a),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        pool = pool.num_threads(n as usize);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot start thread pool: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(kind, &args.config, &args.out)) {
        Ok(outcome) => {
            for v in &outcome.report.verdicts {
                println!("{} {}", v.status(), v.name);
            }
            println!("wrote {}", outcome.written.csv.display());
            println!("wrote {}", outcome.written.summary.display());
            ExitCode::from(if outcome.report.passed() { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
