//! `detform` — deformed determinantal ensembles at desk scale.
//!
//! Exit codes: 0 success, 2 assumption-diagnostic failure, 3 statistical
//! failure (|z| > 3), 4 configuration error, 1 anything else.

use clap::{Args, Parser, Subcommand};
use detform_cli::{config::ExperimentConfig, exit_code_for, run, scenario_matches};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "detform",
    version,
    about = "Convergence experiments for deformed determinantal point processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Report output path (CSV with a JSON header line); stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Override the operator quadrature density (points per unit length).
    #[arg(long)]
    quad_order: Option<usize>,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Bulk deformation sweep toward the deformed sine process.
    BulkSine(CommonArgs),
    /// Soft-edge deformation sweep toward the deformed Airy process.
    EdgeAiry(CommonArgs),
    /// Discrete Coulomb gas sweep toward the deformed discrete sine process.
    DiscreteSine(CommonArgs),
    /// Monte Carlo validation of the marking/conditioning construction.
    McVerify(CommonArgs),
    /// Gap probabilities over a radius grid.
    Gap(CommonArgs),
    /// Equilibrium density tables (free or constrained).
    Equilibrium(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::BulkSine(_) => "bulk-sine",
            Command::EdgeAiry(_) => "edge-airy",
            Command::DiscreteSine(_) => "discrete-sine",
            Command::McVerify(_) => "mc-verify",
            Command::Gap(_) => "gap",
            Command::Equilibrium(_) => "equilibrium",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::BulkSine(a)
            | Command::EdgeAiry(a)
            | Command::DiscreteSine(a)
            | Command::McVerify(a)
            | Command::Gap(a)
            | Command::Equilibrium(a) => a,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let sub = cli.command.name();
    let args = cli.command.args();

    let mut config = match ExperimentConfig::from_path(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(4);
        }
    };
    if let Err(e) = scenario_matches(sub, &config) {
        eprintln!("config error: {e:#}");
        return ExitCode::from(4);
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(q) = args.quad_order {
        config.numerics.quad_points_per_unit = q;
    }
    if let Some(k) = args.threads {
        // ignore the error when a pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global();
    }

    match run(&config) {
        Ok(report) => {
            let out_path = args
                .out
                .clone()
                .or_else(|| config.out.as_ref().map(PathBuf::from));
            match out_path {
                Some(p) => {
                    if let Err(e) = report.save(&p) {
                        eprintln!("write error: {e:#}");
                        return ExitCode::from(1);
                    }
                    eprintln!("wrote {} rows to {}", report.rows.len(), p.display());
                }
                None => print!("{}", report.to_string_csv()),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let code = exit_code_for(&e);
            eprintln!("{sub} failed (exit {code}): {e:#}");
            ExitCode::from(code as u8)
        }
    }
}
