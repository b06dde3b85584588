use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use irsmec::config::{parse_seeds, parse_solvers, ExperimentConfig};
use irsmec::experiment::{run_experiment, write_outputs};
use irsmec::oracle::compare_with_oracle;
use irsmec::plot::emit_plot_data;
use irsmec::{ConfigError, Error};

#[derive(Parser)]
#[command(name = "irsmec", about = "IRS-assisted vehicular edge computing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured solver on every seed and write CSV metrics.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated seeds, `a..b` ranges allowed.
        #[arg(long)]
        seeds: Option<String>,
        /// Comma-separated solver names.
        #[arg(long)]
        solvers: Option<String>,
    },
    /// Compare the diffusion search with exhaustive enumeration on a tiny instance.
    OracleCheck {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        tolerance: f64,
    },
    /// Turn metrics.csv into per-panel TSV tables.
    PlotData {
        #[arg(long = "in")]
        dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Run {
            config,
            out,
            seeds,
            solvers,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seeds {
                cfg.run.seeds = parse_seeds(&s).map_err(ConfigError::Invalid)?;
            }
            if let Some(s) = solvers {
                cfg.run.solvers = parse_solvers(&s).map_err(ConfigError::Invalid)?;
            }
            let dir = out
                .or_else(|| cfg.run.out.clone())
                .ok_or_else(|| ConfigError::Invalid("no output directory (--out or run.out)".into()))?;
            let output = run_experiment(&cfg)?;
            for r in &output.runs {
                println!(
                    "{:8} seed {:4}  utility {:12.4}  failed {:3}  iters {:4}  {:.2}s",
                    r.solver.name(),
                    r.seed,
                    r.result.utility(),
                    r.result.failed(),
                    r.result.iterations,
                    r.result.wall_time
                );
            }
            write_outputs(&dir, &cfg, &output)?;
            println!("wrote {}", dir.display());
        }
        Command::OracleCheck { config, tolerance } => {
            let cfg = ExperimentConfig::load(&config)?;
            let mut hits = 0;
            for &seed in &cfg.run.seeds {
                let c = compare_with_oracle(&cfg.params, &cfg.solver, seed)?;
                let ok = c.near_optimal(tolerance);
                hits += usize::from(ok);
                println!(
                    "seed {:4}  search {:12.4}  oracle {:12.4}  {}",
                    seed,
                    c.search,
                    c.oracle,
                    if ok { "ok" } else { "short" }
                );
            }
            println!("{hits}/{} seeds within {tolerance} of the oracle", cfg.run.seeds.len());
        }
        Command::PlotData { dir } => {
            for p in emit_plot_data(&dir)? {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}
