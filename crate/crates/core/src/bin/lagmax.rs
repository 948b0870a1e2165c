use clap::{Parser, Subcommand};
use lagmax::experiments::{compare_with_direct, run_scenario, Mode, ScenarioConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lagmax", version, about = "Slot-angle sweeps with a Laguerre-in-time preconditioner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured slot-angle sweep.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Run a single slot angle, in units of π.
        #[arg(long)]
        alpha: Option<f64>,
        /// unpreconditioned, laguerre or both.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check iterative solutions against a direct solve on a small grid.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        grid: usize,
    },
    /// Compare the scalar Laguerre march with the damped Helmholtz solve.
    Testbed {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_mode(s: &str) -> lagmax::Result<Mode> {
    match s {
        "unpreconditioned" => Ok(Mode::Unpreconditioned),
        "laguerre" => Ok(Mode::Laguerre),
        "both" => Ok(Mode::Both),
        "scalar_testbed" => Ok(Mode::ScalarTestbed),
        _ => Err(lagmax::Error::Config(format!("unknown mode {s:?}"))),
    }
}

fn run(cli: Cli) -> lagmax::Result<()> {
    match cli.command {
        Command::Solve { config, alpha, mode, out } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if let Some(a) = alpha {
                cfg.alpha_over_pi = vec![a];
            }
            if let Some(m) = mode {
                cfg.mode = parse_mode(&m)?;
            }
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            let manifest = run_scenario(&cfg)?;
            for e in &manifest.entries {
                match &e.error {
                    Some(err) => println!("alpha {}pi {}: error: {err}", e.alpha_over_pi, e.mode.label()),
                    None => println!(
                        "alpha {}pi {}: converged {} iterations {} residual {:.3e} time {:.1}s",
                        e.alpha_over_pi,
                        e.mode.label(),
                        e.converged,
                        e.iterations,
                        e.final_residual.unwrap_or(f64::NAN),
                        e.wall_time
                    ),
                }
            }
            for t in &manifest.testbed {
                println!("window {} terms {} relative error {:.3e}", t.window, t.terms, t.relative_error);
            }
            println!("wrote {}", cfg.output_dir.join("manifest.json").display());
        }
        Command::Oracle { config, grid } => {
            let cfg = ScenarioConfig::load(&config)?;
            for e in compare_with_direct(&cfg, grid)? {
                println!(
                    "alpha {}pi {} dofs {}: converged {} relative error {:.3e}",
                    e.alpha_over_pi,
                    e.mode.label(),
                    e.dofs,
                    e.converged,
                    e.relative_error
                );
            }
        }
        Command::Testbed { config, out } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            cfg.mode = Mode::ScalarTestbed;
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            let manifest = run_scenario(&cfg)?;
            for t in &manifest.testbed {
                println!("window {} terms {} relative error {:.3e}", t.window, t.terms, t.relative_error);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
