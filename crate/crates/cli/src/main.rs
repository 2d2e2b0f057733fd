use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ids_cli::run::{cmd_bounds, cmd_converge, cmd_freq, cmd_ids, cmd_jumps};
use ids_cli::{CliError, ExperimentConfig, Overrides};

#[derive(Parser)]
#[command(
    name = "ids",
    version,
    about = "Integrated density of states experiments with certified error bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pattern frequency tables on C_j for every (j, M).
    Freq(Overrides),
    /// Finite-volume and pattern IDS curves with bound certificates.
    Ids(Overrides),
    /// Bound terms against measured deviations.
    Bounds(Overrides),
    /// Jumps of the IDS and compactly supported eigenfunction probes.
    Jumps(Overrides),
    /// Δ(j, M) sweeps and convergence against the largest-volume curve.
    Converge(Overrides),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Freq(o) => {
            for p in cmd_freq(&ExperimentConfig::resolve(&o)?)? {
                println!("{}", p.display());
            }
        }
        Command::Ids(o) => {
            let c = ExperimentConfig::resolve(&o)?;
            let report = cmd_ids(&c)?;
            for cell in &report.grid {
                println!(
                    "j={} M={} delta={:.3e} sup={:.3e} bound={:.3e} {}",
                    cell.j,
                    cell.m,
                    cell.delta,
                    cell.sup_distance,
                    cell.certificates.ids.bound,
                    if cell.passed() { "pass" } else { "FAIL" }
                );
            }
            println!("{}", c.out.join("ids_report.json").display());
            if !report.passed() {
                return Err(CliError::Certificate("see ids_report.json".into()));
            }
        }
        Command::Bounds(o) => {
            let c = ExperimentConfig::resolve(&o)?;
            cmd_bounds(&c)?;
            println!("{}", c.out.join("bounds.csv").display());
        }
        Command::Jumps(o) => {
            let c = ExperimentConfig::resolve(&o)?;
            let r = cmd_jumps(&c)?;
            for j in &r.jumps {
                println!("λ={:.6} size={:.6} probe={}", j.location, j.size, j.probe);
            }
            println!("{}", c.out.join("jumps.json").display());
        }
        Command::Converge(o) => {
            let c = ExperimentConfig::resolve(&o)?;
            cmd_converge(&c)?;
            println!("{}", c.out.join("converge.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are configuration errors; exit code 2 is reserved for certificates.
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ids: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
