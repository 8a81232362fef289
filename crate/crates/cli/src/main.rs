use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fcomp_cli::{commands, CliError};

/// Simulate FMCW radar measurements, estimate target ranges and speeds, and
/// benchmark the estimators.
#[derive(Debug, Parser)]
#[command(name = "fcomp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize the scene of a config; writes <OUT> and <OUT>.truth.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate targets in a measurement file.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Scene file; adds the per-target error column.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// OMP, COMP, F-OMP or F-COMP.
        #[arg(long)]
        algorithm: String,
        /// Also write the estimates table here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte-Carlo sweep and write a result CSV.
    Bench {
        /// fig1, fig2, fig3 or custom.
        #[arg(long)]
        preset: String,
        /// Sweep definition for the custom preset.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut stdout = stdout.lock();
    let print = |out: &mut std::io::StdoutLock, text: &str| {
        out.write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e))
    };
    match cli.command {
        Command::Simulate { config, out } => {
            let o = commands::simulate(&config, &out)?;
            print(
                &mut stdout,
                &format!(
                    "wrote {} samples to {} and {} targets to {}\n",
                    o.measurement.len(),
                    o.measurement_path.display(),
                    o.scene.len(),
                    o.truth_path.display()
                ),
            )
        }
        Command::Solve {
            config,
            input,
            truth,
            algorithm,
            out,
        } => {
            let o = commands::solve(&config, &input, truth.as_deref(), &algorithm)?;
            if let Some(path) = out {
                fcomp_cli::files::write_text(&path, &o.table)?;
            }
            print(&mut stdout, &o.table)
        }
        Command::Bench {
            preset,
            config,
            trials,
            seed,
            out,
        } => {
            let o = commands::bench(&preset, config.as_deref(), trials, seed, &out)?;
            print(&mut stdout, &o.summary)?;
            print(&mut stdout, &format!("\nwrote {}\n", o.csv_path.display()))?;
            if let Some(p) = o.ratio_path {
                print(&mut stdout, &format!("wrote {}\n", p.display()))?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
