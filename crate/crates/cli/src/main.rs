use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pondctl_cli::batch::{parse_batch_list, run_batch};
use pondctl_cli::scenario::levels_report;
use pondctl_cli::{
    find_preset, list_presets, load_config, run_scenario, Mode, RunRequest, ScenarioError,
    ScenarioReport,
};

/// Threshold-harvest control of competing populations in a pond.
#[derive(Parser)]
#[command(name = "pondctl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunFlags {
    /// Output directory (defaults to the config's `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run without harvesting.
    #[arg(long)]
    no_control: bool,
    /// Integrate the spatially uniform temporal model instead of the PDE.
    #[arg(long)]
    ode_only: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (file path or preset name).
    Simulate {
        config: String,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run the temporal model only; same as `simulate --ode-only`.
    Ode {
        config: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_control: bool,
    },
    /// Print the management levels of a scenario.
    Levels { config: String },
    /// List bundled presets.
    Presets,
    /// Run every scenario named in a list file, one per line.
    Batch {
        list: PathBuf,
        /// Scenarios to run concurrently.
        #[arg(long, short, default_value_t = 1)]
        jobs: usize,
        /// Root directory; each scenario writes to `<out>/<name>`.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        no_control: bool,
        #[arg(long)]
        ode_only: bool,
    },
}

fn mode(ode_only: bool) -> Mode {
    if ode_only {
        Mode::Ode
    } else {
        Mode::Pde
    }
}

fn summarize(report: &ScenarioReport) {
    println!(
        "{}: wrote {} files to {}",
        report.name,
        report.files.len(),
        report.out_dir.display()
    );
    for (j, row) in report.terminal.iter().enumerate() {
        let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!("  species {}: terminal range [{lo:.4}, {hi:.4}]", j + 1);
    }
}

fn simulate(
    source: &str,
    out: Option<PathBuf>,
    no_control: bool,
    mode: Mode,
) -> Result<(), ScenarioError> {
    let config = load_config(source)?;
    // Presets are not tied to a directory of their own; keep them apart by name.
    let out = out.or_else(|| {
        (!Path::new(source).exists() && find_preset(source).is_some())
            .then(|| config.output.dir.join(&config.name))
    });
    let request = RunRequest {
        mode,
        disable_control: no_control,
        out_dir: out,
    };
    summarize(&run_scenario(&config, &request)?);
    Ok(())
}

fn run(cli: Cli) -> Result<(), ScenarioError> {
    match cli.command {
        Command::Simulate { config, flags } => {
            simulate(&config, flags.out, flags.no_control, mode(flags.ode_only))
        }
        Command::Ode {
            config,
            out,
            no_control,
        } => simulate(&config, out, no_control, Mode::Ode),
        Command::Levels { config } => {
            print!("{}", levels_report(&load_config(&config)?)?);
            Ok(())
        }
        Command::Presets => {
            for p in list_presets() {
                println!("{:<24} {:<26} {}", p.name, p.file, p.description);
                println!("{:<24} surfaces: {}", "", p.surfaces.join(", "));
            }
            Ok(())
        }
        Command::Batch {
            list,
            jobs,
            out,
            no_control,
            ode_only,
        } => {
            let text = std::fs::read_to_string(&list).map_err(|source| ScenarioError::Io {
                path: list.clone(),
                source,
            })?;
            let base = list.parent().unwrap_or(Path::new("."));
            let entries = parse_batch_list(&text, base);
            let template = RunRequest {
                mode: mode(ode_only),
                disable_control: no_control,
                out_dir: None,
            };
            let mut worst: Option<ScenarioError> = None;
            for (entry, result) in run_batch(&entries, &template, &out, jobs) {
                match result {
                    Ok(report) => summarize(&report),
                    Err(e) => {
                        eprintln!("{entry}: error: {e}");
                        if !matches!(&worst, Some(w) if w.exit_code() >= e.exit_code()) {
                            worst = Some(e);
                        }
                    }
                }
            }
            worst.map_or(Ok(()), Err)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
