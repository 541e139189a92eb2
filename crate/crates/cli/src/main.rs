use clap::{Parser, Subcommand};
use spdc_cli::pipeline::{self, CliError, RunReport, SweepParameter};
use spdc_cli::scenario;
use std::path::PathBuf;
use std::process::ExitCode;

/// Collinear SPDC simulator with pulse-front-tilt dispersion control.
#[derive(Parser)]
#[command(name = "spdc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario file and write its analyses to the output directory.
    Run {
        /// Scenario file path.
        file: PathBuf,
        /// Override the scenario's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the grid points per axis (power of two).
        #[arg(long)]
        grid: Option<usize>,
        /// Print all summary entries, including alternate conventions.
        #[arg(long)]
        verbose: bool,
    },
    /// Sweep one parameter and fit the bandwidth power law.
    Sweep {
        /// Scenario file path.
        file: PathBuf,
        /// Parameter to sweep: length | tilt | wavelength.
        #[arg(long)]
        param: String,
        /// Comma-separated values with units, e.g. `1mm,2mm,4mm,8mm`.
        #[arg(long)]
        values: String,
        /// Override the scenario's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a scenario file, reporting every error.
    Validate {
        /// Scenario file path.
        file: PathBuf,
    },
}

fn read_scenario(path: &PathBuf) -> Result<(spdc_cli::Scenario, String), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let scenario =
        scenario::parse_scenario(&text).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok((scenario, text))
}

fn parse_sweep_values(raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let idx = item
                .find(|c: char| c.is_ascii_alphabetic())
                .unwrap_or(item.len());
            let (num, unit) = item.split_at(idx);
            let v: f64 = num
                .trim()
                .parse()
                .map_err(|_| CliError::Validation(format!("`{item}` is not a number")))?;
            let scale = match unit.trim() {
                "" | "m" => 1.0,
                "nm" => 1e-9,
                "um" => 1e-6,
                "mm" => 1e-3,
                "cm" => 1e-2,
                "deg" => std::f64::consts::PI / 180.0,
                "rad" => 1.0f64,
                other => {
                    return Err(CliError::Validation(format!(
                        "unknown unit `{other}` in sweep value `{item}`"
                    )))
                }
            };
            Ok(v * scale)
        })
        .collect()
}

fn print_report(report: &RunReport, verbose: bool) {
    println!("engine: {}", report.engine_version);
    println!("scenario hash: {}", report.scenario_hash);
    for (k, v) in &report.summary {
        if !verbose && k.contains("amplitude-convention") {
            continue;
        }
        println!("  {k} = {v:.6e}");
    }
    for w in &report.warnings {
        println!("  warning: {w}");
    }
    println!("files:");
    for f in &report.manifest {
        println!("  {}", f.display());
    }
    println!("elapsed: {:.1} ms", report.elapsed_ms);
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            file,
            out,
            grid,
            verbose,
        } => {
            let (scenario, text) = read_scenario(&file)?;
            if let Some(n) = grid {
                if !n.is_power_of_two() || n < 16 {
                    return Err(CliError::Validation(format!(
                        "--grid must be a power of two >= 16, got {n}"
                    )));
                }
            }
            let report = pipeline::run(&scenario, &text, out, grid)?;
            print_report(&report, verbose);
            Ok(())
        }
        Command::Sweep {
            file,
            param,
            values,
            out,
        } => {
            let (scenario, text) = read_scenario(&file)?;
            let param: SweepParameter = param.parse().map_err(CliError::Validation)?;
            let values = parse_sweep_values(&values)?;
            let report = pipeline::sweep(&scenario, &text, param, &values, out)?;
            print_report(&report, false);
            Ok(())
        }
        Command::Validate { file } => {
            let (_, _) = read_scenario(&file)?;
            println!("{}: ok", file.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
