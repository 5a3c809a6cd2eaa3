use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qaction::commands::{self, Outcome, EXIT_CONFIG};
use qaction::config::{ConfigError, Format, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "qaction", version, about = "Bound-state spectra from the exact phase quantization condition")]
struct Cli {
    /// Run configuration (flat TOML with dotted keys).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// tmatrix, riccati or both.
    #[arg(long, global = true)]
    engine: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv, json or table.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Largest accepted |J(E) - (n+1)| at a root.
    #[arg(long = "tol-j", global = true)]
    tol_j: Option<f64>,
    /// Fixed layer count for the transfer-matrix engine.
    #[arg(long, global = true)]
    layers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues for the configured n range.
    Solve,
    /// J(E) on an energy grid.
    Scan {
        /// Comma-separated energies; overrides the scan.* keys.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        energies: Option<Vec<f64>>,
    },
    /// Sampled, normalized eigenfunction.
    Wavefunction {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Recompute a bundled reference table (table1, table2).
    Bench { table: String },
    /// Present method against plain and Langer-corrected WKB.
    Compare,
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("qaction: {msg}");
    ExitCode::from(EXIT_CONFIG as u8)
}

fn load(cli: &Cli, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let path = cli.config.as_ref().ok_or_else(|| ConfigError::Missing("--config".into()))?;
    let mut cfg = RunConfig::from_path(path)?;
    cfg.apply_overrides(overrides)?;
    Ok(cfg)
}

fn emit(outcome: &Outcome, format: Format, out: Option<&PathBuf>) -> std::io::Result<()> {
    let text = match format {
        Format::Csv => outcome.report.to_csv(),
        Format::Json => outcome.report.to_json(),
        Format::Table => outcome.report.to_table(),
    };
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let overrides = Overrides {
        engine: cli.engine.clone(),
        format: cli.format.clone(),
        out: cli.out.clone(),
        tol_j: cli.tol_j,
        layers: cli.layers,
    };

    let (outcome, format, out) = match &cli.command {
        Command::Bench { table } => {
            let format = match cli.format.as_deref().map(str::parse::<Format>).transpose() {
                Ok(f) => f.unwrap_or(Format::Csv),
                Err(m) => return fail(format!("`--format`: {m}")),
            };
            match commands::cmd_bench(table, &overrides) {
                Ok(o) => (o, format, cli.out.clone()),
                Err(msg) => return fail(msg),
            }
        }
        command => {
            let mut cfg = match load(&cli, &overrides) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let outcome = match command {
                Command::Solve => commands::cmd_solve(&cfg),
                Command::Scan { energies } => {
                    let grid = match energies {
                        Some(e) => Ok(e.clone()),
                        None => cfg.scan.energies(),
                    };
                    match grid {
                        Ok(g) if !g.is_empty() => commands::cmd_scan(&cfg, &g),
                        Ok(_) => return fail("empty energy grid"),
                        Err(e) => return fail(e),
                    }
                }
                Command::Wavefunction { n, samples } => {
                    if let Some(n) = n {
                        cfg.wavefunction_n = Some(*n);
                    }
                    if let Some(k) = samples {
                        if *k < 2 {
                            return fail("`--samples`: needs at least 2 samples");
                        }
                        cfg.wavefunction_samples = *k;
                    }
                    commands::cmd_wavefunction(&cfg)
                }
                Command::Compare => commands::cmd_compare(&cfg),
                Command::Bench { .. } => unreachable!(),
            };
            (outcome, cfg.format, cfg.out.clone())
        }
    };
    if let Err(e) = emit(&outcome, format, out.as_ref()) {
        return fail(format!("cannot write report: {e}"));
    }
    ExitCode::from(outcome.exit as u8)
}
