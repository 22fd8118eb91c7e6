use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use swapaudit::pipeline::{emit_plot_data, read_report, run_audit, write_plot_csv, write_report};
use swapaudit::AuditConfig;

/// Counterfactual swap-based bias audit for tabular classifiers.
#[derive(Debug, Parser)]
#[command(name = "audit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full audit described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print a finished report.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Long-format plot rows (feature,ratio,divergence,metric,value).
    Csv,
    Json,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            threads,
        } => {
            let mut cfg = AuditConfig::from_file(&config)
                .with_context(|| format!("stage `config`: cannot load {}", config.display()))?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            if let Some(threads) = threads {
                cfg.threads = threads;
            }
            let report = run_audit(&cfg)?;
            let files = write_report(&report, &cfg.output_dir)?;
            info!("wrote {} files to {}", files.len(), cfg.output_dir.display());
            let mut stdout = io::stdout().lock();
            for f in files {
                writeln!(stdout, "{}", f.display())?;
            }
        }
        Command::Report { input, format } => {
            let report = read_report(&input)
                .with_context(|| format!("cannot read report in {}", input.display()))?;
            let stdout = io::stdout().lock();
            match format {
                Format::Json => {
                    let mut stdout = stdout;
                    serde_json::to_writer_pretty(&mut stdout, &report)?;
                    writeln!(stdout)?;
                }
                Format::Csv => {
                    let plots = emit_plot_data(&report);
                    let rows: Vec<_> = plots
                        .single_swap
                        .into_iter()
                        .chain(plots.double_swap)
                        .chain(plots.importance)
                        .collect();
                    write_plot_csv(&rows, stdout)?;
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("AUDIT_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
