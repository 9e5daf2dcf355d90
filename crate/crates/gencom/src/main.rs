use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gencom::config::{parse_snr_range, ExperimentConfig};
use gencom::plots::{emit_plot, PlotKind, DEFAULT_THRESHOLD};
use gencom::runner::{io_err, run_experiment, write_outputs, RunError, RunOptions};

/// Link-level simulator for generative semantic communication.
///
/// Exit codes: 0 ok, 2 config error, 3 I/O error, 4 sidecar unavailable
/// (with fallback disabled), 1 anything else. The external decoder reads
/// the sidecar address from GENCOM_SIDECAR_ADDR.
#[derive(Parser)]
#[command(name = "gencom", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write the trial and summary CSVs.
    Run {
        config: PathBuf,
        /// Worker threads (default: all cores). Output does not depend on it.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Like `run` with the SNR points replaced by an inclusive range.
    Sweep {
        config: PathBuf,
        /// Range as start:stop:step in dB, e.g. -6:0:1.
        #[arg(long, allow_hyphen_values = true)]
        snr: String,
        #[arg(long)]
        jobs: Option<usize>,
        /// Override the configured trial CSV path.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Render one figure (CSV + SVG) from a trial table.
    Plot {
        table: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        /// Output prefix; files are <prefix>.<kind>.csv and .svg.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Quality threshold in dB for the coverage kind.
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Write the built-in test images as PGM files.
    ExportImages { dir: PathBuf },
}

fn execute(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Run { config, jobs } => {
            let cfg = ExperimentConfig::load(&config)?;
            run_and_write(&cfg, jobs)
        }
        Command::Sweep {
            config,
            snr,
            jobs,
            output,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.experiment.snr_db = parse_snr_range(&snr)?;
            if let Some(output) = output {
                cfg.experiment.output = output;
            }
            run_and_write(&cfg, jobs)
        }
        Command::Plot {
            table,
            kind,
            out,
            threshold,
        } => {
            let files = emit_plot(&table, kind, out.as_deref(), threshold)?;
            println!("{}\n{}", files.csv.display(), files.svg.display());
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let e = &cfg.experiment;
            println!(
                "ok: {} scheme(s) × {} SNR point(s) × {} trial(s)",
                cfg.schemes.len(),
                e.snr_db.len(),
                e.trials
            );
            Ok(())
        }
        Command::ExportImages { dir } => {
            std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
            for (name, image) in gencom::testimages::all_builtin() {
                let path = dir.join(format!("{name}.pgm"));
                gencom::pnm::write(&path, &image).map_err(|e| RunError::Image {
                    name: path.display().to_string(),
                    message: e.to_string(),
                })?;
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

fn run_and_write(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<(), RunError> {
    let out = run_experiment(cfg, &RunOptions { jobs })?;
    if out.sidecar_fallbacks > 0 {
        log::warn!("{} restore(s) used the inpaint fallback", out.sidecar_fallbacks);
    }
    for path in write_outputs(cfg, &out)? {
        println!("{}", Path::new(&path).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
