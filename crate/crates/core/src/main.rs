//! Command-line scenario runner.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime failure. Failures
//! print one JSON object `{"category": ..., "message": ...}` on stderr.

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use mpjc::exec::{init_workers_from_env, Execution, WORKERS_ENV};
use mpjc::scenario::{self, ScenarioConfig, ScenarioError, Severity, PRESET_NAMES};

#[derive(Parser)]
#[command(
    name = "mpjc",
    version,
    about = "Multiphoton Jaynes-Cummings open-system scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file, writing its CSV and manifest.
    Run {
        config: PathBuf,
        /// Output directory (default: current directory).
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Evaluate sweep points on a single thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Check a scenario file without running it.
    Validate { config: PathBuf },
    /// Write the configs of a built-in preset to a directory and run them.
    Preset {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
        name: String,
        #[arg(long)]
        out: PathBuf,
        /// Only write the scenario files.
        #[arg(long)]
        configs_only: bool,
        #[arg(long)]
        sequential: bool,
    },
}

fn fail(err: &ScenarioError) -> ExitCode {
    let line = serde_json::json!({ "category": err.category(), "message": err.to_string() });
    eprintln!("{line}");
    ExitCode::from(err.exit_code() as u8)
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn run_one(
    config: &ScenarioConfig,
    out: &Path,
    exec: Execution,
    workers: usize,
) -> Result<(), ScenarioError> {
    log::info!(
        "running {} ({:?}, {} points)",
        config.name,
        config.kind,
        config.grid.len()
    );
    for d in config
        .validate()
        .iter()
        .filter(|d| d.severity == Severity::Warning)
    {
        eprintln!("{}: {d}", config.name);
    }
    let outcome = scenario::run(config, out, exec, workers)?;
    println!(
        "{}: {} rows -> {} (d = {}, {:.1} s)",
        config.name,
        outcome.manifest.rows,
        outcome.csv_path.display(),
        outcome.manifest.summary.fock_cutoff,
        outcome.manifest.wall_clock_seconds
    );
    Ok(())
}

fn workers() -> Result<usize, ScenarioError> {
    init_workers_from_env().map_err(|e| ScenarioError::Config(format!("{WORKERS_ENV}: {e}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { config } => match ScenarioConfig::load(&config) {
            Ok(cfg) => {
                let diagnostics = cfg.validate();
                for d in &diagnostics {
                    println!("{d}");
                }
                if diagnostics.iter().any(|d| d.severity == Severity::Error) {
                    return ExitCode::from(1);
                }
                println!("{}: ok", cfg.name);
                Ok(())
            }
            Err(e) => Err(e),
        },
        Command::Run {
            config,
            out,
            sequential,
        } => ScenarioConfig::load(&config)
            .and_then(|cfg| Ok((cfg, workers()?)))
            .and_then(|(cfg, w)| run_one(&cfg, &out, execution(sequential), w)),
        Command::Preset {
            name,
            out,
            configs_only,
            sequential,
        } => (|| {
            let configs = scenario::preset(&name)
                .ok_or_else(|| ScenarioError::Config(format!("unknown preset {name}")))?;
            std::fs::create_dir_all(&out).map_err(|source| ScenarioError::Io {
                path: out.clone(),
                source,
            })?;
            for cfg in &configs {
                let path = out.join(format!("{}.toml", cfg.name));
                std::fs::write(&path, cfg.to_toml_string())
                    .map_err(|source| ScenarioError::Io { path, source })?;
            }
            if configs_only {
                return Ok(());
            }
            let w = workers()?;
            configs
                .iter()
                .try_for_each(|cfg| run_one(cfg, &out, execution(sequential), w))
        })(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
