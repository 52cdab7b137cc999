use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use solitonscope::pipeline::rejudge;
use solitonscope::{run, CliError, ExperimentConfig, RunOptions, RunReport, Stage};

/// Radial NLS simulations and their hydrodynamic diagnostics.
#[derive(Parser)]
#[command(name = "solitonscope", version)]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config.
    Run {
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Stop after this stage (evolve, hydro, boxes, lift, slope, fit, distances).
        #[arg(long)]
        stage_until: Option<Stage>,
    },
    /// Run every `*.toml` in a directory, concurrently.
    Suite { dir: PathBuf },
    /// Recompute the verdicts of a finished run.
    Report { run_dir: PathBuf },
}

const PASS: u8 = 0;
const CHECK_FAILED: u8 = 1;
const EXEC_ERROR: u8 = 2;

fn verdict(report: &RunReport) -> u8 {
    print!("{}", report.render());
    if report.pass {
        PASS
    } else {
        CHECK_FAILED
    }
}

fn run_one(path: &Path, opts: &RunOptions) -> Result<RunReport, CliError> {
    let cfg = ExperimentConfig::load(path)?;
    run_loaded(path, &cfg, opts)
}

fn run_loaded(path: &Path, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport, CliError> {
    let outcome = run(cfg, opts)?;
    log::info!("{}: artifacts in {}", path.display(), outcome.dir.display());
    Ok(outcome.report)
}

fn suite(dir: &Path) -> u8 {
    let mut configs: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "toml"))
            .collect(),
        Err(e) => {
            eprintln!("error: {}: {e}", dir.display());
            return EXEC_ERROR;
        }
    };
    configs.sort();
    if configs.is_empty() {
        eprintln!("error: no *.toml configs in {}", dir.display());
        return EXEC_ERROR;
    }
    let loaded: Vec<Result<ExperimentConfig, CliError>> = configs.iter().map(|p| ExperimentConfig::load(p)).collect();
    // configs that would share a directory each get their own subdirectory
    let dirs: Vec<Option<PathBuf>> = loaded
        .iter()
        .map(|c| c.as_ref().ok().map(|c| c.resolve_output_dir(None)))
        .collect();
    let plans: Vec<(PathBuf, Result<(ExperimentConfig, RunOptions), CliError>)> = configs
        .iter()
        .zip(loaded)
        .zip(&dirs)
        .map(|((path, cfg), dir)| {
            let plan = cfg.map(|cfg| {
                let shared = dirs.iter().filter(|d| *d == dir).count() > 1;
                let output_dir = dir
                    .as_ref()
                    .filter(|_| shared)
                    .map(|d| d.join(path.file_stem().unwrap_or_default()));
                (
                    cfg,
                    RunOptions {
                        output_dir,
                        stage_until: None,
                    },
                )
            });
            (path.clone(), plan)
        })
        .collect();
    let results: Vec<(PathBuf, Result<RunReport, CliError>)> = thread::scope(|s| {
        let handles: Vec<_> = plans
            .iter()
            .map(|(p, plan)| {
                let job = move || match plan {
                    Ok((cfg, opts)) => run_loaded(p, cfg, opts),
                    Err(e) => Err(CliError::Config(e.to_string())),
                };
                (p.clone(), s.spawn(job))
            })
            .collect();
        handles
            .into_iter()
            .map(|(p, h)| {
                let r = h
                    .join()
                    .unwrap_or_else(|_| Err(CliError::Config(format!("{}: run panicked", p.display()))));
                (p, r)
            })
            .collect()
    });
    let mut code = PASS;
    for (path, result) in results {
        println!("== {}", path.display());
        match result {
            Ok(report) => code = code.max(verdict(&report)),
            Err(e) => {
                println!("error: {e}");
                code = EXEC_ERROR;
            }
        }
    }
    code
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    let code = match cli.command {
        Command::Run {
            config,
            output_dir,
            stage_until,
        } => match run_one(
            &config,
            &RunOptions {
                output_dir,
                stage_until,
            },
        ) {
            Ok(report) => verdict(&report),
            Err(e) => {
                eprintln!("error: {e}");
                EXEC_ERROR
            }
        },
        Command::Suite { dir } => suite(&dir),
        Command::Report { run_dir } => match rejudge(&run_dir) {
            Ok(report) => verdict(&report),
            Err(e) => {
                eprintln!("error: {e}");
                EXEC_ERROR
            }
        },
    };
    ExitCode::from(code)
}
