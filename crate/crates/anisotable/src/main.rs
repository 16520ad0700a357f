use std::path::PathBuf;
use std::process::ExitCode;

use anisotable::config::{resolve_workers, WORKERS_ENV};
use anisotable::{replay, run_and_record, AppError, AppResult, ExperimentConfig, ExperimentKind, RunRequest};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "anisotable", version, about = "Killed stable-process experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; falls back to ANISOTABLE_WORKERS, then the config.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    Sample(RunArgs),
    Survival(RunArgs),
    ExponentTime(RunArgs),
    ExponentSpace(RunArgs),
    Factorization(RunArgs),
    Overshoot(RunArgs),
    Yaglom(RunArgs),
    Zolotarev(RunArgs),
    BiasProbe(RunArgs),
    /// Regenerate a run and compare the outputs byte for byte.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn env_workers() -> Option<String> {
    std::env::var(WORKERS_ENV).ok()
}

fn run(kind: ExperimentKind, args: RunArgs) -> AppResult<()> {
    let config = ExperimentConfig::load(&args.config)?;
    let workers = resolve_workers(args.workers, env_workers().as_deref(), config.worker_count)?;
    let req = RunRequest::resolve(kind, config, args.seed, workers, args.out)?;
    let manifest = run_and_record(&req)?;
    for o in &manifest.outputs {
        println!("{}\t{} rows\t{}", req.out_dir.join(&o.file).display(), o.rows, o.sha256);
    }
    println!("{}", req.out_dir.join(anisotable::manifest::MANIFEST_FILE).display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(a) => run(ExperimentKind::Sample, a),
        Command::Survival(a) => run(ExperimentKind::Survival, a),
        Command::ExponentTime(a) => run(ExperimentKind::ExponentTime, a),
        Command::ExponentSpace(a) => run(ExperimentKind::ExponentSpace, a),
        Command::Factorization(a) => run(ExperimentKind::Factorization, a),
        Command::Overshoot(a) => run(ExperimentKind::Overshoot, a),
        Command::Yaglom(a) => run(ExperimentKind::Yaglom, a),
        Command::Zolotarev(a) => run(ExperimentKind::Zolotarev, a),
        Command::BiasProbe(a) => run(ExperimentKind::BiasProbe, a),
        Command::Replay { manifest, workers } => {
            resolve_workers(workers, env_workers().as_deref(), None).and_then(|w| {
                let report = replay(&manifest, w)?;
                for warning in &report.warnings {
                    eprintln!("warning: {warning}");
                }
                println!("replay ok: {} files identical", report.checked.len());
                Ok(())
            })
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ AppError::MismatchDetected(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
