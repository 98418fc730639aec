use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hqam_cli::experiment::trace_path;
use hqam_cli::{run_experiment, validate_config, write_csv, write_trace, ExperimentError};

/// Runs a power-control and link-simulation sweep and writes CSV.
///
/// Exit status: 0 on success, 1 on a config or I/O error, 2 when a solver
/// fails to converge.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// Experiment file (TOML).
    #[arg(short, long)]
    config: PathBuf,

    /// Results file; overrides `output` in the config. Stdout when neither
    /// is given.
    #[arg(short, long)]
    output: Option<PathBuf>,

    /// Worker threads (0 = one per core).
    #[arg(short, long, default_value_t = 0)]
    workers: usize,

    /// More logging (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,

    /// Also write the dual iteration history to `<output>.trace.csv`.
    #[arg(long)]
    emit_dual_trace: bool,
}

fn run(args: &Args) -> Result<(), ExperimentError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|source| ExperimentError::Io { path: args.config.clone(), source })?;
    let cfg = validate_config(&text)?;
    let output = args.output.clone().or_else(|| cfg.output.clone());
    if args.emit_dual_trace && output.is_none() {
        log::warn!("--emit-dual-trace needs an output path; trace skipped");
    }
    let rows = run_experiment(&cfg, args.workers, args.emit_dual_trace && output.is_some())?;

    let create = |p: &PathBuf| {
        File::create(p).map(BufWriter::new).map_err(|source| ExperimentError::Io { path: p.clone(), source })
    };
    match &output {
        Some(path) => {
            write_csv(&cfg, &rows, create(path)?)?;
            if args.emit_dual_trace {
                write_trace(&rows, create(&trace_path(path))?)?;
            }
            log::info!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_csv(&cfg, &rows, &mut lock)?;
            lock.flush().ok();
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = match args.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
