use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use tnkernel_cli::{load_config, run, CliError};

/// Exact MPS-reweighted lattice kernels: evaluation, regression, sampling,
/// verification and benchmarks driven by a JSON config.
///
/// Ridge regression solves (G + λI)α = y with no scaling of λ by n.
#[derive(Parser, Debug)]
#[command(name = "tnkernel", version)]
struct Args {
    /// Run configuration (JSON, see config.schema.json).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report.json and task artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Replace every seed in the config with this value.
    #[arg(long)]
    seed_override: Option<u64>,
    /// Worker threads; overrides the config's `threads`.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: &Args) -> Result<(), CliError> {
    let mut config = load_config(&args.config, args.seed_override)?;
    if args.threads.is_some() {
        config.threads = args.threads;
    }
    // A zero count is left for config validation to report.
    if let Some(n) = config.threads.filter(|&n| n > 0) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    }
    let report = run(&config, &args.out)?;
    println!(
        "{} finished; report at {}",
        report["task"].as_str().unwrap_or("task"),
        args.out.join("report.json").display()
    );
    Ok(())
}
