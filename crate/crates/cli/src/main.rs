use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use holosup_cli::{execute, parse_config, CliError, OUTPUT_DIR_ENV};

/// Sup norms of random holomorphic sections on CP^m.
#[derive(Debug, Parser)]
#[command(name = "holosup", version)]
struct Args {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; takes precedence over `output_dir` in the config.
    #[arg(long, env = OUTPUT_DIR_ENV)]
    output: Option<PathBuf>,
    /// Worker threads for Monte Carlo trials.
    #[arg(long)]
    threads: Option<usize>,
    /// Replaces the master seed of the ensemble.
    #[arg(long)]
    seed_override: Option<u64>,
}

fn run(args: Args) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::Config {
        key: "--config".into(),
        message: format!("{}: {e}", args.config.display()),
    })?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = args.seed_override {
        match cfg.spec.as_mut() {
            Some(spec) => spec.master_seed = seed,
            None => {
                return Err(CliError::Config {
                    key: "--seed-override".into(),
                    message: "the command has no ensemble spec".into(),
                })
            }
        }
    }
    let dir = args
        .output
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("holosup-out"));
    if let Some(k) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Config {
                key: "--threads".into(),
                message: e.to_string(),
            })?;
    }
    let manifest = execute(&cfg, &dir)?;
    for f in &manifest.files {
        println!("{}  {}", f.sha256, dir.join(&f.file).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
