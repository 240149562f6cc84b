//! `chernlab` command-line driver.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod bundle;
mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::run::{execute, RunError};

#[derive(Parser)]
#[command(name = "chernlab", version, about = "Chern marker and Wannier localization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 means one per core).
        #[arg(long, env = "CHERNLAB_THREADS", default_value_t = 0)]
        threads: usize,
        #[arg(long, short)]
        verbose: bool,
    },
    /// Parse and check a configuration file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &PathBuf) -> Result<(RunConfig, Vec<u8>), RunError> {
    let bytes = std::fs::read(path).map_err(|e| RunError::Io(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| {
        RunError::Config(config::ConfigError { field: "config".into(), message: format!("not UTF-8: {e}") })
    })?;
    let cfg = RunConfig::parse(text)?;
    Ok((cfg, bytes))
}

fn run(cli: Cli) -> Result<u8, RunError> {
    match cli.command {
        Command::Validate { config } => {
            let (cfg, _) = load(&config)?;
            println!("{}: ok ({} experiment, sizes {:?})", config.display(), cfg.experiment.name(), cfg.sizes);
            Ok(0)
        }
        Command::Run { config, out, threads, verbose: _ } => {
            let (cfg, bytes) = load(&config)?;
            let out = out.or_else(|| cfg.output_dir.as_ref().map(PathBuf::from)).ok_or_else(|| {
                RunError::Config(config::ConfigError {
                    field: "output_dir".into(),
                    message: "no --out flag and no output_dir in the config".into(),
                })
            })?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| RunError::Numerical(format!("thread pool: {e}")))?;
            let start = Instant::now();
            let (bundle, status) = pool.install(|| execute(&cfg, &bytes))?;
            log::info!("{} finished in {:.2?}", cfg.experiment.name(), start.elapsed());
            let paths = bundle.emit(&out).map_err(|e| RunError::Io(e.to_string()))?;
            for p in &paths {
                log::debug!("wrote {}", p.display());
            }
            if status.code() != 0 {
                eprintln!("verdict: violation flag (see {})", out.display());
            }
            Ok(status.code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match &cli.command {
        Command::Run { verbose: true, .. } => "debug",
        _ => "info",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
