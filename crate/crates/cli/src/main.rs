use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fracjump_cli::{run, CliError, Command, RunConfig, EXIT_CONFIG};

/// Fractional operators, jump-process simulation and boundary value
/// problems driven by a TOML run description.
#[derive(Debug, Parser)]
#[command(name = "fracjump", version)]
struct Args {
    command: Command,
    /// Run description.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed of the run description.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the number of simulated paths.
    #[arg(long)]
    paths: Option<usize>,
    /// Overrides the jump truncation radius h.
    #[arg(long)]
    truncation: Option<f64>,
    /// CSV output; the metadata record goes to `<out>.meta.json`.
    #[arg(long, default_value = "out.csv")]
    out: PathBuf,
    /// Worker threads (results do not depend on it).
    #[arg(long, env = "FRACJUMP_THREADS")]
    threads: Option<usize>,
}

fn load(args: &Args) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(&args.config).map_err(|source| CliError::Io { path: args.config.clone(), source })?;
    let mut cfg: RunConfig = text.parse()?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(n) = args.paths {
        cfg.numerics.paths = n;
    }
    if let Some(h) = args.truncation {
        cfg.numerics.truncation = h;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("fracjump: cannot start {n} threads: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    let result = load(&args).and_then(|cfg| run(args.command, &cfg, &args.out));
    match result {
        Ok(report) => match report.censoring {
            Some(msg) => {
                let e = CliError::Censoring(msg);
                eprintln!("fracjump: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
            None => ExitCode::SUCCESS,
        },
        Err(e) => {
            eprintln!("fracjump: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
