use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pinning::budget;
use pinning::cli::{parse_config_with_seed, run, Experiment};

/// Run one pinning-model experiment from a configuration file.
#[derive(Parser)]
#[command(name = "pin", version)]
struct Args {
    /// sim | psi | uconv | cg-check | rege | hc | scan | smoothing | alpha-gt1
    experiment: Experiment,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("pin: cannot read {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match parse_config_with_seed(&text, args.experiment, args.seed) {
        Ok(c) => c,
        Err(errs) => {
            eprintln!(
                "pin: invalid configuration {}:\n{errs}",
                args.config.display()
            );
            return ExitCode::from(2);
        }
    };
    if let Some(w) = args.workers {
        cfg.workers = w.max(1);
    }
    if let Some(o) = args.out {
        cfg.out = o;
    }
    match budget::from_env(cfg.budget) {
        Ok(b) => cfg.budget = b,
        Err(e) => {
            eprintln!("pin: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = run(&cfg, &text);
    for f in &outcome.files {
        println!("{}", f.display());
    }
    if !outcome.message.is_empty() {
        eprintln!("pin: {}: {}", outcome.status, outcome.message);
    }
    ExitCode::from(outcome.code as u8)
}
