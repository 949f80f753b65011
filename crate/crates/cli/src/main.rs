use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fcsd_cli::{parse_config, run, Experiment, RunConfig};

/// Fog-computing offloading experiments for drone swarms.
#[derive(Debug, Parser)]
#[command(name = "fcsd", version)]
struct Args {
    /// Run configuration (`key = value` lines). Defaults apply without one.
    #[arg(long)]
    config: Option<PathBuf>,

    /// latency | reliability | energy-surface | energy-compare | solve-one
    #[arg(long)]
    experiment: Option<Experiment>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    trials: Option<usize>,

    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also write the per-generation solver trace.
    #[arg(long)]
    trace: bool,
}

fn resolve(args: Args) -> Result<RunConfig, String> {
    let mut cfg = match &args.config {
        Some(path) => parse_config(path).map_err(|e| e.to_string())?,
        None => RunConfig::default(),
    };
    if let Some(e) = args.experiment {
        cfg.experiment = e;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.trials {
        if t == 0 {
            return Err("trials must be >= 1, got 0".into());
        }
        cfg.trials = t;
    }
    if let Some(o) = args.out {
        cfg.out = o;
    }
    cfg.trace |= args.trace;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cfg = match resolve(Args::parse()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(out) => {
            println!("{}", out.table.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
