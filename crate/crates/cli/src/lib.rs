//! Command-line driver: reads a run configuration, runs one experiment and
//! writes its table as CSV next to a manifest of every resolved setting.

pub mod config;
pub mod output;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use fcsd_core::harness::{
    run_energy_comparison, run_energy_surface, run_latency_comparison, run_reliability_study,
};
use thiserror::Error;

pub use config::{parse_config, parse_str, ConfigError, Experiment, RunConfig};
use output::Table;

pub const MANIFEST: &str = "manifest.cfg";
pub const TRACE: &str = "trace.csv";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Model(#[from] fcsd_core::Error),

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
}

/// Files written by one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub table: PathBuf,
    pub manifest: PathBuf,
    pub trace: Option<PathBuf>,
}

/// Main table of an experiment, plus the solver trace when requested.
pub fn build_tables(cfg: &RunConfig) -> Result<(Table, Option<Table>), RunError> {
    cfg.validate()?;
    let mc = cfg.monte_carlo();
    let table = match cfg.experiment {
        Experiment::Latency => output::latency_table(&run_latency_comparison(&mc, &cfg.d0_sweep_mb)?),
        Experiment::Reliability => {
            output::algorithm_table(&run_reliability_study(&mc, &cfg.d0_sweep_mb, &cfg.algorithms)?)
        }
        Experiment::EnergyCompare => {
            output::algorithm_table(&run_energy_comparison(&mc, &cfg.d0_sweep_mb, &cfg.algorithms)?)
        }
        Experiment::EnergySurface => {
            output::surface_table(&run_energy_surface(&mc, &cfg.t0_sweep_s, &cfg.r0_sweep)?.result)
        }
        Experiment::SolveOne => {
            let (scn, sol) = mc.solve_one(false)?;
            output::solution_table(scn.p(), &sol)
        }
    };
    let trace = if cfg.trace {
        let (_, sol) = mc.solve_one(true)?;
        Some(output::trace_table(&sol.trace))
    } else {
        None
    };
    Ok((table, trace))
}

fn write(path: &Path, contents: &str) -> Result<(), RunError> {
    fs::write(path, contents).map_err(|source| RunError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs the configured experiment and writes `<experiment>.csv`, the
/// manifest and, with `trace` set, the solver trace into `cfg.out`.
pub fn run(cfg: &RunConfig) -> Result<RunOutput, RunError> {
    let (table, trace) = build_tables(cfg)?;
    fs::create_dir_all(&cfg.out).map_err(|source| RunError::Write {
        path: cfg.out.clone(),
        source,
    })?;
    let table_path = cfg.out.join(format!("{}.csv", cfg.experiment));
    write(&table_path, &table.to_csv())?;
    let manifest = cfg.out.join(MANIFEST);
    write(&manifest, &cfg.serialize())?;
    let trace_path = match trace {
        Some(t) => {
            let path = cfg.out.join(TRACE);
            write(&path, &t.to_csv())?;
            Some(path)
        }
        None => None,
    };
    Ok(RunOutput {
        table: table_path,
        manifest,
        trace: trace_path,
    })
}
