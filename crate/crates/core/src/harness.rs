//! Scenario sampling and the Monte-Carlo experiment drivers.
//!
//! Every trial draws its own scenario from a ChaCha stream selected by the
//! trial index under a master seed, so results do not depend on how trials
//! are spread over threads. Within a trial the same scenario, GA seed and
//! random-baseline draws are reused at every sweep point (common random
//! numbers). Per-trial outputs are collected in trial order and reduced
//! sequentially, which keeps the means bit-stable.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::baselines;
use crate::error::{Error, Result};
use crate::model::{
    cloud_latency, local_only_latency, Allocation, ChannelModel, CloudSpec, DroneNode, Metrics, Position,
    PowerModel, Scenario, TaskSpec, BITS_PER_MB,
};
use crate::solver::{self, GaConfig, Solution};

/// Rejection sampling gives up after this many draws for a single node.
const MAX_PLACEMENT_ATTEMPTS: usize = 100_000;

/// How random scenarios are drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDistribution {
    pub p: usize,
    pub freq_range: (f64, f64),
    pub fail_range: (f64, f64),
    pub link_fail_range: (f64, f64),
    /// Fog nodes are placed uniformly in a cube of this edge centred on the initiator.
    pub placement_cube_m: f64,
    pub channel: ChannelModel,
    pub power: PowerModel,
    pub cloud: CloudSpec,
}

impl Default for ScenarioDistribution {
    fn default() -> Self {
        ScenarioDistribution {
            p: 10,
            freq_range: (0.2e9, 0.9e9),
            fail_range: (0.001, 0.3),
            link_fail_range: (0.001, 0.3),
            placement_cube_m: 100.0,
            channel: ChannelModel::default(),
            power: PowerModel::default(),
            cloud: CloudSpec::default(),
        }
    }
}

impl ScenarioDistribution {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("freq_range", self.freq_range),
            ("fail_range", self.fail_range),
            ("link_fail_range", self.link_fail_range),
        ] {
            if !(lo <= hi && lo.is_finite() && hi.is_finite()) {
                return Err(Error::Config(format!("{name}: low {lo} must not exceed high {hi}")));
            }
        }
        if !(self.freq_range.0 > 0.0) {
            return Err(Error::Config("freq_range: frequencies must be positive".into()));
        }
        if !(self.fail_range.0 >= 0.0 && self.link_fail_range.0 >= 0.0) {
            return Err(Error::Config("failure rates must be nonnegative".into()));
        }
        if !(self.placement_cube_m > 0.0) {
            return Err(Error::Config("placement_cube_m must be positive".into()));
        }
        self.channel.validate()?;
        self.power.validate()?;
        self.cloud.validate()
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Magnitude of a CN(0, 1) draw (Rayleigh, unit mean square).
pub fn rayleigh_magnitude<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    ((re * re + im * im) / 2.0).sqrt()
}

/// Initiator at the origin; fog nodes uniform in the placement cube,
/// redrawn until they fall within the radio radius.
pub fn sample_scenario<R: Rng + ?Sized>(dist: &ScenarioDistribution, rng: &mut R) -> Result<Scenario> {
    let initiator = DroneNode::new(
        0,
        Position::ORIGIN,
        uniform(rng, dist.freq_range),
        uniform(rng, dist.fail_range),
    )?;
    let half = dist.placement_cube_m / 2.0;
    let mut nodes = Vec::with_capacity(dist.p);
    let mut fading = Vec::with_capacity(dist.p);
    let mut link_fail = Vec::with_capacity(dist.p);
    for id in 1..=dist.p {
        let mut attempts = 0;
        let position = loop {
            let pos = Position::new(
                uniform(rng, (-half, half)),
                uniform(rng, (-half, half)),
                uniform(rng, (-half, half)),
            );
            if crate::model::distance(Position::ORIGIN, pos) <= dist.channel.max_radius_m {
                break pos;
            }
            attempts += 1;
            if attempts >= MAX_PLACEMENT_ATTEMPTS {
                return Err(Error::Config(format!(
                    "could not place fog node {id} within {} m",
                    dist.channel.max_radius_m
                )));
            }
        };
        nodes.push(DroneNode::new(
            id,
            position,
            uniform(rng, dist.freq_range),
            uniform(rng, dist.fail_range),
        )?);
        fading.push(rayleigh_magnitude(rng));
        link_fail.push(uniform(rng, dist.link_fail_range));
    }
    Scenario::new(
        initiator,
        nodes,
        dist.channel,
        dist.power,
        fading,
        link_fail,
        Some(dist.cloud),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Random,
    Wrr,
    MaxMin,
    MinMin,
    Lrga,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Random,
        Algorithm::Wrr,
        Algorithm::MaxMin,
        Algorithm::MinMin,
        Algorithm::Lrga,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Random => "random",
            Algorithm::Wrr => "wrr",
            Algorithm::MaxMin => "maxmin",
            Algorithm::MinMin => "minmin",
            Algorithm::Lrga => "lrga",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}, expected random|wrr|maxmin|minmin|lrga")))
    }
}

/// Shared settings of every experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarlo {
    pub dist: ScenarioDistribution,
    /// Base task; sweeps override its size or bounds.
    pub task: TaskSpec,
    /// Solver settings. The seed is replaced per trial.
    pub ga: GaConfig,
    /// Pieces used by the list-scheduling baselines.
    pub chunks: usize,
    pub trials: usize,
    pub seed: u64,
}

impl MonteCarlo {
    pub fn new(dist: ScenarioDistribution, task: TaskSpec, ga: GaConfig, trials: usize, seed: u64) -> Self {
        MonteCarlo {
            dist,
            task,
            ga,
            chunks: 100,
            trials,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        self.dist.validate()?;
        self.ga.validate()?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        Ok(())
    }

    /// Random state of one trial.
    pub fn trial(&self, index: usize) -> Result<Trial> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let scenario = sample_scenario(&self.dist, &mut rng)?;
        let ga_seed = rng.random();
        let baseline_seed = rng.random();
        Ok(Trial {
            index,
            scenario,
            ga_seed,
            baseline_seed,
        })
    }

    fn ga_for(&self, trial: &Trial) -> GaConfig {
        GaConfig {
            rng_seed: trial.ga_seed,
            ..self.ga.clone()
        }
    }

    fn task_of_size(&self, d0_mb: f64) -> Result<TaskSpec> {
        self.task.with_data_size_bits(d0_mb * BITS_PER_MB)
    }

    pub fn allocate(&self, algorithm: Algorithm, trial: &Trial, task: &TaskSpec) -> Result<Allocation> {
        let scn = &trial.scenario;
        Ok(match algorithm {
            Algorithm::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(trial.baseline_seed);
                baselines::random_alloc(scn, &mut rng)
            }
            Algorithm::Wrr => baselines::wrr_alloc(scn),
            Algorithm::MaxMin => baselines::max_min_alloc(scn, task, self.chunks.max(scn.p()))?,
            Algorithm::MinMin => baselines::min_min_alloc(scn, task, self.chunks.max(scn.p()))?,
            Algorithm::Lrga => solver::solve(scn, task, &self.ga_for(trial))?.allocation,
        })
    }

    fn run_trials<T, F>(&self, per_trial: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&Trial) -> Result<T> + Sync,
    {
        self.validate()?;
        (0..self.trials)
            .into_par_iter()
            .map(|i| self.trial(i).and_then(|t| per_trial(&t)))
            .collect()
    }

    /// Scenario of trial 0 solved with tracing on.
    pub fn solve_one(&self, traced: bool) -> Result<(Scenario, Solution)> {
        self.validate()?;
        let trial = self.trial(0)?;
        let cfg = self.ga_for(&trial);
        let sol = if traced {
            solver::solve_traced(&trial.scenario, &self.task, &cfg)?
        } else {
            solver::solve(&trial.scenario, &self.task, &cfg)?
        };
        Ok((trial.scenario, sol))
    }
}

#[derive(Debug, Clone)]
pub struct Trial {
    pub index: usize,
    pub scenario: Scenario,
    pub ga_seed: u64,
    pub baseline_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult<R> {
    pub trials: usize,
    pub rows: Vec<R>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyRow {
    pub d0_mb: f64,
    pub cloud_s: f64,
    pub local_s: f64,
    pub fog_s: f64,
}

/// Mean cloud, local-only and fog latency per task size. The fog figure uses
/// the solver's allocation whether or not it met the bounds.
pub fn run_latency_comparison(mc: &MonteCarlo, d0_sweep_mb: &[f64]) -> Result<ExperimentResult<LatencyRow>> {
    let per_trial = mc.run_trials(|trial| {
        d0_sweep_mb
            .iter()
            .map(|&d0| {
                let task = mc.task_of_size(d0)?;
                let scn = &trial.scenario;
                let alloc = mc.allocate(Algorithm::Lrga, trial, &task)?;
                Ok([
                    cloud_latency(scn, &task)?,
                    local_only_latency(scn, &task),
                    scn.metrics(&task, &alloc).t_total_s,
                ])
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let n = mc.trials as f64;
    let rows = d0_sweep_mb
        .iter()
        .enumerate()
        .map(|(k, &d0)| {
            let mut sums = [0.0; 3];
            for t in &per_trial {
                for (s, v) in sums.iter_mut().zip(t[k]) {
                    *s += v;
                }
            }
            LatencyRow {
                d0_mb: d0,
                cloud_s: sums[0] / n,
                local_s: sums[1] / n,
                fog_s: sums[2] / n,
            }
        })
        .collect();
    Ok(ExperimentResult {
        trials: mc.trials,
        rows,
    })
}

/// One algorithm on one trial at one task size.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub d0_mb: f64,
    pub algorithm: Algorithm,
    pub allocation: Allocation,
    pub metrics: Metrics,
}

/// Every (trial, task size, algorithm) outcome, trial-major.
pub fn run_algorithm_trials(mc: &MonteCarlo, d0_sweep_mb: &[f64], algorithms: &[Algorithm]) -> Result<Vec<TrialRecord>> {
    let per_trial = mc.run_trials(|trial| {
        let mut out = Vec::with_capacity(d0_sweep_mb.len() * algorithms.len());
        for &d0 in d0_sweep_mb {
            let task = mc.task_of_size(d0)?;
            for &algorithm in algorithms {
                let allocation = mc.allocate(algorithm, trial, &task)?;
                let metrics = trial.scenario.metrics(&task, &allocation);
                out.push(TrialRecord {
                    trial: trial.index,
                    d0_mb: d0,
                    algorithm,
                    allocation,
                    metrics,
                });
            }
        }
        Ok(out)
    })?;
    Ok(per_trial.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Reliability,
    Energy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmRow {
    pub d0_mb: f64,
    pub algorithm: Algorithm,
    pub mean_value: f64,
    /// Share of trials whose allocation met every constraint.
    pub feasible_fraction: f64,
    /// Trials that entered the mean.
    pub counted: usize,
}

/// Per (size, algorithm) means. Solver outcomes that miss a bound are left
/// out of the mean (and show up in `feasible_fraction`); baselines never
/// look at the bounds, so all of their trials count. A mean over zero
/// trials is NaN.
pub fn summarize(
    records: &[TrialRecord],
    d0_sweep_mb: &[f64],
    algorithms: &[Algorithm],
    measure: Measure,
    trials: usize,
) -> Vec<AlgorithmRow> {
    let mut rows = Vec::with_capacity(d0_sweep_mb.len() * algorithms.len());
    for &d0 in d0_sweep_mb {
        for &algorithm in algorithms {
            let mut sum = 0.0;
            let mut counted = 0;
            let mut feasible = 0;
            for r in records.iter().filter(|r| r.d0_mb == d0 && r.algorithm == algorithm) {
                feasible += usize::from(r.metrics.feasible);
                if algorithm == Algorithm::Lrga && !r.metrics.feasible {
                    continue;
                }
                sum += match measure {
                    Measure::Reliability => r.metrics.r_total,
                    Measure::Energy => r.metrics.e_total_j,
                };
                counted += 1;
            }
            rows.push(AlgorithmRow {
                d0_mb: d0,
                algorithm,
                mean_value: if counted > 0 { sum / counted as f64 } else { f64::NAN },
                feasible_fraction: feasible as f64 / trials as f64,
                counted,
            });
        }
    }
    rows
}

pub fn run_reliability_study(
    mc: &MonteCarlo,
    d0_sweep_mb: &[f64],
    algorithms: &[Algorithm],
) -> Result<ExperimentResult<AlgorithmRow>> {
    let records = run_algorithm_trials(mc, d0_sweep_mb, algorithms)?;
    Ok(ExperimentResult {
        trials: mc.trials,
        rows: summarize(&records, d0_sweep_mb, algorithms, Measure::Reliability, mc.trials),
    })
}

pub fn run_energy_comparison(
    mc: &MonteCarlo,
    d0_sweep_mb: &[f64],
    algorithms: &[Algorithm],
) -> Result<ExperimentResult<AlgorithmRow>> {
    let records = run_algorithm_trials(mc, d0_sweep_mb, algorithms)?;
    Ok(ExperimentResult {
        trials: mc.trials,
        rows: summarize(&records, d0_sweep_mb, algorithms, Measure::Energy, mc.trials),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceRow {
    pub t0_s: f64,
    pub r0: f64,
    /// Mean solver energy over the trials that met both bounds (NaN if none).
    pub mean_energy_j: f64,
    pub feasible_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergySurface {
    /// Latency bounds, ascending.
    pub t0_s: Vec<f64>,
    /// Reliability bounds, ascending.
    pub r0: Vec<f64>,
    /// `cells[trial][i][j]`: solver energy at `(t0_s[i], r0[j])`, `None` if infeasible.
    pub cells: Vec<Vec<Vec<Option<f64>>>>,
    pub result: ExperimentResult<SurfaceRow>,
}

/// Solver energy over a grid of latency and reliability bounds, task size
/// fixed at the base task.
///
/// Cells are solved from the tightest corner outwards and each solve is
/// seeded with the feasible answers of its two tighter neighbours. Those
/// answers stay feasible when a bound is relaxed, so per trial the energy is
/// nonincreasing along both relaxation directions.
pub fn run_energy_surface(mc: &MonteCarlo, t0_sweep_s: &[f64], r0_sweep: &[f64]) -> Result<EnergySurface> {
    let mut t0 = t0_sweep_s.to_vec();
    let mut r0 = r0_sweep.to_vec();
    t0.sort_by(f64::total_cmp);
    t0.dedup();
    r0.sort_by(f64::total_cmp);
    r0.dedup();
    for &r in &r0 {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::Config(format!("r0 sweep value {r} outside (0, 1]")));
        }
    }
    let (nt, nr) = (t0.len(), r0.len());

    let cells = mc.run_trials(|trial| {
        let cfg = mc.ga_for(trial);
        let scn = &trial.scenario;
        let mut best: Vec<Vec<Option<Allocation>>> = vec![vec![None; nr]; nt];
        let mut energy = vec![vec![None; nr]; nt];
        for i in 0..nt {
            // tightest reliability bound first
            for j in (0..nr).rev() {
                let task = mc.task.with_bounds(t0[i], r0[j])?;
                let mut seeds = Vec::new();
                if i > 0 {
                    seeds.extend(best[i - 1][j].clone());
                }
                if j + 1 < nr {
                    seeds.extend(best[i][j + 1].clone());
                }
                let sol = solver::solve_seeded(scn, &task, &cfg, &seeds)?;
                if sol.metrics.feasible {
                    energy[i][j] = Some(sol.metrics.e_total_j);
                    best[i][j] = Some(sol.allocation);
                }
            }
        }
        Ok(energy)
    })?;

    let mut rows = Vec::with_capacity(nt * nr);
    for i in 0..nt {
        for j in 0..nr {
            let vals: Vec<f64> = cells.iter().filter_map(|c| c[i][j]).collect();
            let mean = if vals.is_empty() {
                f64::NAN
            } else {
                vals.iter().sum::<f64>() / vals.len() as f64
            };
            rows.push(SurfaceRow {
                t0_s: t0[i],
                r0: r0[j],
                mean_energy_j: mean,
                feasible_count: vals.len(),
            });
        }
    }
    Ok(EnergySurface {
        t0_s: t0,
        r0,
        cells,
        result: ExperimentResult {
            trials: mc.trials,
            rows,
        },
    })
}
