//! Flat `key = value` run configuration.
//!
//! One setting per line, `#` starts a comment, blank lines are ignored.
//! Lists are comma separated. Every key is optional; a missing key keeps its
//! default. Unknown or repeated keys are errors.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fcsd_core::harness::{Algorithm, MonteCarlo, ScenarioDistribution};
use fcsd_core::model::{dbm_to_watts, BITS_PER_MB};
use fcsd_core::solver::{MutationExponent, PenaltySchedule};
use fcsd_core::{GaConfig, TaskSpec};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Read { path: PathBuf, message: String },

    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },

    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: key {key:?} is set more than once")]
    DuplicateKey { line: usize, key: String },

    #[error("{key}: cannot parse {value:?} as {expected}")]
    BadValue {
        key: String,
        value: String,
        expected: &'static str,
    },

    #[error("{key} must be {requirement}, got {value}")]
    Range {
        key: String,
        requirement: String,
        value: String,
    },

    #[error("{0}")]
    Conflict(String),
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Latency,
    Reliability,
    EnergySurface,
    EnergyCompare,
    SolveOne,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Latency,
        Experiment::Reliability,
        Experiment::EnergySurface,
        Experiment::EnergyCompare,
        Experiment::SolveOne,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Latency => "latency",
            Experiment::Reliability => "reliability",
            Experiment::EnergySurface => "energy-surface",
            Experiment::EnergyCompare => "energy-compare",
            Experiment::SolveOne => "solve-one",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown experiment {s:?}, expected latency|reliability|energy-surface|energy-compare|solve-one"))
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub trials: usize,
    pub out: PathBuf,
    pub trace: bool,
    pub dist: ScenarioDistribution,
    pub d0_mb: f64,
    /// CPU cycles per bit.
    pub complexity: f64,
    pub t0_s: f64,
    pub r0: f64,
    pub ga: GaConfig,
    pub chunks: usize,
    pub d0_sweep_mb: Vec<f64>,
    pub t0_sweep_s: Vec<f64>,
    pub r0_sweep: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
}

fn steps(start: f64, step: f64, n: usize) -> Vec<f64> {
    // rounded so the defaults print as short decimals
    (0..n).map(|i| ((start + step * i as f64) * 1e6).round() / 1e6).collect()
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: Experiment::SolveOne,
            seed: 0,
            trials: 3000,
            out: PathBuf::from("out"),
            trace: false,
            dist: ScenarioDistribution::default(),
            d0_mb: 1.0,
            complexity: 1900.0 / 8.0,
            t0_s: 0.8,
            r0: 0.99,
            ga: GaConfig::default(),
            chunks: 100,
            d0_sweep_mb: steps(0.1, 0.1, 6),
            t0_sweep_s: steps(2.0, 0.1, 10),
            r0_sweep: steps(0.90, 0.01, 10),
            algorithms: Algorithm::ALL.to_vec(),
        }
    }
}

/// Recognised keys, in the order they are written back out.
pub const KEYS: &[&str] = &[
    "experiment",
    "seed",
    "trials",
    "out",
    "trace",
    "p",
    "freq_low_hz",
    "freq_high_hz",
    "fail_low",
    "fail_high",
    "link_fail_low",
    "link_fail_high",
    "placement_cube_m",
    "bandwidth_hz",
    "tx_power_w",
    "rx_power_w",
    "noise_w",
    "path_loss_exp",
    "overhead_ratio",
    "max_radius_m",
    "k",
    "sigma",
    "cloud_x_m",
    "cloud_y_m",
    "cloud_z_m",
    "cloud_cpu_freq_hz",
    "cloud_bandwidth_hz",
    "cloud_fail_rate",
    "cloud_link_fail_rate",
    "d0_mb",
    "complexity",
    "t0_s",
    "r0",
    "generations",
    "pop_size",
    "crossover_prob",
    "mutation_prob",
    "mutation_shape",
    "mutation_exponent",
    "worst_init",
    "penalty_base",
    "elite_count",
    "repair",
    "chunks",
    "d0_sweep_mb",
    "t0_sweep_s",
    "r0_sweep",
    "algorithms",
];

/// Accepted on input only; stored as `noise_w`.
const NOISE_DBM: &str = "noise_dbm";

fn parse_as<T: FromStr>(key: &str, value: &str, expected: &'static str) -> Result<T> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        expected,
    })
}

fn real(key: &str, value: &str) -> Result<f64> {
    let v: f64 = parse_as(key, value, "a number")?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(range(key, "finite", v))
    }
}

fn list<T: FromStr>(key: &str, value: &str, expected: &'static str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_as(key, s, expected))
        .collect()
}

fn range(key: &str, requirement: &str, value: impl fmt::Display) -> ConfigError {
    ConfigError::Range {
        key: key.to_string(),
        requirement: requirement.to_string(),
        value: value.to_string(),
    }
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(range(key, "> 0", v))
    }
}

fn nonnegative(key: &str, v: f64) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(range(key, ">= 0", v))
    }
}

fn within(key: &str, v: f64, lo: f64, hi: f64) -> Result<f64> {
    if (lo..=hi).contains(&v) {
        Ok(v)
    } else {
        Err(range(key, &format!("in [{lo},{hi}]"), v))
    }
}

fn reliability(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(range(key, "in (0,1]", v))
    }
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    parse_as(key, value, "true or false")
}

impl RunConfig {
    /// Applies one setting. Per-key ranges are checked here; checks that
    /// involve several keys wait for [`RunConfig::validate`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value;
        match key {
            "experiment" => {
                self.experiment = v.parse().map_err(|_| ConfigError::BadValue {
                    key: key.into(),
                    value: v.into(),
                    expected: "latency|reliability|energy-surface|energy-compare|solve-one",
                })?
            }
            "seed" => self.seed = parse_as(key, v, "an unsigned integer")?,
            "trials" => {
                self.trials = parse_as(key, v, "an unsigned integer")?;
                if self.trials == 0 {
                    return Err(range(key, ">= 1", 0));
                }
            }
            "out" => {
                if v.is_empty() {
                    return Err(range(key, "a nonempty path", "\"\""));
                }
                self.out = PathBuf::from(v)
            }
            "trace" => self.trace = boolean(key, v)?,
            "p" => self.dist.p = parse_as(key, v, "an unsigned integer")?,
            "freq_low_hz" => self.dist.freq_range.0 = positive(key, real(key, v)?)?,
            "freq_high_hz" => self.dist.freq_range.1 = positive(key, real(key, v)?)?,
            "fail_low" => self.dist.fail_range.0 = nonnegative(key, real(key, v)?)?,
            "fail_high" => self.dist.fail_range.1 = nonnegative(key, real(key, v)?)?,
            "link_fail_low" => self.dist.link_fail_range.0 = nonnegative(key, real(key, v)?)?,
            "link_fail_high" => self.dist.link_fail_range.1 = nonnegative(key, real(key, v)?)?,
            "placement_cube_m" => self.dist.placement_cube_m = positive(key, real(key, v)?)?,
            "bandwidth_hz" => self.dist.channel.bandwidth_hz = positive(key, real(key, v)?)?,
            "tx_power_w" => self.dist.channel.tx_power_w = positive(key, real(key, v)?)?,
            "rx_power_w" => self.dist.channel.rx_power_w = positive(key, real(key, v)?)?,
            "noise_w" => self.dist.channel.noise_w = positive(key, real(key, v)?)?,
            NOISE_DBM => self.dist.channel.noise_w = positive(key, dbm_to_watts(real(key, v)?))?,
            "path_loss_exp" => self.dist.channel.path_loss_exp = within(key, real(key, v)?, 2.0, 5.0)?,
            "overhead_ratio" => {
                let r = real(key, v)?;
                if r < 1.0 {
                    return Err(range(key, ">= 1", r));
                }
                self.dist.channel.overhead_ratio = r
            }
            "max_radius_m" => self.dist.channel.max_radius_m = positive(key, real(key, v)?)?,
            "k" => self.dist.power.k = positive(key, real(key, v)?)?,
            "sigma" => {
                let s = real(key, v)?;
                if s < 2.0 {
                    return Err(range(key, ">= 2", s));
                }
                self.dist.power.sigma = s
            }
            "cloud_x_m" => self.dist.cloud.position.x = real(key, v)?,
            "cloud_y_m" => self.dist.cloud.position.y = real(key, v)?,
            "cloud_z_m" => self.dist.cloud.position.z = real(key, v)?,
            "cloud_cpu_freq_hz" => self.dist.cloud.cpu_freq_hz = positive(key, real(key, v)?)?,
            "cloud_bandwidth_hz" => self.dist.cloud.bandwidth_hz = positive(key, real(key, v)?)?,
            "cloud_fail_rate" => self.dist.cloud.fail_rate = nonnegative(key, real(key, v)?)?,
            "cloud_link_fail_rate" => self.dist.cloud.link_fail_rate = nonnegative(key, real(key, v)?)?,
            "d0_mb" => self.d0_mb = positive(key, real(key, v)?)?,
            "complexity" => self.complexity = positive(key, real(key, v)?)?,
            "t0_s" => self.t0_s = positive(key, real(key, v)?)?,
            "r0" => self.r0 = reliability(key, real(key, v)?)?,
            "generations" => {
                self.ga.generations = parse_as(key, v, "an unsigned integer")?;
                if self.ga.generations == 0 {
                    return Err(range(key, ">= 1", 0));
                }
            }
            "pop_size" => {
                self.ga.pop_size = parse_as(key, v, "an unsigned integer")?;
                if self.ga.pop_size < 2 {
                    return Err(range(key, ">= 2", self.ga.pop_size));
                }
            }
            "crossover_prob" => self.ga.crossover_prob = within(key, real(key, v)?, 0.0, 1.0)?,
            "mutation_prob" => self.ga.mutation_prob = within(key, real(key, v)?, 0.0, 1.0)?,
            "mutation_shape" => self.ga.mutation_shape = within(key, real(key, v)?, 2.0, 5.0)?,
            "mutation_exponent" => {
                self.ga.mutation_exponent = match v {
                    "product" => MutationExponent::Product,
                    "power" => MutationExponent::Power,
                    _ => {
                        return Err(ConfigError::BadValue {
                            key: key.into(),
                            value: v.into(),
                            expected: "product|power",
                        })
                    }
                }
            }
            "worst_init" => self.ga.worst_init = positive(key, real(key, v)?)?,
            "penalty_base" => {
                self.ga.penalty = PenaltySchedule::Linear {
                    base: positive(key, real(key, v)?)?,
                }
            }
            "elite_count" => {
                self.ga.elite_count = parse_as(key, v, "an unsigned integer")?;
                if self.ga.elite_count == 0 {
                    return Err(range(key, ">= 1", 0));
                }
            }
            "repair" => self.ga.repair = boolean(key, v)?,
            "chunks" => {
                self.chunks = parse_as(key, v, "an unsigned integer")?;
                if self.chunks == 0 {
                    return Err(range(key, ">= 1", 0));
                }
            }
            "d0_sweep_mb" => {
                let xs: Vec<f64> = list(key, v, "a list of numbers")?;
                for &x in &xs {
                    positive(key, x)?;
                }
                self.d0_sweep_mb = xs
            }
            "t0_sweep_s" => {
                let xs: Vec<f64> = list(key, v, "a list of numbers")?;
                for &x in &xs {
                    positive(key, x)?;
                }
                self.t0_sweep_s = xs
            }
            "r0_sweep" => {
                let xs: Vec<f64> = list(key, v, "a list of numbers")?;
                for &x in &xs {
                    reliability(key, x)?;
                }
                self.r0_sweep = xs
            }
            "algorithms" => {
                let algs: Vec<Algorithm> = list(key, v, "random|wrr|maxmin|minmin|lrga")?;
                if algs.is_empty() {
                    return Err(range(key, "a nonempty list", "\"\""));
                }
                self.algorithms = algs
            }
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: 0,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Checks that involve more than one key.
    pub fn validate(&self) -> Result<()> {
        for (lo_key, hi_key, (lo, hi)) in [
            ("freq_low_hz", "freq_high_hz", self.dist.freq_range),
            ("fail_low", "fail_high", self.dist.fail_range),
            ("link_fail_low", "link_fail_high", self.dist.link_fail_range),
        ] {
            if lo > hi {
                return Err(ConfigError::Conflict(format!("{lo_key} ({lo}) must not exceed {hi_key} ({hi})")));
            }
        }
        if self.ga.elite_count >= self.ga.pop_size {
            return Err(ConfigError::Conflict(format!(
                "elite_count ({}) must be below pop_size ({})",
                self.ga.elite_count, self.ga.pop_size
            )));
        }
        for (key, xs) in [
            ("d0_sweep_mb", &self.d0_sweep_mb),
            ("t0_sweep_s", &self.t0_sweep_s),
            ("r0_sweep", &self.r0_sweep),
        ] {
            if xs.is_empty() {
                return Err(range(key, "a nonempty list", "\"\""));
            }
        }
        Ok(())
    }

    pub fn task(&self) -> TaskSpec {
        TaskSpec::new(self.d0_mb * BITS_PER_MB, self.complexity, self.t0_s, self.r0)
            .expect("task fields are range-checked when set")
    }

    pub fn monte_carlo(&self) -> MonteCarlo {
        let mut mc = MonteCarlo::new(self.dist.clone(), self.task(), self.ga.clone(), self.trials, self.seed);
        mc.chunks = self.chunks;
        mc
    }

    /// Current value of every key, in [`KEYS`] order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let d = &self.dist;
        let c = &d.channel;
        let cloud = &d.cloud;
        let join = |xs: &[f64]| xs.iter().map(f64::to_string).collect::<Vec<_>>().join(", ");
        let PenaltySchedule::Linear { base } = self.ga.penalty;
        let values = vec![
            self.experiment.to_string(),
            self.seed.to_string(),
            self.trials.to_string(),
            self.out.display().to_string(),
            self.trace.to_string(),
            d.p.to_string(),
            d.freq_range.0.to_string(),
            d.freq_range.1.to_string(),
            d.fail_range.0.to_string(),
            d.fail_range.1.to_string(),
            d.link_fail_range.0.to_string(),
            d.link_fail_range.1.to_string(),
            d.placement_cube_m.to_string(),
            c.bandwidth_hz.to_string(),
            c.tx_power_w.to_string(),
            c.rx_power_w.to_string(),
            c.noise_w.to_string(),
            c.path_loss_exp.to_string(),
            c.overhead_ratio.to_string(),
            c.max_radius_m.to_string(),
            d.power.k.to_string(),
            d.power.sigma.to_string(),
            cloud.position.x.to_string(),
            cloud.position.y.to_string(),
            cloud.position.z.to_string(),
            cloud.cpu_freq_hz.to_string(),
            cloud.bandwidth_hz.to_string(),
            cloud.fail_rate.to_string(),
            cloud.link_fail_rate.to_string(),
            self.d0_mb.to_string(),
            self.complexity.to_string(),
            self.t0_s.to_string(),
            self.r0.to_string(),
            self.ga.generations.to_string(),
            self.ga.pop_size.to_string(),
            self.ga.crossover_prob.to_string(),
            self.ga.mutation_prob.to_string(),
            self.ga.mutation_shape.to_string(),
            match self.ga.mutation_exponent {
                MutationExponent::Product => "product".to_string(),
                MutationExponent::Power => "power".to_string(),
            },
            self.ga.worst_init.to_string(),
            base.to_string(),
            self.ga.elite_count.to_string(),
            self.ga.repair.to_string(),
            self.chunks.to_string(),
            join(&self.d0_sweep_mb),
            join(&self.t0_sweep_s),
            join(&self.r0_sweep),
            self.algorithms.iter().map(|a| a.name()).collect::<Vec<_>>().join(", "),
        ];
        KEYS.iter().copied().zip(values).collect()
    }

    /// Every key with its resolved value. Floats use the shortest form that
    /// parses back to the same bits, so `parse_str(&c.serialize()) == c`.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        }
        s
    }
}

pub fn parse_str(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut seen: Vec<&str> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: line_no,
                text: raw.to_string(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                line: line_no,
                text: raw.to_string(),
            });
        }
        if !KEYS.contains(&key) && key != NOISE_DBM {
            return Err(ConfigError::UnknownKey {
                line: line_no,
                key: key.to_string(),
            });
        }
        // both noise spellings set the same field
        let slot = if key == NOISE_DBM { "noise_w" } else { key };
        if seen.contains(&slot) {
            return Err(ConfigError::DuplicateKey {
                line: line_no,
                key: key.to_string(),
            });
        }
        seen.push(slot);
        cfg.set(key, value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError::Read {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_str(&text)
}
