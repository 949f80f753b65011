//! System model of a drone swarm executing one divisible task.
//!
//! The initiator drone keeps a fraction `rho` of the task and ships the rest
//! to its fog nodes, node `i` receiving `lambda[i] * (1 - rho)` of it. Each
//! branch costs an uplink transfer plus computation; the task finishes when
//! the slowest branch does. Failures of drones and links are Poisson, so the
//! probability that nothing fails is the exponential of the accumulated
//! hazard over every busy period. Energy is CPU power `k f^sigma` times busy
//! time plus radio power at both ends of each transfer. Result downlink is
//! free.
//!
//! All quantities are SI: bits, seconds, hertz, watts, joules, metres.

use crate::error::{check_nonnegative, check_positive, check_unit_interval, Error, Result};

/// Distances below this are clamped before path loss is applied.
pub const DISTANCE_FLOOR_M: f64 = 1.0;

/// Absolute tolerance on the task-conservation equality `rho + sum(lambda)(1 - rho) = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// One megabyte of task input, in bits.
pub const BITS_PER_MB: f64 = 8e6;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub const ORIGIN: Position = Position {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Position { x, y, z }
    }
}

/// Euclidean distance in metres.
pub fn distance(a: Position, b: Position) -> f64 {
    let (dx, dy, dz) = (a.x - b.x, a.y - b.y, a.z - b.z);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// The computing task: input size, cycles per bit and the two QoS bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskSpec {
    data_size_bits: f64,
    complexity: f64,
    latency_bound_s: f64,
    reliability_bound: f64,
}

impl TaskSpec {
    pub fn new(
        data_size_bits: f64,
        complexity: f64,
        latency_bound_s: f64,
        reliability_bound: f64,
    ) -> Result<Self> {
        check_positive("data_size_bits", data_size_bits)?;
        check_positive("complexity", complexity)?;
        check_positive("latency_bound_s", latency_bound_s)?;
        if !(reliability_bound > 0.0 && reliability_bound <= 1.0) {
            return Err(Error::OutOfRange {
                name: "reliability_bound",
                value: reliability_bound,
                expected: "a value in (0, 1]",
            });
        }
        let task = TaskSpec {
            data_size_bits,
            complexity,
            latency_bound_s,
            reliability_bound,
        };
        check_positive("total_cycles", task.total_cycles())?;
        Ok(task)
    }

    pub fn data_size_bits(&self) -> f64 {
        self.data_size_bits
    }

    pub fn complexity(&self) -> f64 {
        self.complexity
    }

    pub fn latency_bound_s(&self) -> f64 {
        self.latency_bound_s
    }

    pub fn reliability_bound(&self) -> f64 {
        self.reliability_bound
    }

    /// CPU cycles needed for the whole task.
    pub fn total_cycles(&self) -> f64 {
        self.complexity * self.data_size_bits
    }

    pub fn with_data_size_bits(&self, bits: f64) -> Result<Self> {
        TaskSpec::new(bits, self.complexity, self.latency_bound_s, self.reliability_bound)
    }

    pub fn with_bounds(&self, latency_bound_s: f64, reliability_bound: f64) -> Result<Self> {
        TaskSpec::new(self.data_size_bits, self.complexity, latency_bound_s, reliability_bound)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DroneNode {
    pub id: usize,
    pub position: Position,
    pub cpu_freq_hz: f64,
    /// Poisson failure rate while busy, per second.
    pub fail_rate: f64,
}

impl DroneNode {
    pub fn new(id: usize, position: Position, cpu_freq_hz: f64, fail_rate: f64) -> Result<Self> {
        check_positive("cpu_freq_hz", cpu_freq_hz)?;
        check_nonnegative("fail_rate", fail_rate)?;
        Ok(DroneNode {
            id,
            position,
            cpu_freq_hz,
            fail_rate,
        })
    }
}

/// Drone-to-drone radio link parameters shared by every uplink.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub bandwidth_hz: f64,
    pub tx_power_w: f64,
    pub rx_power_w: f64,
    /// Noise power, linear watts.
    pub noise_w: f64,
    pub path_loss_exp: f64,
    /// Transmitted bits per task bit (protocol overhead).
    pub overhead_ratio: f64,
    pub max_radius_m: f64,
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        check_positive("bandwidth_hz", self.bandwidth_hz)?;
        check_positive("tx_power_w", self.tx_power_w)?;
        check_positive("rx_power_w", self.rx_power_w)?;
        check_positive("noise_w", self.noise_w)?;
        check_positive("max_radius_m", self.max_radius_m)?;
        if !(2.0..=5.0).contains(&self.path_loss_exp) {
            return Err(Error::OutOfRange {
                name: "path_loss_exp",
                value: self.path_loss_exp,
                expected: "a value in [2, 5]",
            });
        }
        if !(self.overhead_ratio >= 1.0 && self.overhead_ratio.is_finite()) {
            return Err(Error::OutOfRange {
                name: "overhead_ratio",
                value: self.overhead_ratio,
                expected: "a finite value >= 1",
            });
        }
        Ok(())
    }
}

impl Default for ChannelModel {
    fn default() -> Self {
        ChannelModel {
            bandwidth_hz: 1e6,
            tx_power_w: 1.258,
            rx_power_w: 1.181,
            noise_w: dbm_to_watts(-100.0),
            path_loss_exp: 3.0,
            overhead_ratio: 1.0,
            max_radius_m: 100.0,
        }
    }
}

/// Dynamic CPU power `k * f^sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModel {
    pub k: f64,
    pub sigma: f64,
}

impl PowerModel {
    pub fn validate(&self) -> Result<()> {
        check_positive("k", self.k)?;
        if !(self.sigma >= 2.0 && self.sigma.is_finite()) {
            return Err(Error::OutOfRange {
                name: "sigma",
                value: self.sigma,
                expected: "a finite value >= 2",
            });
        }
        Ok(())
    }

    /// Power drawn while computing at `freq_hz`, watts.
    pub fn compute_power(&self, freq_hz: f64) -> f64 {
        self.k * freq_hz.powf(self.sigma)
    }
}

impl Default for PowerModel {
    fn default() -> Self {
        PowerModel {
            k: 1.25e-26,
            sigma: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudSpec {
    pub position: Position,
    pub cpu_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub fail_rate: f64,
    pub link_fail_rate: f64,
}

impl CloudSpec {
    pub fn validate(&self) -> Result<()> {
        check_positive("cloud_cpu_freq_hz", self.cpu_freq_hz)?;
        check_positive("cloud_bandwidth_hz", self.bandwidth_hz)?;
        check_nonnegative("cloud_fail_rate", self.fail_rate)?;
        check_nonnegative("cloud_link_fail_rate", self.link_fail_rate)?;
        Ok(())
    }
}

impl Default for CloudSpec {
    fn default() -> Self {
        CloudSpec {
            position: Position::new(2000.0, 2000.0, 2000.0),
            cpu_freq_hz: 1e9,
            bandwidth_hz: 2e6,
            fail_rate: 0.00001,
            link_fail_rate: 0.17,
        }
    }
}

/// Achievable uplink rate in bits/s.
///
/// The SNR multiplies the received power by the fading magnitude `|h|`
/// (not `|h|^2`). `dist_m` is floored at [`DISTANCE_FLOOR_M`].
pub fn uplink_rate(ch: &ChannelModel, dist_m: f64, fading: f64) -> Result<f64> {
    if dist_m.is_nan() {
        return Err(Error::NonPositiveDistance(dist_m));
    }
    let d = dist_m.max(DISTANCE_FLOOR_M);
    check_nonnegative("fading", fading)?;
    let snr = ch.tx_power_w * d.powf(-ch.path_loss_exp) * fading / ch.noise_w;
    Ok(ch.bandwidth_hz * snr.ln_1p() / std::f64::consts::LN_2)
}

/// Time for the initiator to process its own share.
pub fn local_latency(task: &TaskSpec, f0: f64, rho: f64) -> f64 {
    rho * task.total_cycles() / f0
}

/// Time to push fog node `i`'s share over an uplink of `rate` bits/s.
pub fn upload_latency(task: &TaskSpec, ch: &ChannelModel, rate: f64, rho: f64, lambda_i: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::NonPositiveRate(rate));
    }
    Ok(ch.overhead_ratio * lambda_i * (1.0 - rho) * task.data_size_bits() / rate)
}

/// Time for a fog node running at `f_i` to process its share.
pub fn compute_latency(task: &TaskSpec, f_i: f64, rho: f64, lambda_i: f64) -> f64 {
    task.complexity() * lambda_i * (1.0 - rho) * task.data_size_bits() / f_i
}

/// Offloading decision: local fraction `rho` and per-fog-node split `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub rho: f64,
    pub lambda: Vec<f64>,
}

impl Allocation {
    pub fn new(rho: f64, lambda: Vec<f64>) -> Self {
        Allocation { rho, lambda }
    }

    /// Everything on the initiator.
    pub fn local_only(p: usize) -> Self {
        Allocation {
            rho: 1.0,
            lambda: vec![0.0; p],
        }
    }

    /// `rho + sum(lambda) (1 - rho)`: the fraction of the task assigned anywhere.
    pub fn assigned_fraction(&self) -> f64 {
        let s: f64 = self.lambda.iter().sum();
        self.rho + s * (1.0 - self.rho)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.rho >= 0.0 && self.lambda.iter().all(|&l| l >= 0.0)
    }

    pub fn in_bounds(&self) -> bool {
        check_unit_interval("rho", self.rho).is_ok()
            && self.lambda.iter().all(|&l| (0.0..=1.0).contains(&l))
    }

    /// Whether the split sums to one within [`NORMALIZATION_TOL`].
    pub fn is_normalized(&self) -> bool {
        (self.lambda.iter().sum::<f64>() - 1.0).abs() <= NORMALIZATION_TOL
    }

    pub fn conserves_task(&self) -> bool {
        (self.assigned_fraction() - 1.0).abs() <= NORMALIZATION_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub t_total_s: f64,
    pub r_total: f64,
    pub e_total_j: f64,
    pub feasible: bool,
}

/// Raw totals for one allocation, before any constraint check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Totals {
    pub latency_s: f64,
    pub reliability: f64,
    pub energy_j: f64,
}

/// Initiator, fog nodes and the per-link channel state. Immutable once built;
/// uplink rates and CPU powers are cached at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    initiator: DroneNode,
    fog_nodes: Vec<DroneNode>,
    channel: ChannelModel,
    power: PowerModel,
    fading: Vec<f64>,
    link_fail: Vec<f64>,
    cloud: Option<CloudSpec>,
    rates: Vec<f64>,
    initiator_power: f64,
    fog_power: Vec<f64>,
}

impl Scenario {
    pub fn new(
        initiator: DroneNode,
        fog_nodes: Vec<DroneNode>,
        channel: ChannelModel,
        power: PowerModel,
        fading: Vec<f64>,
        link_fail: Vec<f64>,
        cloud: Option<CloudSpec>,
    ) -> Result<Self> {
        channel.validate()?;
        power.validate()?;
        if let Some(c) = &cloud {
            c.validate()?;
        }
        let p = fog_nodes.len();
        for (what, len) in [("fading", fading.len()), ("link_fail", link_fail.len())] {
            if len != p {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: p,
                    got: len,
                });
            }
        }
        for node in std::iter::once(&initiator).chain(&fog_nodes) {
            check_positive("cpu_freq_hz", node.cpu_freq_hz)?;
            check_nonnegative("fail_rate", node.fail_rate)?;
        }
        for &mu in &link_fail {
            check_nonnegative("link_fail_rate", mu)?;
        }
        let mut rates = Vec::with_capacity(p);
        for (node, &h) in fog_nodes.iter().zip(&fading) {
            let d = distance(initiator.position, node.position);
            if d > channel.max_radius_m {
                return Err(Error::OutOfRadius {
                    id: node.id,
                    distance: d,
                    radius: channel.max_radius_m,
                });
            }
            rates.push(uplink_rate(&channel, d, h)?);
        }
        let initiator_power = power.compute_power(initiator.cpu_freq_hz);
        let fog_power = fog_nodes.iter().map(|n| power.compute_power(n.cpu_freq_hz)).collect();
        Ok(Scenario {
            initiator,
            fog_nodes,
            channel,
            power,
            fading,
            link_fail,
            cloud,
            rates,
            initiator_power,
            fog_power,
        })
    }

    pub fn initiator(&self) -> &DroneNode {
        &self.initiator
    }

    pub fn fog_nodes(&self) -> &[DroneNode] {
        &self.fog_nodes
    }

    /// Number of fog nodes.
    pub fn p(&self) -> usize {
        self.fog_nodes.len()
    }

    pub fn channel(&self) -> &ChannelModel {
        &self.channel
    }

    pub fn power(&self) -> &PowerModel {
        &self.power
    }

    pub fn fading(&self) -> &[f64] {
        &self.fading
    }

    pub fn link_fail(&self) -> &[f64] {
        &self.link_fail
    }

    pub fn cloud(&self) -> Option<&CloudSpec> {
        self.cloud.as_ref()
    }

    /// Cached uplink rate to each fog node, bits/s.
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    fn check_dims(&self, alloc: &Allocation) -> Result<()> {
        if alloc.lambda.len() != self.p() {
            return Err(Error::DimensionMismatch {
                what: "allocation lambda",
                expected: self.p(),
                got: alloc.lambda.len(),
            });
        }
        Ok(())
    }

    /// Latency, reliability and energy of `(rho, lambda)`. `lambda` must have
    /// one entry per fog node. A loaded branch over a zero-rate link takes
    /// forever and has reliability zero.
    pub fn totals(&self, task: &TaskSpec, rho: f64, lambda: &[f64]) -> Totals {
        debug_assert_eq!(lambda.len(), self.p());
        let bits = task.data_size_bits();
        let alpha = task.complexity();
        let beta = self.channel.overhead_ratio;
        let radio_w = self.channel.tx_power_w + self.channel.rx_power_w;

        let t_local = rho * alpha * bits / self.initiator.cpu_freq_hz;
        let mut latency = t_local;
        let mut hazard = hazard_of(self.initiator.fail_rate, t_local);
        let mut energy = self.initiator_power * t_local;

        let offloaded = (1.0 - rho) * bits;
        for i in 0..lambda.len() {
            let share = lambda[i] * offloaded;
            if share == 0.0 {
                continue;
            }
            let t_up = beta * share / self.rates[i];
            let t_comp = alpha * share / self.fog_nodes[i].cpu_freq_hz;
            latency = latency.max(t_up + t_comp);
            hazard += hazard_of(self.fog_nodes[i].fail_rate, t_comp) + hazard_of(self.link_fail[i], t_up);
            energy += self.fog_power[i] * t_comp + radio_w * t_up;
        }
        Totals {
            latency_s: latency,
            reliability: (-hazard).exp(),
            energy_j: energy,
        }
    }

    /// Totals plus the feasibility verdict.
    pub fn metrics(&self, task: &TaskSpec, alloc: &Allocation) -> Metrics {
        let t = self.totals(task, alloc.rho, &alloc.lambda);
        Metrics {
            t_total_s: t.latency_s,
            r_total: t.reliability,
            e_total_j: t.energy_j,
            feasible: t.latency_s <= task.latency_bound_s()
                && t.reliability >= task.reliability_bound()
                && alloc.is_nonnegative()
                && alloc.conserves_task(),
        }
    }
}

/// `rate * time`, treating a zero on either side as no exposure.
#[inline]
fn hazard_of(rate: f64, time: f64) -> f64 {
    if rate == 0.0 || time == 0.0 {
        0.0
    } else {
        rate * time
    }
}

/// Completion time of the slowest branch.
pub fn total_latency(scn: &Scenario, task: &TaskSpec, alloc: &Allocation) -> Result<f64> {
    scn.check_dims(alloc)?;
    Ok(scn.totals(task, alloc.rho, &alloc.lambda).latency_s)
}

/// Probability that no drone or link fails while busy with the task.
pub fn total_reliability(scn: &Scenario, task: &TaskSpec, alloc: &Allocation) -> Result<f64> {
    scn.check_dims(alloc)?;
    Ok(scn.totals(task, alloc.rho, &alloc.lambda).reliability)
}

/// Computation plus transmission energy of the whole swarm, joules.
pub fn total_energy(scn: &Scenario, task: &TaskSpec, alloc: &Allocation) -> Result<f64> {
    scn.check_dims(alloc)?;
    Ok(scn.totals(task, alloc.rho, &alloc.lambda).energy_j)
}

pub fn evaluate(scn: &Scenario, task: &TaskSpec, alloc: &Allocation) -> Result<Metrics> {
    scn.check_dims(alloc)?;
    Ok(scn.metrics(task, alloc))
}

/// Latency of shipping the whole task to the cloud and computing it there:
/// one uplink at the cloud bandwidth (unit fading) followed by computation
/// at the cloud CPU frequency.
pub fn cloud_latency(scn: &Scenario, task: &TaskSpec) -> Result<f64> {
    let cloud = scn.cloud().ok_or(Error::MissingCloud)?;
    let ch = ChannelModel {
        bandwidth_hz: cloud.bandwidth_hz,
        ..*scn.channel()
    };
    let d = distance(scn.initiator().position, cloud.position);
    let rate = uplink_rate(&ch, d, 1.0)?;
    let t_up = upload_latency(task, &ch, rate, 0.0, 1.0)?;
    Ok(t_up + task.total_cycles() / cloud.cpu_freq_hz)
}

/// Latency of running the whole task on the initiator.
pub fn local_only_latency(scn: &Scenario, task: &TaskSpec) -> f64 {
    local_latency(task, scn.initiator().cpu_freq_hz, 1.0)
}
