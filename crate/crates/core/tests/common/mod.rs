//! Shared fixtures: random scenarios built through the public constructors
//! and a term-by-term recomputation of the three totals.

#![allow(dead_code)]

use fcsd_core::model::{distance, ChannelModel, CloudSpec, DroneNode, Position, PowerModel, Scenario, TaskSpec};
use fcsd_core::Allocation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Scenario with `p` fog nodes and randomised channel constants.
pub fn random_scenario(seed: u64, p: usize) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let channel = ChannelModel {
        path_loss_exp: rng.random_range(2.0..=5.0),
        overhead_ratio: rng.random_range(1.0..2.0),
        ..ChannelModel::default()
    };
    let init = DroneNode::new(0, Position::ORIGIN, rng.random_range(0.2e9..0.9e9), rng.random_range(0.001..0.3)).unwrap();
    let mut nodes = Vec::new();
    while nodes.len() < p {
        let pos = Position::new(
            rng.random_range(-57.0..57.0),
            rng.random_range(-57.0..57.0),
            rng.random_range(-57.0..57.0),
        );
        if distance(Position::ORIGIN, pos) > channel.max_radius_m {
            continue;
        }
        let id = nodes.len() + 1;
        nodes.push(DroneNode::new(id, pos, rng.random_range(0.2e9..0.9e9), rng.random_range(0.001..0.3)).unwrap());
    }
    let fading = (0..p).map(|_| rng.random_range(0.05..2.5)).collect();
    let link_fail = (0..p).map(|_| rng.random_range(0.001..0.3)).collect();
    Scenario::new(init, nodes, channel, PowerModel::default(), fading, link_fail, Some(CloudSpec::default())).unwrap()
}

pub fn random_allocation<R: Rng>(rng: &mut R, p: usize) -> Allocation {
    let rho = rng.random::<f64>();
    let raw: Vec<f64> = (0..p).map(|_| rng.random::<f64>()).collect();
    let s: f64 = raw.iter().sum();
    Allocation::new(rho, raw.iter().map(|x| x / s).collect())
}

pub struct Terms {
    pub latency: f64,
    pub reliability: f64,
    pub energy: f64,
}

/// Recomputes latency, reliability and energy from the raw formulas.
pub fn oracle(scn: &Scenario, task: &TaskSpec, a: &Allocation) -> Terms {
    let ch = scn.channel();
    let pw = scn.power();
    let d0 = task.data_size_bits();
    let alpha = task.complexity();
    let f0 = scn.initiator().cpu_freq_hz;

    let t_local = a.rho * alpha * d0 / f0;
    let mut branches = vec![t_local];
    let mut factors = vec![(-scn.initiator().fail_rate * t_local).exp()];
    let mut energy = pw.k * f0.powf(pw.sigma) * t_local;

    for (i, node) in scn.fog_nodes().iter().enumerate() {
        let lam = a.lambda[i];
        if lam == 0.0 {
            continue;
        }
        let dist = distance(scn.initiator().position, node.position).max(1.0);
        let snr = ch.tx_power_w * dist.powf(-ch.path_loss_exp) * scn.fading()[i] / ch.noise_w;
        let rate = ch.bandwidth_hz * (1.0 + snr).log2();
        let t_up = ch.overhead_ratio * lam * (1.0 - a.rho) * d0 / rate;
        let t_comp = alpha * lam * (1.0 - a.rho) * d0 / node.cpu_freq_hz;
        branches.push(t_up + t_comp);
        factors.push((-node.fail_rate * t_comp).exp());
        factors.push((-scn.link_fail()[i] * t_up).exp());
        energy += pw.k * node.cpu_freq_hz.powf(pw.sigma) * t_comp;
        energy += (ch.tx_power_w + ch.rx_power_w) * t_up;
    }
    Terms {
        latency: branches.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        reliability: factors.iter().product(),
        energy,
    }
}
