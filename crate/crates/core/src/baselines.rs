//! Comparison allocators. None of them look at the latency or reliability
//! bounds; callers evaluate the result afterwards.
//!
//! Max-Min and Min-Min are list schedulers over `chunks` equal pieces of the
//! task. Each processor (the initiator plus every fog node) finishes its
//! load `L` at `L * t_full`, where `t_full` is the time it would need for
//! the whole task (upload plus compute for a fog node).

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Allocation, Scenario, TaskSpec};

/// Everything uniform at random: `rho ~ U[0, 1]`, split from `p` normalised uniforms.
pub fn random_alloc<R: Rng + ?Sized>(scn: &Scenario, rng: &mut R) -> Allocation {
    let p = scn.p();
    let rho: f64 = rng.random();
    let draws: Vec<f64> = (0..p).map(|_| rng.random::<f64>()).collect();
    Allocation::new(rho, normalize_or_uniform(draws))
}

/// Weighted round robin: every processor gets work in proportion to its
/// CPU frequency.
pub fn wrr_alloc(scn: &Scenario) -> Allocation {
    let f0 = scn.initiator().cpu_freq_hz;
    let freqs: Vec<f64> = scn.fog_nodes().iter().map(|n| n.cpu_freq_hz).collect();
    let fog_total: f64 = freqs.iter().sum();
    let rho = f0 / (f0 + fog_total);
    Allocation::new(rho, normalize_or_uniform(freqs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ListRule {
    /// Schedule the piece with the largest best-case completion time first.
    MaxMin,
    /// Schedule the piece with the smallest best-case completion time first.
    MinMin,
}

pub fn max_min_alloc(scn: &Scenario, task: &TaskSpec, chunks: usize) -> Result<Allocation> {
    list_alloc(scn, task, chunks, ListRule::MaxMin)
}

pub fn min_min_alloc(scn: &Scenario, task: &TaskSpec, chunks: usize) -> Result<Allocation> {
    list_alloc(scn, task, chunks, ListRule::MinMin)
}

/// Time for each processor to run the whole task alone, initiator first.
/// A fog node behind a dead link never finishes.
pub fn full_task_times(scn: &Scenario, task: &TaskSpec) -> Vec<f64> {
    let bits = task.data_size_bits();
    let beta = scn.channel().overhead_ratio;
    let mut times = Vec::with_capacity(scn.p() + 1);
    times.push(task.total_cycles() / scn.initiator().cpu_freq_hz);
    for (node, &rate) in scn.fog_nodes().iter().zip(scn.rates()) {
        let up = if rate > 0.0 { beta * bits / rate } else { f64::INFINITY };
        times.push(up + task.total_cycles() / node.cpu_freq_hz);
    }
    times
}

pub fn list_alloc(scn: &Scenario, task: &TaskSpec, chunks: usize, rule: ListRule) -> Result<Allocation> {
    let p = scn.p();
    if chunks < p.max(1) {
        return Err(Error::Config(format!(
            "chunks must be at least the number of fog nodes ({p}), got {chunks}"
        )));
    }
    let pieces = vec![1.0 / chunks as f64; chunks];
    let loads = list_schedule(&full_task_times(scn, task), &pieces, rule);
    Ok(loads_to_allocation(&loads))
}

/// Greedy list scheduling of `pieces` (task fractions) onto processors with
/// the given whole-task times. Returns the fraction assigned to each
/// processor. Ties go to the lower index.
pub fn list_schedule(full_times: &[f64], pieces: &[f64], rule: ListRule) -> Vec<f64> {
    let mut loads = vec![0.0; full_times.len()];
    let mut pending: Vec<f64> = pieces.to_vec();
    while !pending.is_empty() {
        // best processor and completion time for every pending piece
        let options: Vec<(usize, f64)> = pending.iter().map(|&s| best_processor(&loads, full_times, s)).collect();
        let mut pick = 0;
        for k in 1..options.len() {
            let better = match rule {
                ListRule::MinMin => options[k].1 < options[pick].1,
                ListRule::MaxMin => options[k].1 > options[pick].1,
            };
            if better {
                pick = k;
            }
        }
        loads[options[pick].0] += pending[pick];
        pending.remove(pick);
    }
    loads
}

fn best_processor(loads: &[f64], full_times: &[f64], piece: f64) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, (&load, &t)) in loads.iter().zip(full_times).enumerate() {
        let done = (load + piece) * t;
        if done < best.1 {
            best = (j, done);
        }
    }
    best
}

/// Per-processor fractions (initiator first) to `(rho, lambda)`.
fn loads_to_allocation(loads: &[f64]) -> Allocation {
    let total: f64 = loads.iter().sum();
    let rho = (loads[0] / total).clamp(0.0, 1.0);
    let fog: Vec<f64> = loads[1..].to_vec();
    Allocation::new(rho, normalize_or_uniform(fog))
}

/// Scale to sum one; all-zero input becomes the uniform split.
fn normalize_or_uniform(mut v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        for x in &mut v {
            *x /= total;
        }
    } else if !v.is_empty() {
        let u = 1.0 / v.len() as f64;
        v.iter_mut().for_each(|x| *x = u);
    }
    v
}
