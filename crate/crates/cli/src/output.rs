//! CSV tables. Numbers are written in plain decimal notation with at least
//! twelve significant digits; `NaN` marks a mean over no trials.

use fcsd_core::harness::{AlgorithmRow, ExperimentResult, LatencyRow, SurfaceRow};
use fcsd_core::solver::GenerationRecord;
use fcsd_core::Solution;

const SIGNIFICANT: i32 = 12;

/// Decimal rendering with at least [`SIGNIFICANT`] significant digits.
pub fn number(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return format!("{:.*}", (SIGNIFICANT - 1) as usize, 0.0);
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (SIGNIFICANT - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

pub fn latency_table(res: &ExperimentResult<LatencyRow>) -> Table {
    let mut t = Table::new(&["d0_mb", "cloud_s", "local_s", "fog_s"]);
    for r in &res.rows {
        t.rows.push(vec![number(r.d0_mb), number(r.cloud_s), number(r.local_s), number(r.fog_s)]);
    }
    t
}

pub fn algorithm_table(res: &ExperimentResult<AlgorithmRow>) -> Table {
    let mut t = Table::new(&["d0_mb", "algorithm", "mean_value", "feasible_fraction"]);
    for r in &res.rows {
        t.rows.push(vec![
            number(r.d0_mb),
            r.algorithm.name().to_string(),
            number(r.mean_value),
            number(r.feasible_fraction),
        ]);
    }
    t
}

pub fn surface_table(res: &ExperimentResult<SurfaceRow>) -> Table {
    let mut t = Table::new(&["t0_s", "r0", "mean_energy_j"]);
    for r in &res.rows {
        t.rows.push(vec![number(r.t0_s), number(r.r0), number(r.mean_energy_j)]);
    }
    t
}

pub fn solution_table(p: usize, sol: &Solution) -> Table {
    let mut header = vec!["rho".to_string()];
    header.extend((1..=p).map(|i| format!("lambda_{i}")));
    header.extend(["t_total_s", "r_total", "e_total_j", "feasible"].map(String::from));
    let mut row = vec![number(sol.allocation.rho)];
    row.extend(sol.allocation.lambda.iter().map(|&l| number(l)));
    let m = &sol.metrics;
    row.extend([number(m.t_total_s), number(m.r_total), number(m.e_total_j), m.feasible.to_string()]);
    Table { header, rows: vec![row] }
}

pub fn trace_table(trace: &[GenerationRecord]) -> Table {
    let mut t = Table::new(&["generation", "best_fitness", "feasible_count", "wor"]);
    for g in trace {
        t.rows.push(vec![
            g.generation.to_string(),
            number(g.best_fitness),
            g.feasible_count.to_string(),
            number(g.worst_feasible),
        ]);
    }
    t
}
