mod common;

use common::random_scenario;
use fcsd_core::harness::{MonteCarlo, ScenarioDistribution};
use fcsd_core::model::{Scenario, TaskSpec, BITS_PER_MB};
use fcsd_core::solver::{
    constraint_violations, crossover, mutate, select, solve, solve_seeded, solve_traced, Chromosome,
    MutationExponent,
};
use fcsd_core::{Allocation, GaConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn task(d0_mb: f64) -> TaskSpec {
    TaskSpec::new(d0_mb * BITS_PER_MB, 237.5, 0.8, 0.99).unwrap()
}

fn quick() -> GaConfig {
    GaConfig {
        generations: 60,
        pop_size: 40,
        ..GaConfig::default()
    }
}

/// Lowest feasible energy over `rho` and `lambda_1` on a 0.01 grid, two fog nodes.
fn grid_minimum(scn: &Scenario, task: &TaskSpec) -> Option<f64> {
    let mut best: Option<f64> = None;
    for i in 0..=100 {
        for j in 0..=100 {
            let l = j as f64 / 100.0;
            let m = scn.metrics(task, &Allocation::new(i as f64 / 100.0, vec![l, 1.0 - l]));
            if m.feasible && best.is_none_or(|b| m.e_total_j < b) {
                best = Some(m.e_total_j);
            }
        }
    }
    best
}

#[test]
fn penalty_invariants_hold_every_generation() {
    for seed in 0..4u64 {
        let scn = random_scenario(seed, 10);
        let cfg = GaConfig {
            rng_seed: seed,
            ..GaConfig::default()
        };
        let sol = solve_traced(&scn, &task(0.1), &cfg).unwrap();
        assert_eq!(sol.trace.len(), cfg.generations);
        let mut prev: Option<(f64, f64)> = None;
        for g in &sol.trace {
            if let (Some(hi), Some(lo)) = (g.max_feasible_fitness, g.min_infeasible_fitness) {
                assert!(hi < lo, "generation {}: {hi} vs {lo}", g.generation);
            }
            if let Some(lo) = g.min_infeasible_fitness {
                assert!(lo >= g.worst_feasible);
            }
            if let Some((best, wor)) = prev {
                assert!(g.best_fitness <= best);
                assert!(g.worst_feasible >= wor);
            }
            prev = Some((g.best_fitness, g.worst_feasible));
        }
    }
}

#[test]
fn same_seed_same_answer() {
    let scn = random_scenario(9, 6);
    let cfg = GaConfig {
        rng_seed: 77,
        ..quick()
    };
    let a = solve_traced(&scn, &task(0.2), &cfg).unwrap();
    let b = solve_traced(&scn, &task(0.2), &cfg).unwrap();
    assert_eq!(a, b);
    let c = solve_traced(&scn, &task(0.2), &GaConfig { rng_seed: 78, ..cfg }).unwrap();
    assert_ne!(a.allocation, c.allocation);
}

#[test]
fn close_to_grid_oracle_on_two_nodes() {
    let dist = ScenarioDistribution {
        p: 2,
        ..ScenarioDistribution::default()
    };
    let mc = MonteCarlo::new(dist, task(0.1), GaConfig::default(), 1, 11);
    let mut checked = 0;
    for t in 0..200 {
        let trial = mc.trial(t).unwrap();
        let Some(best) = grid_minimum(&trial.scenario, &mc.task) else {
            continue;
        };
        let cfg = GaConfig {
            rng_seed: trial.ga_seed,
            ..GaConfig::default()
        };
        let sol = solve(&trial.scenario, &mc.task, &cfg).unwrap();
        assert!(sol.metrics.feasible, "trial {t}");
        assert!(sol.metrics.e_total_j <= 1.05 * best, "trial {t}: {} vs {best}", sol.metrics.e_total_j);
        checked += 1;
        if checked == 8 {
            break;
        }
    }
    assert_eq!(checked, 8);
}

#[test]
fn vacuous_bounds_reach_unconstrained_minimum() {
    let dist = ScenarioDistribution {
        p: 2,
        ..ScenarioDistribution::default()
    };
    let loose = TaskSpec::new(0.5 * BITS_PER_MB, 237.5, 1e6, 1e-300).unwrap();
    let mc = MonteCarlo::new(dist, loose.clone(), GaConfig::default(), 1, 3);
    for t in 0..5 {
        let trial = mc.trial(t).unwrap();
        let best = grid_minimum(&trial.scenario, &loose).unwrap();
        let sol = solve(&trial.scenario, &loose, &GaConfig { rng_seed: t as u64, ..GaConfig::default() }).unwrap();
        assert!(sol.metrics.feasible);
        assert!(sol.metrics.e_total_j <= 1.05 * best, "{} vs {best}", sol.metrics.e_total_j);
    }
}

#[test]
fn seeding_never_hurts() {
    for seed in 0..5 {
        let scn = random_scenario(100 + seed, 5);
        let t = task(0.1).with_bounds(3.0, 0.9).unwrap();
        let first = solve(&scn, &t, &GaConfig { rng_seed: seed, ..quick() }).unwrap();
        if !first.metrics.feasible {
            continue;
        }
        let again = solve_seeded(&scn, &t, &GaConfig { rng_seed: seed + 1, ..quick() }, &[first.allocation.clone()]).unwrap();
        assert!(again.metrics.feasible);
        assert!(again.metrics.e_total_j <= first.metrics.e_total_j);
    }
}

#[test]
fn returned_allocation_is_normalized() {
    for seed in 0..6 {
        let scn = random_scenario(200 + seed, 1 + seed as usize);
        let sol = solve(&scn, &task(0.3), &GaConfig { rng_seed: seed, ..quick() }).unwrap();
        assert!(sol.allocation.in_bounds());
        assert!(sol.allocation.is_normalized());
        assert_eq!(sol.metrics, scn.metrics(&task(0.3), &sol.allocation));
    }
}

#[test]
fn violation_rows_by_hand() {
    let scn = random_scenario(1, 3);
    let loose = task(0.1).with_bounds(1e6, 1e-300).unwrap();
    let x = Chromosome::new(vec![0.0, 0.5, 0.3, 0.3]);
    let v = constraint_violations(&x, &scn, &loose).unwrap();
    assert_eq!(v.len(), 3 + 4);
    assert!(v[..4].iter().all(|&r| r == 0.0));
    assert!((v[4] - 0.1).abs() < 1e-12);
    assert_eq!(&v[5..], &[0.0, 0.0]);
    let local = Chromosome::new(vec![1.0, 0.0, 0.0, 0.0]);
    assert!(constraint_violations(&local, &scn, &loose).unwrap().iter().all(|&r| r == 0.0));
}

proptest! {
    #[test]
    fn crossover_conserves_gene_sums(a in prop::collection::vec(0.0f64..=1.0, 1..12), seed in any::<u64>()) {
        let b: Vec<f64> = a.iter().rev().cloned().collect();
        let (x1, x2) = (Chromosome::new(a.clone()), Chromosome::new(b.clone()));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (c1, c2) = crossover(&x1, &x2, &mut rng);
        for i in 0..a.len() {
            prop_assert!((c1.genes()[i] + c2.genes()[i] - a[i] - b[i]).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&c1.genes()[i]));
        }
    }

    #[test]
    fn operators_keep_genes_in_range(genes in prop::collection::vec(0.0f64..=1.0, 1..12), g in 0usize..=300, seed in any::<u64>()) {
        let x = Chromosome::new(genes);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for exponent in [MutationExponent::Product, MutationExponent::Power] {
            let y = mutate(&x, 1.0, g, 300, 3.0, exponent, &mut rng);
            prop_assert_eq!(y.len(), x.len());
            prop_assert!(y.genes().iter().all(|v| (0.0..=1.0).contains(v)));
        }
        let pop: Vec<Chromosome> = (0..10).map(|_| Chromosome::random(x.len(), &mut rng)).collect();
        let fit: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let next = select(&pop, &fit, 2, &mut rng);
        prop_assert_eq!(next.len(), 10);
        prop_assert_eq!(&next[0], &pop[0]);
        prop_assert_eq!(&next[1], &pop[1]);
    }
}
