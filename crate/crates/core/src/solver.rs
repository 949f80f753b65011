//! Real-coded genetic algorithm for the minimum-energy split.
//!
//! A chromosome is `[rho, lambda_1, .., lambda_p]`, every gene in `[0, 1]`.
//! Constraints are handled with an exterior penalty: a feasible individual
//! scores its energy, an infeasible one scores energy plus `h(g)` times its
//! summed violations, shifted so that the least-bad infeasible individual
//! lands exactly on `Wor(g)`, the worst feasible energy seen so far. Every
//! feasible individual therefore ranks ahead of every infeasible one.
//!
//! Each generation: assess, score, select (elitist 2-tournament), arithmetic
//! crossover on shuffled pairs, non-uniform mutation. Elites skip variation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Allocation, Metrics, Scenario, TaskSpec, NORMALIZATION_TOL};

/// Upper bound on any single penalty contribution, so fitness stays finite.
pub const PENALTY_CAP: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome(Vec<f64>);

impl Chromosome {
    /// Genes are clamped into `[0, 1]`.
    pub fn new(mut genes: Vec<f64>) -> Self {
        for g in &mut genes {
            *g = clamp_gene(*g);
        }
        Chromosome(genes)
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Chromosome((0..len).map(|_| rng.random::<f64>()).collect())
    }

    pub fn from_allocation(alloc: &Allocation) -> Self {
        let mut genes = Vec::with_capacity(alloc.lambda.len() + 1);
        genes.push(alloc.rho);
        genes.extend_from_slice(&alloc.lambda);
        Chromosome::new(genes)
    }

    pub fn genes(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn rho(&self) -> f64 {
        self.0[0]
    }

    pub fn shares(&self) -> &[f64] {
        &self.0[1..]
    }

    /// Rescales the split in place so it sums to one (see [`Chromosome::decode`]).
    pub fn repair(&mut self) {
        let total: f64 = self.0[1..].iter().sum();
        if total > 0.0 && (total - 1.0).abs() > 1e-12 {
            for g in &mut self.0[1..] {
                *g = clamp_gene(*g / total);
            }
        }
    }

    /// Allocation with the split rescaled to sum to one. Splits already within
    /// rounding of one are kept as-is so decoding is idempotent; an all-zero
    /// split is left at zero.
    pub fn decode(&self) -> Allocation {
        let shares = self.shares();
        let total: f64 = shares.iter().sum();
        let lambda = if total > 0.0 && (total - 1.0).abs() > 1e-12 {
            shares.iter().map(|l| l / total).collect()
        } else {
            shares.to_vec()
        };
        Allocation::new(self.rho(), lambda)
    }
}

fn clamp_gene(g: f64) -> f64 {
    if g.is_nan() {
        0.0
    } else {
        g.clamp(0.0, 1.0)
    }
}

/// Penalty factor `h(g)`, strictly increasing and unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenaltySchedule {
    /// `h(g) = base * (1 + g)`.
    Linear { base: f64 },
}

impl PenaltySchedule {
    pub fn factor(&self, generation: usize) -> f64 {
        match *self {
            PenaltySchedule::Linear { base } => base * (1.0 + generation as f64),
        }
    }
}

impl Default for PenaltySchedule {
    fn default() -> Self {
        PenaltySchedule::Linear { base: 1e3 }
    }
}

/// How the mutation exponent combines the generation ratio and shape `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MutationExponent {
    /// `(1 - g/G) * b`
    #[default]
    Product,
    /// `(1 - g/G)^b`
    Power,
}

impl MutationExponent {
    pub fn exponent(&self, generation: usize, generations: usize, shape: f64) -> f64 {
        let remaining = (1.0 - generation as f64 / generations as f64).max(0.0);
        match self {
            MutationExponent::Product => remaining * shape,
            MutationExponent::Power => remaining.powf(shape),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub generations: usize,
    pub pop_size: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    /// Non-uniform mutation shape `b`, in `[2, 5]`.
    pub mutation_shape: f64,
    pub mutation_exponent: MutationExponent,
    /// `Wor(0)`.
    pub worst_init: f64,
    pub penalty: PenaltySchedule,
    pub elite_count: usize,
    /// Write the rescaled split back into the chromosome after
    /// initialisation and mutation.
    pub repair: bool,
    pub rng_seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            generations: 300,
            pop_size: 100,
            crossover_prob: 0.8,
            mutation_prob: 0.1,
            mutation_shape: 3.0,
            mutation_exponent: MutationExponent::Product,
            worst_init: 1e5,
            penalty: PenaltySchedule::default(),
            elite_count: 2,
            repair: true,
            rng_seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.generations == 0 {
            return bad("generations must be positive".into());
        }
        if self.pop_size < 2 {
            return bad(format!("pop_size must be at least 2, got {}", self.pop_size));
        }
        if self.elite_count == 0 || self.elite_count >= self.pop_size {
            return bad(format!(
                "elite_count must be in [1, pop_size), got {} with pop_size {}",
                self.elite_count, self.pop_size
            ));
        }
        for (name, v) in [("crossover_prob", self.crossover_prob), ("mutation_prob", self.mutation_prob)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must be in [0, 1], got {v}"));
            }
        }
        if !(2.0..=5.0).contains(&self.mutation_shape) {
            return bad(format!("mutation_shape must be in [2, 5], got {}", self.mutation_shape));
        }
        if !(self.worst_init > 0.0 && self.worst_init.is_finite()) {
            return bad(format!("worst_init must be positive, got {}", self.worst_init));
        }
        let PenaltySchedule::Linear { base } = self.penalty;
        if !(base > 0.0 && base.is_finite()) {
            return bad(format!("penalty_base must be positive, got {base}"));
        }
        Ok(())
    }
}

/// Constraint violations of a chromosome, one row per constraint:
/// `p + 1` nonnegativity rows, the task-conservation equality, the latency
/// bound and the reliability bound.
pub fn constraint_violations(x: &Chromosome, scn: &Scenario, task: &TaskSpec) -> Result<Vec<f64>> {
    check_len(x, scn)?;
    let totals = scn.totals(task, x.rho(), x.shares());
    let mut rows: Vec<f64> = x.genes().iter().map(|&g| (-g).max(0.0)).collect();
    rows.push(conservation_residual(x));
    rows.push((totals.latency_s - task.latency_bound_s()).max(0.0));
    rows.push((task.reliability_bound() - totals.reliability).max(0.0));
    Ok(rows)
}

fn conservation_residual(x: &Chromosome) -> f64 {
    let rho = x.rho();
    let s: f64 = x.shares().iter().sum();
    (rho + s * (1.0 - rho) - 1.0).abs()
}

fn check_len(x: &Chromosome, scn: &Scenario) -> Result<()> {
    if x.len() != scn.p() + 1 {
        return Err(Error::DimensionMismatch {
            what: "chromosome",
            expected: scn.p() + 1,
            got: x.len(),
        });
    }
    Ok(())
}

/// Everything the fitness function needs to know about one individual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assessment {
    pub energy_j: f64,
    pub latency_s: f64,
    pub reliability: f64,
    /// Sum of all constraint violation rows.
    pub violation: f64,
    pub feasible: bool,
}

impl Assessment {
    pub fn of(x: &Chromosome, scn: &Scenario, task: &TaskSpec) -> Self {
        let t = scn.totals(task, x.rho(), x.shares());
        let residual = conservation_residual(x);
        let latency_excess = (t.latency_s - task.latency_bound_s()).max(0.0);
        let reliability_gap = (task.reliability_bound() - t.reliability).max(0.0);
        let negative: f64 = x.genes().iter().map(|&g| (-g).max(0.0)).sum();
        // NaN violations (from an infinite latency) count as maximal
        let violation = negative + residual + nan_to_cap(latency_excess) + reliability_gap;
        Assessment {
            energy_j: t.energy_j,
            latency_s: t.latency_s,
            reliability: t.reliability,
            violation,
            feasible: negative == 0.0
                && residual <= NORMALIZATION_TOL
                && t.latency_s <= task.latency_bound_s()
                && t.reliability >= task.reliability_bound(),
        }
    }

    /// `E + h * sum(E_j)` with both parts capped.
    pub fn penalized(&self, penalty_factor: f64) -> f64 {
        nan_to_cap(self.energy_j).min(PENALTY_CAP) + (penalty_factor * self.violation).min(PENALTY_CAP)
    }
}

fn nan_to_cap(v: f64) -> f64 {
    if v.is_nan() {
        PENALTY_CAP
    } else {
        v.min(PENALTY_CAP)
    }
}

/// Running record of the worst feasible energy: `max(prev, max feasible E)`.
pub fn update_worst(prev: f64, feasible_energies: impl IntoIterator<Item = f64>) -> f64 {
    feasible_energies.into_iter().fold(prev, f64::max)
}

/// Per-generation quantities shared by every fitness evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationContext {
    pub penalty_factor: f64,
    pub worst_feasible: f64,
    /// Minimum of `E + h * sum(E_j)` over this generation's infeasible individuals.
    pub min_infeasible_penalized: Option<f64>,
}

impl GenerationContext {
    /// Updates `Wor` from this generation's feasible individuals and collects
    /// the infeasible minimum.
    pub fn build(assessments: &[Assessment], generation: usize, prev_worst: f64, schedule: &PenaltySchedule) -> Self {
        let penalty_factor = schedule.factor(generation);
        let worst_feasible = update_worst(prev_worst, assessments.iter().filter(|a| a.feasible).map(|a| a.energy_j));
        let min_infeasible_penalized = assessments
            .iter()
            .filter(|a| !a.feasible)
            .map(|a| a.penalized(penalty_factor))
            .reduce(f64::min);
        GenerationContext {
            penalty_factor,
            worst_feasible,
            min_infeasible_penalized,
        }
    }
}

/// Fitness to minimise.
pub fn fitness(a: &Assessment, ctx: &GenerationContext) -> f64 {
    if a.feasible {
        return a.energy_j;
    }
    let penalized = a.penalized(ctx.penalty_factor);
    match ctx.min_infeasible_penalized {
        // written as an offset from Wor so the minimiser lands on it exactly
        Some(min) => ctx.worst_feasible + (penalized - min),
        None => penalized,
    }
}

/// Elitist 2-tournament selection. The `elite_count` fittest come first,
/// unchanged; each remaining slot goes to the fitter of two individuals
/// drawn uniformly at random.
pub fn select<R: Rng + ?Sized>(
    population: &[Chromosome],
    fitness: &[f64],
    elite_count: usize,
    rng: &mut R,
) -> Vec<Chromosome> {
    assert_eq!(population.len(), fitness.len());
    let n = population.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]));
    let elites = elite_count.min(n);
    let mut next: Vec<Chromosome> = order[..elites].iter().map(|&i| population[i].clone()).collect();
    while next.len() < n {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        let winner = if fitness[b] < fitness[a] { b } else { a };
        next.push(population[winner].clone());
    }
    next
}

/// Arithmetic crossover with a fixed mixing weight.
pub fn crossover_with(x1: &Chromosome, x2: &Chromosome, delta: f64) -> (Chromosome, Chromosome) {
    assert_eq!(x1.len(), x2.len());
    let (c1, c2) = x1
        .genes()
        .iter()
        .zip(x2.genes())
        .map(|(&a, &b)| (b + delta * (a - b), a + delta * (b - a)))
        .unzip();
    (Chromosome::new(c1), Chromosome::new(c2))
}

/// Arithmetic crossover, mixing weight uniform on the open interval `(0, 1)`.
pub fn crossover<R: Rng + ?Sized>(x1: &Chromosome, x2: &Chromosome, rng: &mut R) -> (Chromosome, Chromosome) {
    let delta = loop {
        let d: f64 = rng.random();
        if d > 0.0 {
            break d;
        }
    };
    crossover_with(x1, x2, delta)
}

/// One non-uniform mutation step. `toward_one` picks the direction; the
/// step is `(1 - q^e)` of the distance to that bound, with `e` shrinking to
/// zero as `generation` reaches `generations`.
pub fn mutate_gene(
    x: f64,
    q: f64,
    toward_one: bool,
    generation: usize,
    generations: usize,
    shape: f64,
    exponent: MutationExponent,
) -> f64 {
    let step = 1.0 - q.powf(exponent.exponent(generation, generations, shape));
    let moved = if toward_one { x + (1.0 - x) * step } else { x - x * step };
    clamp_gene(moved)
}

/// Non-uniform mutation; each gene is hit independently with `gene_prob`.
#[allow(clippy::too_many_arguments)]
pub fn mutate<R: Rng + ?Sized>(
    x: &Chromosome,
    gene_prob: f64,
    generation: usize,
    generations: usize,
    shape: f64,
    exponent: MutationExponent,
    rng: &mut R,
) -> Chromosome {
    let genes = x
        .genes()
        .iter()
        .map(|&g| {
            if rng.random::<f64>() < gene_prob {
                let q: f64 = rng.random();
                let toward_one = rng.random::<bool>();
                mutate_gene(g, q, toward_one, generation, generations, shape, exponent)
            } else {
                g
            }
        })
        .collect();
    Chromosome(genes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub population: Vec<Chromosome>,
    pub generation: usize,
    pub worst_feasible: f64,
    pub best_fitness: f64,
    pub best_solution: Option<Chromosome>,
}

/// One row of the convergence trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    /// Best fitness seen up to and including this generation.
    pub best_fitness: f64,
    pub feasible_count: usize,
    pub worst_feasible: f64,
    pub max_feasible_fitness: Option<f64>,
    pub min_infeasible_fitness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub allocation: Allocation,
    pub metrics: Metrics,
    /// Final best fitness in chromosome space.
    pub best_fitness: f64,
    pub trace: Vec<GenerationRecord>,
}

/// Minimum-energy allocation for `task` on `scn`.
pub fn solve(scn: &Scenario, task: &TaskSpec, cfg: &GaConfig) -> Result<Solution> {
    Lrga::new(scn, task, cfg)?.run(&[], false)
}

/// As [`solve`], also returning the per-generation trace.
pub fn solve_traced(scn: &Scenario, task: &TaskSpec, cfg: &GaConfig) -> Result<Solution> {
    Lrga::new(scn, task, cfg)?.run(&[], true)
}

/// As [`solve`], with `seeds` placed into the initial population. The result
/// is never worse than a feasible seed.
pub fn solve_seeded(scn: &Scenario, task: &TaskSpec, cfg: &GaConfig, seeds: &[Allocation]) -> Result<Solution> {
    Lrga::new(scn, task, cfg)?.run(seeds, false)
}

struct Lrga<'a> {
    scn: &'a Scenario,
    task: &'a TaskSpec,
    cfg: &'a GaConfig,
}

/// Best decoded allocation seen so far. Feasible beats infeasible; among
/// feasible the lower energy wins, among infeasible the smaller violation.
struct Incumbent {
    allocation: Allocation,
    metrics: Metrics,
    violation: f64,
}

impl Incumbent {
    fn beats(&self, other: &Incumbent) -> bool {
        match (self.metrics.feasible, other.metrics.feasible) {
            (true, false) => true,
            (false, true) => false,
            (true, true) => self.metrics.e_total_j < other.metrics.e_total_j,
            (false, false) => {
                self.violation < other.violation
                    || (self.violation == other.violation && self.metrics.e_total_j < other.metrics.e_total_j)
            }
        }
    }
}

impl<'a> Lrga<'a> {
    fn new(scn: &'a Scenario, task: &'a TaskSpec, cfg: &'a GaConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Lrga { scn, task, cfg })
    }

    fn incumbent(&self, allocation: Allocation) -> Incumbent {
        let metrics = self.scn.metrics(self.task, &allocation);
        let violation = nan_to_cap((metrics.t_total_s - self.task.latency_bound_s()).max(0.0))
            + (self.task.reliability_bound() - metrics.r_total).max(0.0)
            + (allocation.assigned_fraction() - 1.0).abs();
        Incumbent {
            allocation,
            metrics,
            violation,
        }
    }

    fn offer(&self, best: &mut Option<Incumbent>, candidate: Incumbent) {
        if best.as_ref().is_none_or(|b| candidate.beats(b)) {
            *best = Some(candidate);
        }
    }

    fn run(&self, seeds: &[Allocation], keep_trace: bool) -> Result<Solution> {
        let p = self.scn.p();
        let cfg = self.cfg;
        if p == 0 {
            let allocation = Allocation::local_only(0);
            let metrics = self.scn.metrics(self.task, &allocation);
            return Ok(Solution {
                best_fitness: metrics.e_total_j,
                allocation,
                metrics,
                trace: Vec::new(),
            });
        }
        for s in seeds {
            if s.lambda.len() != p {
                return Err(Error::DimensionMismatch {
                    what: "seed allocation",
                    expected: p,
                    got: s.lambda.len(),
                });
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        let genes = p + 1;
        let gene_prob = 1.0 / genes as f64;
        let mut population: Vec<Chromosome> = (0..cfg.pop_size).map(|_| Chromosome::random(genes, &mut rng)).collect();
        if cfg.repair {
            population.iter_mut().for_each(Chromosome::repair);
        }
        for (slot, seed) in population.iter_mut().zip(seeds) {
            *slot = Chromosome::from_allocation(seed);
        }

        let mut incumbent: Option<Incumbent> = None;
        for seed in seeds {
            self.offer(&mut incumbent, self.incumbent(seed.clone()));
        }

        let mut state = EvolutionState {
            population,
            generation: 0,
            worst_feasible: cfg.worst_init,
            best_fitness: f64::INFINITY,
            best_solution: None,
        };
        let mut trace = Vec::with_capacity(if keep_trace { cfg.generations } else { 0 });

        for g in 1..=cfg.generations {
            state.generation = g;
            let assessments: Vec<Assessment> = state
                .population
                .iter()
                .map(|x| Assessment::of(x, self.scn, self.task))
                .collect();
            let ctx = GenerationContext::build(&assessments, g, state.worst_feasible, &cfg.penalty);
            state.worst_feasible = ctx.worst_feasible;
            let scores: Vec<f64> = assessments.iter().map(|a| fitness(a, &ctx)).collect();

            let (gen_best, gen_best_fit) = scores
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, &f)| if f < acc.1 { (i, f) } else { acc });
            if gen_best_fit < state.best_fitness {
                state.best_fitness = gen_best_fit;
                state.best_solution = Some(state.population[gen_best].clone());
            }
            for x in &state.population {
                self.offer(&mut incumbent, self.incumbent(x.decode()));
            }

            if keep_trace {
                let feasible_scores = assessments.iter().zip(&scores).filter(|(a, _)| a.feasible).map(|(_, &f)| f);
                let infeasible_scores = assessments.iter().zip(&scores).filter(|(a, _)| !a.feasible).map(|(_, &f)| f);
                trace.push(GenerationRecord {
                    generation: g,
                    best_fitness: state.best_fitness,
                    feasible_count: assessments.iter().filter(|a| a.feasible).count(),
                    worst_feasible: state.worst_feasible,
                    max_feasible_fitness: feasible_scores.reduce(f64::max),
                    min_infeasible_fitness: infeasible_scores.reduce(f64::min),
                });
            }

            if g == cfg.generations {
                break;
            }
            state.population = self.next_generation(&state.population, &scores, g, gene_prob, &mut rng);
        }

        let best = incumbent.expect("population is never empty");
        Ok(Solution {
            allocation: best.allocation,
            metrics: best.metrics,
            best_fitness: state.best_fitness,
            trace,
        })
    }

    fn next_generation(
        &self,
        population: &[Chromosome],
        scores: &[f64],
        generation: usize,
        gene_prob: f64,
        rng: &mut ChaCha8Rng,
    ) -> Vec<Chromosome> {
        let cfg = self.cfg;
        let mut next = select(population, scores, cfg.elite_count, rng);
        let offspring = &mut next[cfg.elite_count..];
        offspring.shuffle(rng);
        for pair in offspring.chunks_exact_mut(2) {
            if rng.random::<f64>() < cfg.crossover_prob {
                let (a, b) = crossover(&pair[0], &pair[1], rng);
                pair[0] = a;
                pair[1] = b;
            }
        }
        for x in offspring.iter_mut() {
            if rng.random::<f64>() < cfg.mutation_prob {
                *x = mutate(
                    x,
                    gene_prob,
                    generation,
                    cfg.generations,
                    cfg.mutation_shape,
                    cfg.mutation_exponent,
                    rng,
                );
                if cfg.repair {
                    x.repair();
                }
            }
        }
        next
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ChannelModel, DroneNode, Position, PowerModel};

    fn scenario(fading: Vec<f64>) -> Scenario {
        let init = DroneNode::new(0, Position::ORIGIN, 0.5e9, 0.01).unwrap();
        let nodes = (0..fading.len())
            .map(|i| DroneNode::new(i + 1, Position::new(20.0 + 10.0 * i as f64, 0.0, 0.0), 0.6e9, 0.01).unwrap())
            .collect();
        let p = fading.len();
        Scenario::new(
            init,
            nodes,
            ChannelModel::default(),
            PowerModel::default(),
            fading,
            vec![0.01; p],
            None,
        )
        .unwrap()
    }

    fn relaxed_task() -> TaskSpec {
        TaskSpec::new(4e6, 237.5, 10.0, 0.5).unwrap()
    }

    #[test]
    fn feasible_chromosome_has_no_violation() {
        let scn = scenario(vec![1.0, 1.0]);
        let x = Chromosome::new(vec![0.2, 0.5, 0.5]);
        let rows = constraint_violations(&x, &scn, &relaxed_task()).unwrap();
        assert_eq!(rows.len(), 2 + 4);
        assert!(rows.iter().all(|&r| r == 0.0), "{rows:?}");
    }

    #[test]
    fn conservation_row() {
        let scn = scenario(vec![1.0, 1.0]);
        let task = relaxed_task();
        let x = Chromosome::new(vec![1.0, 0.0, 0.0]);
        let rows = constraint_violations(&x, &scn, &task).unwrap();
        assert!(rows[..4].iter().all(|&r| r == 0.0));

        let x = Chromosome::new(vec![0.0, 0.6, 0.5]);
        let rows = constraint_violations(&x, &scn, &task).unwrap();
        assert!((rows[3] - 0.1).abs() < 1e-15);

        assert!(constraint_violations(&Chromosome::new(vec![0.0, 1.0]), &scn, &task).is_err());
    }

    #[test]
    fn fitness_ordering_by_hand() {
        let feasible = Assessment {
            energy_j: 5.0,
            latency_s: 0.5,
            reliability: 0.99,
            violation: 0.0,
            feasible: true,
        };
        let mild = Assessment {
            energy_j: 3.0,
            violation: 0.01,
            feasible: false,
            ..feasible
        };
        let bad = Assessment {
            energy_j: 2.0,
            violation: 0.5,
            feasible: false,
            ..feasible
        };
        let all = [feasible, mild, bad];
        // g = 1, h = 2000, Wor = max(1e5, 5) = 1e5
        let ctx = GenerationContext::build(&all, 1, 1e5, &PenaltySchedule::default());
        assert_eq!(ctx.penalty_factor, 2000.0);
        assert_eq!(ctx.worst_feasible, 1e5);
        assert_eq!(ctx.min_infeasible_penalized, Some(3.0 + 20.0));
        let f: Vec<f64> = all.iter().map(|a| fitness(a, &ctx)).collect();
        assert_eq!(f[0], 5.0);
        assert_eq!(f[1], 1e5);
        assert_eq!(f[2], 1e5 + (2.0 + 1000.0) - 23.0);
        assert!(f[0] < f[1] && f[1] < f[2]);
    }

    #[test]
    fn all_feasible_generation_has_no_offset() {
        let a = Assessment {
            energy_j: 1.0,
            latency_s: 0.1,
            reliability: 1.0,
            violation: 0.0,
            feasible: true,
        };
        let ctx = GenerationContext::build(&[a], 3, 10.0, &PenaltySchedule::default());
        assert_eq!(ctx.min_infeasible_penalized, None);
        assert_eq!(fitness(&a, &ctx), 1.0);
    }

    #[test]
    fn worst_tracker() {
        assert_eq!(update_worst(1e5, []), 1e5);
        assert_eq!(update_worst(1e5, [12.0]), 1e5);
        let mut w = 1e5;
        for e in [5.0, 9.0, 7.0] {
            w = update_worst(w, [e]);
            assert_eq!(w, 1e5);
        }
        assert_eq!(update_worst(1.0, [5.0, 9.0, 7.0]), 9.0);
    }

    #[test]
    fn selection_keeps_identical_population() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pop = vec![Chromosome::new(vec![0.3, 0.7]); 6];
        let out = select(&pop, &[1.0; 6], 2, &mut rng);
        assert_eq!(out, pop);
    }

    #[test]
    fn selection_prefers_lower_fitness() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let good = Chromosome::new(vec![0.0]);
        let bad = Chromosome::new(vec![1.0]);
        let pop = vec![bad.clone(), good.clone()];
        for _ in 0..1000 {
            let out = select(&pop, &[2.0, 1.0], 1, &mut rng);
            assert_eq!(out.len(), 2);
            assert_eq!(out[0], good);
        }
        // any tournament that draws the fitter individual returns it
        let mut wins = 0;
        let mut entered = 0;
        for _ in 0..10_000 {
            let a = rng.random_range(0..2usize);
            let b = rng.random_range(0..2usize);
            if a == 1 || b == 1 {
                entered += 1;
                let f = [2.0, 1.0];
                let w = if f[b] < f[a] { b } else { a };
                wins += usize::from(w == 1);
            }
        }
        assert_eq!(wins, entered);
    }

    #[test]
    fn crossover_properties() {
        let x = Chromosome::new(vec![0.1, 0.4, 0.9]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (a, b) = crossover(&x, &x, &mut rng);
        assert_eq!(a, x);
        assert_eq!(b, x);

        let y = Chromosome::new(vec![0.5, 0.0, 0.3]);
        let (a, b) = crossover_with(&x, &y, 0.5);
        for (((&ai, &bi), &xi), &yi) in a.genes().iter().zip(b.genes()).zip(x.genes()).zip(y.genes()) {
            assert!((ai - 0.5 * (xi + yi)).abs() < 1e-15);
            assert!((bi - 0.5 * (xi + yi)).abs() < 1e-15);
        }
    }

    #[test]
    fn mutation_limits() {
        for &x in &[0.0, 0.3, 1.0] {
            for &q in &[0.0, 0.2, 0.9] {
                for dir in [true, false] {
                    assert_eq!(mutate_gene(x, q, dir, 300, 300, 3.0, MutationExponent::Product), x);
                }
            }
        }
        assert_eq!(mutate_gene(1.0, 0.3, true, 10, 300, 3.0, MutationExponent::Product), 1.0);
        assert_eq!(mutate_gene(0.0, 0.3, false, 10, 300, 3.0, MutationExponent::Product), 0.0);
        // q = 0 jumps straight to the bound
        assert_eq!(mutate_gene(0.4, 0.0, true, 0, 300, 3.0, MutationExponent::Product), 1.0);
        assert_eq!(mutate_gene(0.4, 0.0, false, 0, 300, 3.0, MutationExponent::Product), 0.0);
    }

    #[test]
    fn mutation_shrinks_over_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mean_step = |g: usize, rng: &mut ChaCha8Rng| {
            let n = 10_000;
            (0..n)
                .map(|_| {
                    let x: f64 = rng.random();
                    let m = mutate_gene(x, rng.random(), rng.random(), g, 300, 3.0, MutationExponent::Product);
                    (m - x).abs()
                })
                .sum::<f64>()
                / n as f64
        };
        let early = mean_step(0, &mut rng);
        let mid = mean_step(150, &mut rng);
        let late = mean_step(300, &mut rng);
        assert!(early > mid, "{early} vs {mid}");
        assert_eq!(late, 0.0);
    }

    #[test]
    fn exponent_readings() {
        assert_eq!(MutationExponent::Product.exponent(150, 300, 4.0), 2.0);
        assert_eq!(MutationExponent::Power.exponent(150, 300, 2.0), 0.25);
    }

    #[test]
    fn decode_normalizes_split() {
        let x = Chromosome::new(vec![0.3, 0.2, 0.6]);
        let a = x.decode();
        assert_eq!(a.rho, 0.3);
        assert!((a.lambda.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(Chromosome::from_allocation(&a).decode(), a);
        let z = Chromosome::new(vec![1.0, 0.0, 0.0]).decode();
        assert_eq!(z, Allocation::local_only(2));
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        let bad = GaConfig {
            pop_size: 1,
            ..GaConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = GaConfig {
            elite_count: 100,
            ..GaConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = GaConfig {
            mutation_shape: 6.0,
            ..GaConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn empty_swarm_runs_locally() {
        let init = DroneNode::new(0, Position::ORIGIN, 0.5e9, 0.01).unwrap();
        let scn = Scenario::new(
            init,
            vec![],
            ChannelModel::default(),
            PowerModel::default(),
            vec![],
            vec![],
            None,
        )
        .unwrap();
        let sol = solve(&scn, &relaxed_task(), &GaConfig::default()).unwrap();
        assert_eq!(sol.allocation, Allocation::local_only(0));
        assert!(sol.metrics.feasible);
    }

    #[test]
    fn dead_links_force_local_execution() {
        // a few bits per second on every link
        let scn = scenario(vec![1e-15, 1e-15]);
        let task = relaxed_task();
        let sol = solve(&scn, &task, &GaConfig::default()).unwrap();
        assert!(sol.allocation.rho > 0.999, "{:?}", sol.allocation);
    }

    #[test]
    fn seeded_solution_is_never_worse_than_seed() {
        let scn = scenario(vec![1.0, 0.8, 0.5]);
        let task = relaxed_task();
        let seed = Allocation::new(0.0, vec![0.2, 0.3, 0.5]);
        let seed_metrics = scn.metrics(&task, &seed);
        assert!(seed_metrics.feasible);
        let cfg = GaConfig {
            generations: 5,
            pop_size: 4,
            ..GaConfig::default()
        };
        let sol = solve_seeded(&scn, &task, &cfg, &[seed]).unwrap();
        assert!(sol.metrics.feasible);
        assert!(sol.metrics.e_total_j <= seed_metrics.e_total_j);
    }
}
