//! Anytime LNS loops.
//!
//! All solvers share one destroy-repair-accept step: remove the
//! neighborhood's paths, replan them with prioritized planning, and keep the
//! result only if the neighborhood's sum of delays strictly decreases. They
//! differ in how the neighborhood is chosen:
//!
//! * `address_ts` / `address_eg`: top-K delay ranking with Thompson Sampling
//!   or ε-greedy seed selection, updated with binary success rewards.
//! * `lns_agent_only`: the tabu-greedy agent-based heuristic alone.
//! * `lns_adaptive`: roulette selection over random, agent-based and
//!   map-based heuristics.
//! * `lns_adaptive_plus_address`: the same roulette with the bandit heuristic
//!   as a fourth arm.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bandit::{BetaParams, SelectionWeights, DEFAULT_REACTION, DEFAULT_WEIGHT_FLOOR};
use crate::destroy::{
    address_destroy, agent_based_destroy, intersections, map_based_destroy, random_destroy, Neighborhood, PlanIndex,
    SeedBandit, TabuList,
};
use crate::error::{Error, Result};
use crate::grid::Cell;
use crate::instance::{AgentId, Instance};
use crate::plan::{compute_delay, Path, Plan};
use crate::planner::{Planner, DEFAULT_RESTARTS};
use crate::reservation::{build_reservations, ReservationTable};
use crate::trace::{auc, RunTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    AddressTs,
    AddressEg,
    LnsAdaptive,
    LnsAgentOnly,
    LnsAdaptivePlusAddress,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::AddressTs,
        Algorithm::AddressEg,
        Algorithm::LnsAdaptive,
        Algorithm::LnsAgentOnly,
        Algorithm::LnsAdaptivePlusAddress,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::AddressTs => "address_ts",
            Algorithm::AddressEg => "address_eg",
            Algorithm::LnsAdaptive => "lns_adaptive",
            Algorithm::LnsAgentOnly => "lns_agent_only",
            Algorithm::LnsAdaptivePlusAddress => "lns_adaptive_plus_address",
        }
    }

    /// Whether K (and the seed posteriors) influence the run.
    pub fn uses_k(self) -> bool {
        matches!(
            self,
            Algorithm::AddressTs | Algorithm::AddressEg | Algorithm::LnsAdaptivePlusAddress
        )
    }

    pub fn uses_epsilon(self) -> bool {
        self == Algorithm::AddressEg
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
        Algorithm::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            Error::InvalidInput(format!(
                "unknown algorithm {s:?}; expected one of {}",
                Algorithm::ALL.map(Algorithm::name).join(", ")
            ))
        })
    }
}

/// How elapsed time is measured against the budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ClockKind {
    /// Monotonic wall clock.
    #[default]
    Wall,
    /// Deterministic search effort: A* expansions plus one unit per agent per
    /// iteration, scaled by `work_unit_s`. Runs are exactly reproducible.
    Work,
}

impl FromStr for ClockKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wall" => Ok(ClockKind::Wall),
            "work" => Ok(ClockKind::Work),
            other => Err(Error::InvalidInput(format!(
                "unknown clock {other:?}; expected wall or work"
            ))),
        }
    }
}

/// Nominal seconds per work unit; one nominal second is close to one wall
/// second of single-core search on current desk hardware.
pub const DEFAULT_WORK_UNIT_S: f64 = 3e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub neighborhood_size: usize,
    pub k: usize,
    pub epsilon: f64,
    pub time_budget_s: f64,
    pub seed: u64,
    pub restarts: usize,
    pub clock: ClockKind,
    pub work_unit_s: f64,
    pub reaction: f64,
    pub weight_floor: f64,
    /// Keep a snapshot of the roulette weights after every iteration.
    pub record_weights: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::AddressTs,
            neighborhood_size: 8,
            k: 32,
            epsilon: 0.5,
            time_budget_s: 15.0,
            seed: 0,
            restarts: DEFAULT_RESTARTS,
            clock: ClockKind::Wall,
            work_unit_s: DEFAULT_WORK_UNIT_S,
            reaction: DEFAULT_REACTION,
            weight_floor: DEFAULT_WEIGHT_FLOOR,
            record_weights: false,
        }
    }
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm, time_budget_s: f64, seed: u64) -> Self {
        Self {
            algorithm,
            time_budget_s,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.neighborhood_size == 0 {
            return Err(Error::InvalidInput("neighborhood size must be positive".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidInput("K must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidInput("restarts must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::InvalidInput(format!(
                "epsilon must lie in [0, 1], got {}",
                self.epsilon
            )));
        }
        if !(self.time_budget_s >= 0.0 && self.time_budget_s.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "time budget must be a nonnegative number of seconds, got {}",
                self.time_budget_s
            )));
        }
        if !(self.work_unit_s > 0.0 && self.work_unit_s.is_finite()) {
            return Err(Error::InvalidInput("work unit must be positive".into()));
        }
        SelectionWeights::new(1, self.reaction, self.weight_floor)?;
        Ok(())
    }
}

/// Destroy heuristics available to the roulette.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Heuristic {
    Random,
    AgentBased,
    MapBased,
    Address,
}

impl Heuristic {
    pub fn name(self) -> &'static str {
        match self {
            Heuristic::Random => "random",
            Heuristic::AgentBased => "agent_based",
            Heuristic::MapBased => "map_based",
            Heuristic::Address => "address",
        }
    }
}

/// Roulette weights after one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSnapshot {
    pub iteration: u64,
    pub time_s: f64,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub iterations: u64,
    pub accepted: u64,
    pub failed_repairs: u64,
    pub initial_cost: usize,
    pub initial_time_s: f64,
    pub elapsed_s: f64,
    pub expansions: u64,
}

/// Outcome of one solver run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub algorithm: Algorithm,
    /// Last accepted plan, which is also the cheapest one.
    pub plan: Plan,
    pub trace: RunTrace,
    /// Seed posteriors (bandit-based algorithms only).
    pub posteriors: Option<BetaParams>,
    /// Roulette arms and final weights (roulette-based algorithms only).
    pub arms: Vec<Heuristic>,
    pub weights: Option<SelectionWeights>,
    pub weight_log: Vec<WeightSnapshot>,
    /// Times each heuristic was chosen, aligned with `arms`.
    pub arm_counts: Vec<u64>,
    pub stats: RunStats,
}

impl RunResult {
    /// Normalized final roulette weights keyed by heuristic.
    pub fn weight_shares(&self) -> Vec<(Heuristic, f64)> {
        match &self.weights {
            Some(w) => self.arms.iter().copied().zip(w.shares()).collect(),
            None => Vec::new(),
        }
    }
}

/// Summary record for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub initial_cost: usize,
    pub final_cost: usize,
    pub auc: f64,
    pub iterations: u64,
    pub success_rate: f64,
}

/// Final cost, AUC over `[first entry, max(budget, last entry)]`, iteration
/// count and fraction of accepted iterations.
pub fn snapshot_metrics(result: &RunResult, budget_s: f64) -> Result<Metrics> {
    let trace = &result.trace;
    let last = trace.last().ok_or_else(|| Error::InvalidInput("empty trace".into()))?;
    let horizon = budget_s.max(last.time_s);
    let iterations = result.stats.iterations;
    Ok(Metrics {
        initial_cost: trace.first().map_or(0, |e| e.cost),
        final_cost: last.cost,
        auc: auc(trace, horizon)?,
        iterations,
        success_rate: if iterations == 0 {
            0.0
        } else {
            result.stats.accepted as f64 / iterations as f64
        },
    })
}

enum Clock {
    Wall(Instant),
    Work { unit_s: f64 },
}

struct Outcome {
    improvement: usize,
}

impl Outcome {
    fn success(&self) -> bool {
        self.improvement > 0
    }
}

/// Mutable state of one run.
struct Search<'a> {
    instance: &'a Instance,
    config: &'a SolverConfig,
    rng: ChaCha8Rng,
    planner: Planner,
    clock: Clock,
    overhead_units: u64,
    plan: Plan,
    table: ReservationTable,
    index: PlanIndex,
    trace: RunTrace,
    stats: RunStats,
    old_paths: Vec<Path>,
    observer: Option<Observer<'a>>,
}

/// Sees the initial plan and every accepted plan, in order.
type Observer<'a> = &'a mut dyn FnMut(&Plan);

impl<'a> Search<'a> {
    fn start(instance: &'a Instance, config: &'a SolverConfig, observer: Option<Observer<'a>>) -> Result<Self> {
        config.validate()?;
        if instance.num_agents() == 0 {
            return Err(Error::InvalidInput("instance has no agents".into()));
        }
        let clock = match config.clock {
            ClockKind::Wall => Clock::Wall(Instant::now()),
            ClockKind::Work => Clock::Work {
                unit_s: config.work_unit_s,
            },
        };
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut planner = Planner::new();
        let plan = planner.initial_solution(instance, &mut rng, config.restarts)?;
        let table = build_reservations(instance.map(), plan.paths());
        let index = PlanIndex::new(instance.map(), &plan);
        let mut search = Self {
            instance,
            config,
            rng,
            planner,
            clock,
            overhead_units: instance.num_agents() as u64,
            plan,
            table,
            index,
            trace: RunTrace::new(),
            stats: RunStats::default(),
            old_paths: Vec::new(),
            observer,
        };
        let t0 = search.elapsed();
        search.stats.initial_cost = search.plan.cost();
        search.stats.initial_time_s = t0;
        search.trace.record(t0, search.plan.cost()).expect("first trace entry");
        if let Some(f) = search.observer.as_mut() {
            f(&search.plan);
        }
        Ok(search)
    }

    fn elapsed(&self) -> f64 {
        match self.clock {
            Clock::Wall(start) => start.elapsed().as_secs_f64(),
            Clock::Work { unit_s } => (self.planner.expansions() + self.overhead_units) as f64 * unit_s,
        }
    }

    fn budget_left(&self) -> bool {
        self.elapsed() < self.config.time_budget_s
    }

    fn neighborhood_size(&self) -> usize {
        self.config.neighborhood_size.min(self.instance.num_agents())
    }

    /// Destroys and repairs `neighborhood`, keeping the new paths on strict
    /// improvement.
    fn step(&mut self, neighborhood: &[AgentId]) -> Outcome {
        self.stats.iterations += 1;
        self.overhead_units += self.instance.num_agents() as u64;
        let old_cost: usize = neighborhood.iter().map(|&a| self.plan.delay(a)).sum();
        for &a in neighborhood {
            self.table.remove(self.plan.path(a));
        }
        let plan = &self.plan;
        let repaired = self.planner.repair(
            self.instance,
            neighborhood,
            &mut self.table,
            |a| plan.path(a).steps(),
            &mut self.rng,
        );
        let new_paths = match repaired {
            Ok(paths) => paths,
            Err(_) => {
                self.stats.failed_repairs += 1;
                for &a in neighborhood {
                    self.table.insert(self.plan.path(a));
                }
                return Outcome { improvement: 0 };
            }
        };
        let delays: Vec<usize> = new_paths
            .iter()
            .map(|p| compute_delay(p, self.instance.distances(p.agent)))
            .collect();
        let new_cost: usize = delays.iter().sum();
        if new_cost >= old_cost {
            for p in &new_paths {
                self.table.remove(p);
            }
            for &a in neighborhood {
                self.table.insert(self.plan.path(a));
            }
            return Outcome { improvement: 0 };
        }

        self.old_paths.clear();
        for (p, d) in new_paths.into_iter().zip(delays) {
            self.index.remove(self.plan.path(p.agent));
            self.index.insert(&p);
            let old = self.plan.replace(p, d);
            self.old_paths.push(old);
        }
        debug_assert_eq!(self.plan.cost(), self.plan.recomputed_cost(self.instance));
        self.stats.accepted += 1;
        let now = self.elapsed();
        let last_t = self.trace.last().map_or(0.0, |e| e.time_s);
        // the work clock always advances per iteration; wall clock resolution may not
        let t = if now > last_t { now } else { last_t.next_up() };
        self.trace
            .record(t, self.plan.cost())
            .expect("accepted costs strictly decrease");
        if let Some(f) = self.observer.as_mut() {
            f(&self.plan);
        }
        Outcome {
            improvement: old_cost - new_cost,
        }
    }

    fn finish(
        mut self,
        posteriors: Option<BetaParams>,
        arms: Vec<Heuristic>,
        weights: Option<SelectionWeights>,
        weight_log: Vec<WeightSnapshot>,
        arm_counts: Vec<u64>,
    ) -> RunResult {
        let end = self.elapsed();
        self.trace.close(end);
        self.stats.elapsed_s = end;
        self.stats.expansions = self.planner.expansions();
        RunResult {
            algorithm: self.config.algorithm,
            plan: self.plan,
            trace: self.trace,
            posteriors,
            arms,
            weights,
            weight_log,
            arm_counts,
            stats: self.stats,
        }
    }
}

fn seed_bandit(config: &SolverConfig) -> SeedBandit {
    match config.algorithm {
        Algorithm::AddressEg => SeedBandit::EpsGreedy {
            epsilon: config.epsilon,
        },
        _ => SeedBandit::Thompson,
    }
}

/// The bandit-driven single-heuristic loop (`address_ts` or `address_eg`).
pub fn run_address(instance: &Instance, config: &SolverConfig) -> Result<RunResult> {
    address_loop(instance, config, None)
}

fn address_loop<'a>(
    instance: &'a Instance,
    config: &'a SolverConfig,
    observer: Option<Observer<'a>>,
) -> Result<RunResult> {
    if !matches!(config.algorithm, Algorithm::AddressTs | Algorithm::AddressEg) {
        return Err(Error::InvalidInput(format!(
            "run_address cannot run {}",
            config.algorithm
        )));
    }
    let mut search = Search::start(instance, config, observer)?;
    let mut params = BetaParams::new(instance.num_agents());
    let bandit = seed_bandit(config);
    let n = search.neighborhood_size();
    while search.budget_left() {
        let (nb, seed) = address_destroy(
            instance,
            &search.plan,
            &search.index,
            config.k,
            &params,
            bandit,
            n,
            &mut search.rng,
        )?;
        let outcome = search.step(&nb.agents);
        params.update(seed, outcome.success());
    }
    Ok(search.finish(Some(params), Vec::new(), None, Vec::new(), Vec::new()))
}

/// The original LNS loops: agent-based only, or roulette over several
/// heuristics (optionally including the bandit heuristic).
pub fn run_lns_baseline(instance: &Instance, config: &SolverConfig) -> Result<RunResult> {
    baseline_loop(instance, config, None)
}

fn baseline_loop<'a>(
    instance: &'a Instance,
    config: &'a SolverConfig,
    observer: Option<Observer<'a>>,
) -> Result<RunResult> {
    let arms = match config.algorithm {
        Algorithm::LnsAgentOnly => vec![Heuristic::AgentBased],
        Algorithm::LnsAdaptive => vec![Heuristic::Random, Heuristic::AgentBased, Heuristic::MapBased],
        Algorithm::LnsAdaptivePlusAddress => vec![
            Heuristic::Random,
            Heuristic::AgentBased,
            Heuristic::MapBased,
            Heuristic::Address,
        ],
        other => return Err(Error::InvalidInput(format!("run_lns_baseline cannot run {other}"))),
    };
    let mut search = Search::start(instance, config, observer)?;
    let m = instance.num_agents();
    let n = search.neighborhood_size();
    let mut tabu = TabuList::new(m);
    let mut weights = SelectionWeights::new(arms.len(), config.reaction, config.weight_floor)?;
    let mut params = arms.contains(&Heuristic::Address).then(|| BetaParams::new(m));
    let junctions: Vec<Cell> = intersections(instance.map());
    let mut arm_counts = vec![0u64; arms.len()];
    let mut weight_log = Vec::new();
    let roulette = arms.len() > 1;

    while search.budget_left() {
        let arm = if roulette { weights.select(&mut search.rng) } else { 0 };
        arm_counts[arm] += 1;
        let mut seed = None;
        let nb: Neighborhood = match arms[arm] {
            Heuristic::Random => random_or_all(instance, n, &mut search.rng),
            Heuristic::AgentBased => {
                agent_based_destroy(instance, &search.plan, &search.index, &mut tabu, n, &mut search.rng)
            }
            Heuristic::MapBased => match map_based_destroy(instance, &search.index, &junctions, n, &mut search.rng) {
                Ok(out) => out.neighborhood,
                Err(_) => random_or_all(instance, n, &mut search.rng),
            },
            Heuristic::Address => {
                let p = params.as_ref().expect("posteriors exist for the bandit arm");
                let (nb, s) = address_destroy(
                    instance,
                    &search.plan,
                    &search.index,
                    config.k,
                    p,
                    SeedBandit::Thompson,
                    n,
                    &mut search.rng,
                )?;
                seed = Some(s);
                nb
            }
        };
        let outcome = search.step(&nb.agents);
        if let (Some(s), Some(p)) = (seed, params.as_mut()) {
            p.update(s, outcome.success());
        }
        if roulette {
            weights.update(arm, outcome.improvement as f64);
            if config.record_weights {
                weight_log.push(WeightSnapshot {
                    iteration: search.stats.iterations,
                    time_s: search.elapsed(),
                    weights: weights.weights().to_vec(),
                });
            }
        }
    }
    Ok(search.finish(params, arms, Some(weights), weight_log, arm_counts))
}

fn random_or_all<R: rand::Rng + ?Sized>(instance: &Instance, n: usize, rng: &mut R) -> Neighborhood {
    let m = instance.num_agents();
    if n >= m {
        return Neighborhood {
            agents: (0..m).collect(),
            seed: None,
            padded: 0,
        };
    }
    random_destroy(instance, n, rng).expect("n < m")
}

/// Runs the algorithm named in `config`.
pub fn solve(instance: &Instance, config: &SolverConfig) -> Result<RunResult> {
    dispatch(instance, config, None)
}

/// [`solve`], calling `observer` on the initial plan and on each accepted plan.
pub fn solve_observed(
    instance: &Instance,
    config: &SolverConfig,
    observer: &mut dyn FnMut(&Plan),
) -> Result<RunResult> {
    dispatch(instance, config, Some(observer))
}

fn dispatch<'a>(instance: &'a Instance, config: &'a SolverConfig, observer: Option<Observer<'a>>) -> Result<RunResult> {
    match config.algorithm {
        Algorithm::AddressTs | Algorithm::AddressEg => address_loop(instance, config, observer),
        _ => baseline_loop(instance, config, observer),
    }
}
