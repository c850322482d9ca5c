//! Prioritized planning: initial solutions and neighborhood repair.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::{AgentId, Instance};
use crate::pathfinder::{default_horizon, SearchFailure, SpaceTimeAStar};
use crate::plan::{compute_delay, Path, Plan};
use crate::reservation::ReservationTable;

/// Number of random priority orders tried before giving up on an initial solution.
pub const DEFAULT_RESTARTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepairFailure {
    pub agent: AgentId,
    pub reason: SearchFailure,
}

/// Prioritized planner holding reusable search buffers.
#[derive(Debug, Default)]
pub struct Planner {
    search: SpaceTimeAStar,
}

impl Planner {
    pub fn new() -> Self {
        Self::default()
    }

    /// Node expansions performed so far.
    pub fn expansions(&self) -> u64 {
        self.search.expansions
    }

    fn horizon(instance: &Instance, agent: AgentId, current_steps: usize, table: &ReservationTable) -> usize {
        let shortest = instance.shortest_distance(agent);
        let goal = instance.agent(agent).goal;
        let goal_free = table.last_vertex_time(goal).map_or(0, |t| t + 1);
        default_horizon(instance.map(), shortest, current_steps).max(goal_free + shortest)
    }

    /// Plans all agents in a random priority order, retrying with a fresh
    /// order up to `restarts` times.
    pub fn initial_solution<R: Rng + ?Sized>(
        &mut self,
        instance: &Instance,
        rng: &mut R,
        restarts: usize,
    ) -> Result<Plan> {
        let m = instance.num_agents();
        let mut order: Vec<AgentId> = (0..m).collect();
        for _ in 0..restarts.max(1) {
            order.shuffle(rng);
            let mut table = ReservationTable::new(instance.map());
            let mut paths: Vec<Option<Path>> = vec![None; m];
            let mut ok = true;
            for &a in &order {
                let shortest = instance.shortest_distance(a);
                let horizon = Self::horizon(instance, a, shortest, &table);
                match self.search.plan(instance, a, &table, horizon) {
                    Ok(p) => {
                        table.insert(&p);
                        paths[a] = Some(p);
                    }
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                let paths = paths.into_iter().map(|p| p.expect("all planned")).collect();
                return Plan::new(instance, paths);
            }
        }
        Err(Error::NoInitialSolution {
            attempts: restarts.max(1),
        })
    }

    /// Replans `neighborhood` in a random order against `table`, which must
    /// hold exactly the paths of all other agents.
    ///
    /// On success the new paths are returned and remain inserted in `table`.
    /// On failure `table` is restored to its input state. `current_steps`
    /// gives each member's current path length for the search horizon.
    pub fn repair<R: Rng + ?Sized>(
        &mut self,
        instance: &Instance,
        neighborhood: &[AgentId],
        table: &mut ReservationTable,
        current_steps: impl Fn(AgentId) -> usize,
        rng: &mut R,
    ) -> std::result::Result<Vec<Path>, RepairFailure> {
        let mut order = neighborhood.to_vec();
        order.shuffle(rng);
        let mut planned: Vec<Path> = Vec::with_capacity(order.len());
        for &a in &order {
            let horizon = Self::horizon(instance, a, current_steps(a), table);
            match self.search.plan(instance, a, table, horizon) {
                Ok(p) => {
                    table.insert(&p);
                    planned.push(p);
                }
                Err(reason) => {
                    for p in &planned {
                        table.remove(p);
                    }
                    return Err(RepairFailure { agent: a, reason });
                }
            }
        }
        Ok(planned)
    }
}

/// Convenience form of [`Planner::initial_solution`].
pub fn initial_solution<R: Rng + ?Sized>(instance: &Instance, rng: &mut R, restarts: usize) -> Result<Plan> {
    Planner::new().initial_solution(instance, rng, restarts)
}

/// Replans `neighborhood` against the fixed paths in `partial`. Members use
/// their shortest distance as the current length for the horizon.
pub fn repair<R: Rng + ?Sized>(
    instance: &Instance,
    neighborhood: &[AgentId],
    partial: &[Path],
    rng: &mut R,
) -> std::result::Result<Vec<Path>, RepairFailure> {
    let mut table = crate::reservation::build_reservations(instance.map(), partial);
    Planner::new().repair(
        instance,
        neighborhood,
        &mut table,
        |a| instance.shortest_distance(a),
        rng,
    )
}

/// Sum of delays of a set of paths.
pub fn sum_of_delays(instance: &Instance, paths: &[Path]) -> usize {
    paths
        .iter()
        .map(|p| compute_delay(p, instance.distances(p.agent)))
        .sum()
}
