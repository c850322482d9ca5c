//! Destroy heuristics: random, map-based, agent-based with tabu list, and the
//! delay-ranked bandit heuristic.
//!
//! Every heuristic returns exactly `min(N, m)` distinct agents. When a walk or
//! region under-fills the neighborhood, uniformly random agents are appended
//! and counted in [`Neighborhood::padded`].

use std::cmp::Reverse;
use std::collections::VecDeque;

use rand::seq::index::sample;
use rand::Rng;

use crate::bandit::{select_eps_greedy, select_thompson, BetaParams};
use crate::error::{Error, Result};
use crate::grid::{Cell, GridMap};
use crate::instance::{AgentId, Instance};
use crate::plan::{Path, Plan};

/// Restarts of the random walk before padding.
pub const WALK_RESTARTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighborhood {
    /// Distinct agents; the seed (if any) comes first and padding comes last.
    pub agents: Vec<AgentId>,
    pub seed: Option<AgentId>,
    /// Number of trailing agents added by uniform padding.
    pub padded: usize,
}

impl Neighborhood {
    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn contains(&self, agent: AgentId) -> bool {
        self.agents.contains(&agent)
    }

    /// Agents chosen by the heuristic itself, before padding.
    pub fn collected(&self) -> &[AgentId] {
        &self.agents[..self.agents.len() - self.padded]
    }
}

/// Which agent occupies each `(cell, time)` of a conflict-free plan, with
/// finished agents resting on their goals.
#[derive(Debug, Clone)]
pub struct PlanIndex {
    occupant: Vec<Vec<u32>>,
    /// `(agent + 1, first resting time)` per goal cell; 0 means none.
    rest: Vec<(u32, usize)>,
}

impl PlanIndex {
    pub fn new(map: &GridMap, plan: &Plan) -> Self {
        let mut index = Self {
            occupant: vec![Vec::new(); map.num_cells()],
            rest: vec![(0, 0); map.num_cells()],
        };
        for p in plan.paths() {
            index.insert(p);
        }
        index
    }

    pub fn insert(&mut self, path: &Path) {
        let tag = path.agent as u32 + 1;
        for (t, c) in path.cells.iter().enumerate() {
            let row = &mut self.occupant[c.index()];
            if row.len() <= t {
                row.resize(t + 1, 0);
            }
            row[t] = tag;
        }
        self.rest[path.last().index()] = (tag, path.steps());
    }

    pub fn remove(&mut self, path: &Path) {
        let tag = path.agent as u32 + 1;
        for (t, c) in path.cells.iter().enumerate() {
            let slot = &mut self.occupant[c.index()][t];
            if *slot == tag {
                *slot = 0;
            }
        }
        let rest = &mut self.rest[path.last().index()];
        if rest.0 == tag {
            *rest = (0, 0);
        }
    }

    /// Agent at `cell` at time `t`, if any.
    #[inline]
    pub fn occupant(&self, cell: Cell, t: usize) -> Option<AgentId> {
        match self.occupant[cell.index()].get(t) {
            Some(&tag) if tag != 0 => Some(tag as usize - 1),
            _ => {
                let (tag, from) = self.rest[cell.index()];
                (tag != 0 && from <= t).then(|| tag as usize - 1)
            }
        }
    }

    /// Agents that ever occupy `cell`, in order of first visit.
    pub fn visitors(&self, cell: Cell, out: &mut Vec<AgentId>) {
        out.clear();
        for &tag in &self.occupant[cell.index()] {
            if tag != 0 && !out.contains(&(tag as usize - 1)) {
                out.push(tag as usize - 1);
            }
        }
        let (tag, _) = self.rest[cell.index()];
        if tag != 0 && !out.contains(&(tag as usize - 1)) {
            out.push(tag as usize - 1);
        }
    }
}

/// Ordered agent set with O(1) membership.
struct AgentSet {
    members: Vec<AgentId>,
    mark: Vec<bool>,
}

impl AgentSet {
    fn new(m: usize) -> Self {
        Self {
            members: Vec::new(),
            mark: vec![false; m],
        }
    }

    fn insert(&mut self, a: AgentId) -> bool {
        if self.mark[a] {
            return false;
        }
        self.mark[a] = true;
        self.members.push(a);
        true
    }

    fn len(&self) -> usize {
        self.members.len()
    }

    /// Fills up to `target` with uniformly random non-members; returns how many were added.
    fn pad<R: Rng + ?Sized>(&mut self, target: usize, rng: &mut R) -> usize {
        let m = self.mark.len();
        let target = target.min(m);
        let mut added = 0;
        while self.len() < target {
            if self.insert(rng.random_range(0..m)) {
                added += 1;
            }
        }
        added
    }
}

/// `n` distinct agents drawn uniformly without replacement.
pub fn random_destroy<R: Rng + ?Sized>(instance: &Instance, n: usize, rng: &mut R) -> Result<Neighborhood> {
    let m = instance.num_agents();
    if n >= m {
        return Err(Error::InvalidInput(format!(
            "neighborhood size {n} must be smaller than the number of agents {m}"
        )));
    }
    Ok(Neighborhood {
        agents: sample(rng, m, n).into_vec(),
        seed: None,
        padded: 0,
    })
}

/// Map cells with more than two passable neighbours.
pub fn intersections(map: &GridMap) -> Vec<Cell> {
    map.passable_cells().filter(|&c| map.degree(c) > 2).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapBasedNeighborhood {
    pub neighborhood: Neighborhood,
    pub center: Cell,
    /// Cells whose visitors were considered, in breadth-first order.
    pub region: Vec<Cell>,
}

/// Agents moving around a random intersection.
///
/// Starting from a uniformly chosen cell of degree > 2, the region grows
/// breadth-first and the agents visiting each new cell are collected until
/// `n` are found. `intersections` must come from [`intersections`]; an empty
/// list means the heuristic is unavailable on this map.
pub fn map_based_destroy<R: Rng + ?Sized>(
    instance: &Instance,
    index: &PlanIndex,
    intersections: &[Cell],
    n: usize,
    rng: &mut R,
) -> Result<MapBasedNeighborhood> {
    if intersections.is_empty() {
        return Err(Error::InvalidInput("map has no vertex of degree > 2".into()));
    }
    let map = instance.map();
    let m = instance.num_agents();
    let target = n.min(m);
    let center = intersections[rng.random_range(0..intersections.len())];
    let mut set = AgentSet::new(m);
    let mut region = Vec::new();
    let mut closed = vec![false; map.num_cells()];
    let mut queue = VecDeque::new();
    let mut visitors = Vec::new();
    closed[center.index()] = true;
    queue.push_back(center);
    'grow: while let Some(cell) = queue.pop_front() {
        region.push(cell);
        index.visitors(cell, &mut visitors);
        for &a in &visitors {
            set.insert(a);
            if set.len() >= target {
                break 'grow;
            }
        }
        for next in map.neighbors(cell) {
            if !std::mem::replace(&mut closed[next.index()], true) {
                queue.push_back(next);
            }
        }
    }
    let padded = set.pad(target, rng);
    Ok(MapBasedNeighborhood {
        neighborhood: Neighborhood {
            agents: set.members,
            seed: None,
            padded,
        },
        center,
        region,
    })
}

/// Time-forward random walk from `seed`'s position at `start_t`.
///
/// Each step moves to a random neighbour (or waits) among cells from which
/// the seed could still reach its goal strictly before its current arrival
/// time; agents met on the way, by vertex or swap, join `set`.
fn random_walk<R: Rng + ?Sized>(
    instance: &Instance,
    plan: &Plan,
    index: &PlanIndex,
    seed: AgentId,
    start_t: usize,
    target: usize,
    set: &mut AgentSet,
    rng: &mut R,
) {
    let map = instance.map();
    let dist = instance.distances(seed);
    let path = plan.path(seed);
    let upper = path.steps();
    let mut loc = path.at(start_t);
    let mut options: Vec<Cell> = Vec::with_capacity(5);
    let mut t = start_t;
    while t < upper && set.len() < target {
        options.clear();
        options.extend(map.neighbors(loc));
        options.push(loc);
        let mut moved = false;
        while !options.is_empty() {
            let next = options.swap_remove(rng.random_range(0..options.len()));
            if t + 1 + (dist.get(next) as usize) < upper {
                if let Some(a) = index.occupant(next, t + 1) {
                    if a != seed {
                        set.insert(a);
                    }
                }
                if next != loc && set.len() < target {
                    if let Some(a) = index.occupant(next, t) {
                        if a != seed && index.occupant(loc, t + 1) == Some(a) {
                            set.insert(a);
                        }
                    }
                }
                loc = next;
                moved = true;
                break;
            }
        }
        if !moved {
            break;
        }
        t += 1;
    }
}

/// Neighborhood grown by random walks along `seed`'s path: up to
/// [`WALK_RESTARTS`] walks, each from a uniformly random time index, then
/// uniform padding to `min(n, m)`.
pub fn random_walk_neighborhood<R: Rng + ?Sized>(
    instance: &Instance,
    plan: &Plan,
    index: &PlanIndex,
    seed: AgentId,
    n: usize,
    rng: &mut R,
) -> Neighborhood {
    let m = instance.num_agents();
    let target = n.min(m);
    let mut set = AgentSet::new(m);
    set.insert(seed);
    let steps = plan.path(seed).steps();
    for _ in 0..WALK_RESTARTS {
        if set.len() >= target {
            break;
        }
        let start_t = rng.random_range(0..=steps);
        random_walk(instance, plan, index, seed, start_t, target, &mut set, rng);
    }
    let padded = set.pad(target, rng);
    Neighborhood {
        agents: set.members,
        seed: Some(seed),
        padded,
    }
}

/// Seeds already used by the agent-based heuristic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabuList {
    mark: Vec<bool>,
    count: usize,
}

impl TabuList {
    pub fn new(num_agents: usize) -> Self {
        Self {
            mark: vec![false; num_agents],
            count: 0,
        }
    }

    pub fn contains(&self, agent: AgentId) -> bool {
        self.mark[agent]
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn insert(&mut self, agent: AgentId) {
        if !std::mem::replace(&mut self.mark[agent], true) {
            self.count += 1;
        }
    }

    pub fn clear(&mut self) {
        self.mark.iter_mut().for_each(|m| *m = false);
        self.count = 0;
    }
}

/// Greedy seed choice of the agent-based heuristic: the most delayed agent
/// outside the tabu list, lowest id on ties. Updates the tabu list, which is
/// emptied when the seed has no delay or when every agent has been used.
pub fn select_tabu_seed(delays: &[usize], tabu: &mut TabuList) -> AgentId {
    let mut seed = None;
    for (a, &d) in delays.iter().enumerate() {
        if tabu.contains(a) {
            continue;
        }
        if seed.is_none_or(|(_, best)| d > best) {
            seed = Some((a, d));
        }
    }
    let (seed, delay) = seed.expect("tabu list never holds every agent");
    if delay == 0 {
        tabu.clear();
    } else {
        tabu.insert(seed);
        if tabu.len() == delays.len() {
            tabu.clear();
        }
    }
    seed
}

/// Agent-based heuristic: tabu-greedy seed plus random-walk neighborhood.
pub fn agent_based_destroy<R: Rng + ?Sized>(
    instance: &Instance,
    plan: &Plan,
    index: &PlanIndex,
    tabu: &mut TabuList,
    n: usize,
    rng: &mut R,
) -> Neighborhood {
    let seed = select_tabu_seed(plan.delays(), tabu);
    random_walk_neighborhood(instance, plan, index, seed, n, rng)
}

/// Bandit used to pick the seed among the top-K agents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeedBandit {
    Thompson,
    EpsGreedy { epsilon: f64 },
}

/// The `k` most delayed agents, sorted by delay descending then id ascending.
pub fn top_k(delays: &[usize], k: usize) -> Vec<AgentId> {
    let mut order: Vec<AgentId> = (0..delays.len()).collect();
    order.sort_unstable_by_key(|&a| (Reverse(delays[a]), a));
    order.truncate(k.min(delays.len()));
    order
}

/// Delay-ranked bandit heuristic: rank agents by delay, pick the seed among
/// the top `k` with the configured bandit, and grow a random-walk
/// neighborhood from it. Returns the neighborhood and the seed.
#[allow(clippy::too_many_arguments)]
pub fn address_destroy<R: Rng + ?Sized>(
    instance: &Instance,
    plan: &Plan,
    index: &PlanIndex,
    k: usize,
    params: &BetaParams,
    bandit: SeedBandit,
    n: usize,
    rng: &mut R,
) -> Result<(Neighborhood, AgentId)> {
    if k == 0 {
        return Err(Error::InvalidInput("K must be at least 1".into()));
    }
    if instance.num_agents() == 0 {
        return Err(Error::InvalidInput("instance has no agents".into()));
    }
    let candidates = top_k(plan.delays(), k);
    let seed = match bandit {
        SeedBandit::Thompson => select_thompson(params, &candidates, rng)?,
        SeedBandit::EpsGreedy { epsilon } => select_eps_greedy(params, &candidates, epsilon, rng)?,
    };
    Ok((random_walk_neighborhood(instance, plan, index, seed, n, rng), seed))
}
