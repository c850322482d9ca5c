//! Paths, plans and the sum-of-delays cost.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, DistanceTable};
use crate::instance::{AgentId, Instance};

/// Cells occupied by one agent at time steps `0, 1, ..`; the agent rests at the
/// last cell afterwards.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Path {
    pub agent: AgentId,
    pub cells: Vec<Cell>,
}

impl Path {
    pub fn new(agent: AgentId, cells: Vec<Cell>) -> Self {
        Self { agent, cells }
    }

    /// Number of time steps after the start step (moves plus waits).
    #[inline]
    pub fn steps(&self) -> usize {
        self.cells.len().saturating_sub(1)
    }

    /// Position at time `t`, holding the final cell after the path ends.
    #[inline]
    pub fn at(&self, t: usize) -> Cell {
        self.cells[t.min(self.cells.len() - 1)]
    }

    pub fn first(&self) -> Cell {
        self.cells[0]
    }

    pub fn last(&self) -> Cell {
        self.cells[self.cells.len() - 1]
    }

    /// Checks endpoints and that each step is a wait or a map edge.
    pub fn check(&self, instance: &Instance) -> Result<()> {
        let invalid = |reason: String| Error::InvalidPath {
            agent: self.agent,
            reason,
        };
        if self.agent >= instance.num_agents() {
            return Err(invalid("unknown agent id".into()));
        }
        if self.cells.is_empty() {
            return Err(invalid("empty path".into()));
        }
        let map = instance.map();
        let agent = instance.agent(self.agent);
        for (t, &c) in self.cells.iter().enumerate() {
            if !map.in_bounds(c) {
                return Err(invalid(format!("cell {c} at t={t} is out of bounds")));
            }
            if !map.is_passable(c) {
                let (x, y) = map.xy(c);
                return Err(invalid(format!("cell ({x}, {y}) at t={t} is blocked")));
            }
        }
        if self.first() != agent.start {
            return Err(invalid("does not begin at the agent's start".into()));
        }
        if self.last() != agent.goal {
            return Err(invalid("does not end at the agent's goal".into()));
        }
        for (t, w) in self.cells.windows(2).enumerate() {
            if w[0] != w[1] && !map.adjacent(w[0], w[1]) {
                let (ax, ay) = map.xy(w[0]);
                let (bx, by) = map.xy(w[1]);
                return Err(invalid(format!(
                    "jump from ({ax}, {ay}) to ({bx}, {by}) between t={t} and t={}",
                    t + 1
                )));
            }
        }
        Ok(())
    }
}

/// Path length (in steps) minus the shortest start-goal distance.
///
/// `table` must be the distance table of the path's goal, and the path must be
/// valid, which makes the result nonnegative.
pub fn compute_delay(path: &Path, table: &DistanceTable) -> usize {
    let shortest = table.get(path.first()) as usize;
    debug_assert!(path.steps() >= shortest, "path shorter than shortest distance");
    path.steps().saturating_sub(shortest)
}

/// One path per agent with cached delays and total cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    paths: Vec<Path>,
    delays: Vec<usize>,
    cost: usize,
}

impl Plan {
    /// Validates each path structurally and caches delays. Conflicts between
    /// agents are not checked here; see [`crate::conflict::validate_plan`].
    pub fn new(instance: &Instance, paths: Vec<Path>) -> Result<Self> {
        if paths.len() != instance.num_agents() {
            return Err(Error::InvalidInput(format!(
                "plan has {} paths for {} agents",
                paths.len(),
                instance.num_agents()
            )));
        }
        for (i, p) in paths.iter().enumerate() {
            if p.agent != i {
                return Err(Error::InvalidInput(format!(
                    "path at position {i} belongs to agent {}",
                    p.agent
                )));
            }
            p.check(instance)?;
        }
        let delays: Vec<usize> = paths
            .iter()
            .map(|p| compute_delay(p, instance.distances(p.agent)))
            .collect();
        let cost = delays.iter().sum();
        Ok(Self { paths, delays, cost })
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn path(&self, agent: AgentId) -> &Path {
        &self.paths[agent]
    }

    pub fn delays(&self) -> &[usize] {
        &self.delays
    }

    pub fn delay(&self, agent: AgentId) -> usize {
        self.delays[agent]
    }

    /// Sum of delays.
    pub fn cost(&self) -> usize {
        self.cost
    }

    pub fn num_agents(&self) -> usize {
        self.paths.len()
    }

    /// Sum of path lengths in steps.
    pub fn flowtime(&self) -> usize {
        self.paths.iter().map(Path::steps).sum()
    }

    /// Swaps in a new path for its agent and returns the old one.
    pub(crate) fn replace(&mut self, path: Path, delay: usize) -> Path {
        let a = path.agent;
        self.cost = self.cost - self.delays[a] + delay;
        self.delays[a] = delay;
        std::mem::replace(&mut self.paths[a], path)
    }

    /// Recomputes the cost from scratch.
    pub fn recomputed_cost(&self, instance: &Instance) -> usize {
        self.paths
            .iter()
            .map(|p| compute_delay(p, instance.distances(p.agent)))
            .sum()
    }

    pub fn into_paths(self) -> Vec<Path> {
        self.paths
    }
}

/// Convenience for tests and FFI callers: cells from `(x, y)` pairs.
pub fn cells_from_xy(instance: &Instance, xy: &[(usize, usize)]) -> Result<Vec<Cell>> {
    xy.iter()
        .map(|&(x, y)| {
            instance
                .map()
                .cell(x, y)
                .ok_or_else(|| Error::InvalidInput(format!("({x}, {y}) is out of bounds")))
        })
        .collect()
}
