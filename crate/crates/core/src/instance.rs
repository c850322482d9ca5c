//! Agents and problem instances.

use std::sync::{Arc, OnceLock};

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::grid::{shortest_distance_table, Cell, DistanceTable, GridMap};

pub type AgentId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Agent {
    pub id: AgentId,
    pub start: Cell,
    pub goal: Cell,
}

/// A map plus one start/goal pair per agent.
///
/// Distance tables are computed on first use per distinct goal and shared
/// between clones, so an instance can be handed to many concurrent runs.
#[derive(Debug, Clone)]
pub struct Instance {
    map: Arc<GridMap>,
    agents: Vec<Agent>,
    goal_slot: Vec<usize>,
    tables: Arc<Vec<OnceLock<DistanceTable>>>,
}

impl Instance {
    /// Validates endpoints (in bounds, passable, pairwise distinct starts and
    /// goals, goal reachable from start) and builds the instance. Agent ids are
    /// assigned in order.
    pub fn new(map: GridMap, endpoints: Vec<(Cell, Cell)>) -> Result<Self> {
        let components = label_components(&map);
        let mut starts = FxHashSet::default();
        let mut goals = FxHashSet::default();
        let mut agents = Vec::with_capacity(endpoints.len());
        for (id, (start, goal)) in endpoints.into_iter().enumerate() {
            map.check_cell(start, &format!("start of agent {id}"))?;
            map.check_cell(goal, &format!("goal of agent {id}"))?;
            if components[start.index()] != components[goal.index()] {
                return Err(Error::InvalidInput(format!(
                    "goal of agent {id} is unreachable from its start"
                )));
            }
            if !starts.insert(start) {
                return Err(Error::InvalidInput(format!(
                    "agent {id} shares its start cell with another agent"
                )));
            }
            if !goals.insert(goal) {
                return Err(Error::InvalidInput(format!(
                    "agent {id} shares its goal cell with another agent"
                )));
            }
            agents.push(Agent { id, start, goal });
        }

        let mut slots: FxHashMap<Cell, usize> = FxHashMap::default();
        let goal_slot = agents
            .iter()
            .map(|a| {
                let next = slots.len();
                *slots.entry(a.goal).or_insert(next)
            })
            .collect();
        let tables = (0..slots.len()).map(|_| OnceLock::new()).collect();
        Ok(Self {
            map: Arc::new(map),
            agents,
            goal_slot,
            tables: Arc::new(tables),
        })
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agent(&self, id: AgentId) -> &Agent {
        &self.agents[id]
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    /// Distance-to-goal table for `agent`, computed on first request.
    pub fn distances(&self, agent: AgentId) -> &DistanceTable {
        let goal = self.agents[agent].goal;
        self.tables[self.goal_slot[agent]]
            .get_or_init(|| shortest_distance_table(&self.map, goal).expect("goal validated at construction"))
    }

    /// Length of a shortest start-goal path for `agent`, ignoring other agents.
    pub fn shortest_distance(&self, agent: AgentId) -> usize {
        self.distances(agent).get(self.agents[agent].start) as usize
    }

    /// Sum of individual shortest distances, the flowtime lower bound.
    pub fn distance_lower_bound(&self) -> usize {
        (0..self.num_agents()).map(|a| self.shortest_distance(a)).sum()
    }

    /// A copy restricted to the first `m` agents.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        if m > self.agents.len() {
            return Err(Error::InvalidInput(format!(
                "requested {m} agents but the instance has {}",
                self.agents.len()
            )));
        }
        Self::new(
            (*self.map).clone(),
            self.agents[..m].iter().map(|a| (a.start, a.goal)).collect(),
        )
    }
}

fn label_components(map: &GridMap) -> Vec<u32> {
    let mut label = vec![u32::MAX; map.num_cells()];
    let mut next = 0;
    let mut stack = Vec::new();
    for cell in map.passable_cells() {
        if label[cell.index()] != u32::MAX {
            continue;
        }
        label[cell.index()] = next;
        stack.push(cell);
        while let Some(c) = stack.pop() {
            for n in map.neighbors(c) {
                if label[n.index()] == u32::MAX {
                    label[n.index()] = next;
                    stack.push(n);
                }
            }
        }
        next += 1;
    }
    label
}
