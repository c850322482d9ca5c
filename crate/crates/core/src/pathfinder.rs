//! Single-agent space-time A* against a reservation table.
//!
//! States are `(cell, t)`. The heuristic is the true distance to the goal,
//! tightened by the earliest time the goal is free for good; both terms are
//! consistent, so the first goal state popped is optimal. Once `t` passes the
//! table's time extent only static goal rests remain, and states at the same
//! cell become interchangeable, which keeps the search finite.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::grid::{Cell, Direction, GridMap, UNREACHABLE};
use crate::instance::{AgentId, Instance};
use crate::plan::Path;
use crate::reservation::ReservationTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SearchFailure {
    #[error("start cell is reserved at t=0")]
    StartBlocked,
    #[error("another agent rests on the goal cell")]
    GoalTaken,
    #[error("goal unreachable from start")]
    Unreachable,
    #[error("no conflict-free path within the horizon")]
    HorizonExhausted,
}

/// Search horizon used by the planners: the shortest distance plus the larger
/// of the map's half-perimeter and twice the agent's current path length.
pub fn default_horizon(map: &GridMap, shortest: usize, current_steps: usize) -> usize {
    shortest + (map.width() + map.height()).max(2 * current_steps)
}

#[derive(Debug, Clone, Copy)]
struct Node {
    cell: Cell,
    t: u32,
    parent: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct OpenEntry {
    f: u32,
    g: u32,
    seq: u32,
    node: u32,
}

impl Ord for OpenEntry {
    // BinaryHeap pops the maximum: lowest f, then highest g, then earliest push.
    fn cmp(&self, other: &Self) -> Ordering {
        (Reverse(self.f), self.g, Reverse(self.seq)).cmp(&(Reverse(other.f), other.g, Reverse(other.seq)))
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reusable search buffers plus an expansion counter.
#[derive(Debug, Default)]
pub struct SpaceTimeAStar {
    open: BinaryHeap<OpenEntry>,
    nodes: Vec<Node>,
    best_g: FxHashMap<u64, u32>,
    /// Total node expansions over the searcher's lifetime.
    pub expansions: u64,
}

impl SpaceTimeAStar {
    pub fn new() -> Self {
        Self::default()
    }

    /// Minimum-length path for `agent` that avoids every reservation in
    /// `table` and can rest at the goal forever once it arrives.
    pub fn plan(
        &mut self,
        instance: &Instance,
        agent: AgentId,
        table: &ReservationTable,
        horizon: usize,
    ) -> Result<Path, SearchFailure> {
        let map = instance.map();
        let a = instance.agent(agent);
        let dist = instance.distances(agent);
        if !dist.reachable(a.start) {
            return Err(SearchFailure::Unreachable);
        }
        if table.vertex_reserved(a.start, 0) {
            return Err(SearchFailure::StartBlocked);
        }
        if table.has_rest(a.goal) {
            return Err(SearchFailure::GoalTaken);
        }
        let earliest_finish = table.last_vertex_time(a.goal).map_or(0, |t| t + 1) as u32;
        let time_cap = table.time_extent().max(earliest_finish as usize) as u32;
        let horizon = horizon.min(u32::MAX as usize - 1) as u32;
        let h = |cell: Cell, t: u32| -> u32 { dist.get(cell).max(earliest_finish.saturating_sub(t)) };
        let key = |cell: Cell, t: u32| -> u64 { (cell.0 as u64) << 32 | t.min(time_cap) as u64 };

        self.open.clear();
        self.nodes.clear();
        self.best_g.clear();
        let mut seq = 0u32;

        self.nodes.push(Node {
            cell: a.start,
            t: 0,
            parent: u32::MAX,
        });
        self.best_g.insert(key(a.start, 0), 0);
        self.open.push(OpenEntry {
            f: h(a.start, 0),
            g: 0,
            seq,
            node: 0,
        });

        while let Some(entry) = self.open.pop() {
            let Node { cell, t, .. } = self.nodes[entry.node as usize];
            let k = key(cell, t);
            // stale entry, or a dominated duplicate beyond the time cap
            match self.best_g.get(&k) {
                Some(&g) if g < t => continue,
                Some(&g) if g == u32::MAX => continue,
                _ => {}
            }
            self.best_g.insert(k, u32::MAX);
            self.expansions += 1;

            if cell == a.goal && t >= earliest_finish {
                return Ok(self.reconstruct(agent, entry.node));
            }
            if t >= horizon {
                continue;
            }
            let nt = t + 1;
            let moves = Direction::ALL.into_iter().map(Some).chain(std::iter::once(None));
            for dir in moves {
                let next = match dir {
                    Some(d) => match map.step(cell, d) {
                        Some(n) if !table.move_reserved(cell, d, t as usize) => n,
                        _ => continue,
                    },
                    None => cell,
                };
                let dn = dist.get(next);
                if dn == UNREACHABLE || table.vertex_reserved(next, nt as usize) {
                    continue;
                }
                let f = nt + h(next, nt);
                if f > horizon {
                    // cannot finish within the horizon from here
                    continue;
                }
                let nk = key(next, nt);
                match self.best_g.get(&nk) {
                    Some(&g) if g <= nt || g == u32::MAX => continue,
                    _ => {}
                }
                self.best_g.insert(nk, nt);
                self.nodes.push(Node {
                    cell: next,
                    t: nt,
                    parent: entry.node,
                });
                seq += 1;
                self.open.push(OpenEntry {
                    f,
                    g: nt,
                    seq,
                    node: (self.nodes.len() - 1) as u32,
                });
            }
        }
        Err(SearchFailure::HorizonExhausted)
    }

    fn reconstruct(&self, agent: AgentId, mut node: u32) -> Path {
        let mut cells = Vec::with_capacity(self.nodes[node as usize].t as usize + 1);
        while node != u32::MAX {
            let n = self.nodes[node as usize];
            cells.push(n.cell);
            node = n.parent;
        }
        cells.reverse();
        Path::new(agent, cells)
    }
}

/// One-shot wrapper around [`SpaceTimeAStar::plan`].
pub fn plan_path(
    instance: &Instance,
    agent: AgentId,
    table: &ReservationTable,
    horizon: usize,
) -> Result<Path, SearchFailure> {
    SpaceTimeAStar::new().plan(instance, agent, table, horizon)
}
