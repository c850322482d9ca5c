//! Vertex and edge conflict detection with wait-at-goal semantics.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::grid::Cell;
use crate::instance::{AgentId, Instance};
use crate::plan::{Path, Plan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConflictKind {
    /// Both agents occupy `cell` at `time`.
    Vertex { cell: Cell },
    /// One agent moves `from -> to` while the other moves `to -> from`,
    /// between `time` and `time + 1`.
    Edge { from: Cell, to: Cell },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Conflict {
    pub kind: ConflictKind,
    /// Ordered so that `agents.0 < agents.1`.
    pub agents: (AgentId, AgentId),
    pub time: usize,
}

/// All conflicts of a plan. An empty result means the plan is a solution.
pub fn validate_plan(instance: &Instance, plan: &Plan) -> Result<Vec<Conflict>> {
    validate_paths(instance, plan.paths())
}

/// Like [`validate_plan`] for an arbitrary set of paths (at most one per agent).
///
/// Agents that finished their path keep occupying their goal, so a later
/// visit by another agent is a vertex conflict at the goal cell. Structurally
/// invalid paths produce an error rather than a conflict.
pub fn validate_paths(instance: &Instance, paths: &[Path]) -> Result<Vec<Conflict>> {
    let mut seen = vec![false; instance.num_agents()];
    for p in paths {
        p.check(instance)?;
        if std::mem::replace(&mut seen[p.agent], true) {
            return Err(Error::InvalidInput(format!("agent {} has more than one path", p.agent)));
        }
    }
    let horizon = paths.iter().map(|p| p.cells.len()).max().unwrap_or(0);
    let mut conflicts = Vec::new();
    let mut at_cell: FxHashMap<Cell, Vec<AgentId>> = FxHashMap::default();
    let mut moves: FxHashMap<(Cell, Cell), AgentId> = FxHashMap::default();

    for t in 0..horizon {
        at_cell.clear();
        for p in paths {
            at_cell.entry(p.at(t)).or_default().push(p.agent);
        }
        for (&cell, agents) in &at_cell {
            for i in 0..agents.len() {
                for j in i + 1..agents.len() {
                    conflicts.push(Conflict {
                        kind: ConflictKind::Vertex { cell },
                        agents: ordered(agents[i], agents[j]),
                        time: t,
                    });
                }
            }
        }

        if t + 1 < horizon {
            moves.clear();
            for p in paths {
                let (from, to) = (p.at(t), p.at(t + 1));
                if from != to {
                    moves.insert((from, to), p.agent);
                }
            }
            for (&(from, to), &a) in &moves {
                if let Some(&b) = moves.get(&(to, from)) {
                    // report each swap once
                    if a < b {
                        conflicts.push(Conflict {
                            kind: ConflictKind::Edge { from, to },
                            agents: (a, b),
                            time: t,
                        });
                    }
                }
            }
        }
    }
    conflicts.sort_by_key(|c| (c.time, c.agents));
    Ok(conflicts)
}

fn ordered(a: AgentId, b: AgentId) -> (AgentId, AgentId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}
