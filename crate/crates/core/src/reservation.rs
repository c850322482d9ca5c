//! Space-time reservations derived from a set of paths.

use std::collections::BTreeMap;

use crate::grid::{Cell, Direction, GridMap};
use crate::plan::Path;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Slot {
    vertex: u16,
    /// `blocked_moves[d]` counts reserved moves that make leaving this cell in
    /// direction `d` at this time a swap.
    blocked_moves: [u16; 4],
}

/// Vertex, edge and goal-rest reservations of a multiset of paths.
///
/// Counts rather than flags are kept, so inserting and then removing a path
/// restores the previous table exactly even when reserved paths overlap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReservationTable {
    width: usize,
    slots: Vec<Vec<Slot>>,
    rests: Vec<Vec<usize>>,
    path_lengths: BTreeMap<usize, usize>,
    vertex_reservations: usize,
    edge_reservations: usize,
    rest_reservations: usize,
}

impl ReservationTable {
    pub fn new(map: &GridMap) -> Self {
        Self {
            width: map.width(),
            slots: vec![Vec::new(); map.num_cells()],
            rests: vec![Vec::new(); map.num_cells()],
            path_lengths: BTreeMap::new(),
            vertex_reservations: 0,
            edge_reservations: 0,
            rest_reservations: 0,
        }
    }

    pub fn insert(&mut self, path: &Path) {
        self.apply(path, true);
    }

    pub fn remove(&mut self, path: &Path) {
        self.apply(path, false);
    }

    fn apply(&mut self, path: &Path, add: bool) {
        let bump = |v: &mut u16| {
            if add {
                *v += 1;
            } else {
                debug_assert!(*v > 0, "removing a path that was never inserted");
                *v -= 1;
            }
        };
        let cells = &path.cells;
        for (t, &c) in cells.iter().enumerate() {
            let row = &mut self.slots[c.index()];
            if row.len() <= t {
                row.resize(t + 1, Slot::default());
            }
            bump(&mut row[t].vertex);
        }
        let mut moves = 0;
        for (t, w) in cells.windows(2).enumerate() {
            if w[0] == w[1] {
                continue;
            }
            // someone going w0 -> w1 forbids w1 -> w0 over the same step
            let dir = self.direction(w[1], w[0]);
            let row = &mut self.slots[w[1].index()];
            bump(&mut row[t].blocked_moves[dir.index()]);
            moves += 1;
        }
        let goal = path.last();
        let end = path.steps();
        let rests = &mut self.rests[goal.index()];
        let len = cells.len();
        if add {
            rests.push(end);
            *self.path_lengths.entry(len).or_insert(0) += 1;
            self.vertex_reservations += len;
            self.edge_reservations += moves;
            self.rest_reservations += 1;
        } else {
            if let Some(pos) = rests.iter().position(|&s| s == end) {
                rests.swap_remove(pos);
            }
            if let Some(n) = self.path_lengths.get_mut(&len) {
                *n -= 1;
                if *n == 0 {
                    self.path_lengths.remove(&len);
                }
            }
            self.vertex_reservations -= len;
            self.edge_reservations -= moves;
            self.rest_reservations -= 1;
        }
    }

    fn direction(&self, from: Cell, to: Cell) -> Direction {
        let (f, t) = (from.index(), to.index());
        if t + self.width == f {
            Direction::Up
        } else if t == f + 1 {
            Direction::Right
        } else if t == f + self.width {
            Direction::Down
        } else {
            debug_assert_eq!(t + 1, f, "cells are not adjacent");
            Direction::Left
        }
    }

    /// Whether `cell` is occupied at `t`, including agents resting at their goal.
    #[inline]
    pub fn vertex_reserved(&self, cell: Cell, t: usize) -> bool {
        let row = &self.slots[cell.index()];
        if row.get(t).is_some_and(|s| s.vertex > 0) {
            return true;
        }
        self.rests[cell.index()].iter().any(|&s| s <= t)
    }

    /// Whether moving out of `from` in `dir` between `t` and `t + 1` swaps with
    /// a reserved agent.
    #[inline]
    pub fn move_reserved(&self, from: Cell, dir: Direction, t: usize) -> bool {
        self.slots[from.index()]
            .get(t)
            .is_some_and(|s| s.blocked_moves[dir.index()] > 0)
    }

    /// Latest time at which `cell` holds a vertex reservation, ignoring rests.
    pub fn last_vertex_time(&self, cell: Cell) -> Option<usize> {
        self.slots[cell.index()].iter().rposition(|s| s.vertex > 0)
    }

    /// Whether some reserved path ends (and rests) at `cell`.
    pub fn has_rest(&self, cell: Cell) -> bool {
        !self.rests[cell.index()].is_empty()
    }

    /// One past the last time step covered by any reserved path. From this time
    /// on only goal rests remain.
    pub fn time_extent(&self) -> usize {
        self.path_lengths.keys().next_back().copied().unwrap_or(0)
    }

    pub fn num_paths(&self) -> usize {
        self.rest_reservations
    }

    pub fn vertex_reservations(&self) -> usize {
        self.vertex_reservations
    }

    pub fn edge_reservations(&self) -> usize {
        self.edge_reservations
    }

    pub fn rest_reservations(&self) -> usize {
        self.rest_reservations
    }

    pub fn is_empty(&self) -> bool {
        self.rest_reservations == 0
    }

    /// Whether `path` can be executed without touching any reservation,
    /// including resting at its goal forever afterwards.
    pub fn admits(&self, path: &Path) -> bool {
        let cells = &path.cells;
        for (t, &c) in cells.iter().enumerate() {
            if self.vertex_reserved(c, t) {
                return false;
            }
        }
        for (t, w) in cells.windows(2).enumerate() {
            if w[0] != w[1] && self.move_reserved(w[0], self.direction(w[0], w[1]), t) {
                return false;
            }
        }
        let goal = path.last();
        if self.has_rest(goal) {
            return false;
        }
        self.last_vertex_time(goal).is_none_or(|last| last < path.steps())
    }
}

/// Reservation table of `paths`.
pub fn build_reservations<'a>(map: &GridMap, paths: impl IntoIterator<Item = &'a Path>) -> ReservationTable {
    let mut table = ReservationTable::new(map);
    for p in paths {
        table.insert(p);
    }
    table
}
