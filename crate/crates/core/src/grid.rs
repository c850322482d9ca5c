//! Four-connected grid maps and single-goal distance tables.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};

/// A cell of a [`GridMap`], stored as its row-major linear index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct Cell(pub u32);

impl Cell {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Cardinal moves in the fixed expansion order used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Up,
    Right,
    Down,
    Left,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Up, Direction::Right, Direction::Down, Direction::Left];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn reverse(self) -> Direction {
        match self {
            Direction::Up => Direction::Down,
            Direction::Right => Direction::Left,
            Direction::Down => Direction::Up,
            Direction::Left => Direction::Right,
        }
    }

    #[inline]
    fn offset(self) -> (i64, i64) {
        match self {
            Direction::Up => (0, -1),
            Direction::Right => (1, 0),
            Direction::Down => (0, 1),
            Direction::Left => (-1, 0),
        }
    }
}

/// Undirected, unweighted, 4-connected grid with an obstacle mask.
///
/// Coordinates follow the benchmark convention: `x` is the column, `y` the
/// row, and `(0, 0)` is the top-left corner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    passable: Vec<bool>,
}

impl GridMap {
    pub fn new(width: usize, height: usize, passable: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(format!(
                "map dimensions must be positive, got {width}x{height}"
            )));
        }
        if passable.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "passable mask has {} cells, expected {}",
                passable.len(),
                width * height
            )));
        }
        if width * height > u32::MAX as usize {
            return Err(Error::InvalidInput("map too large".into()));
        }
        Ok(Self {
            width,
            height,
            passable,
        })
    }

    /// Obstacle-free map.
    pub fn open(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![true; width * height])
    }

    /// Builds a map from rows of `.` (free) and `@` (blocked) characters.
    /// Handy for tests and small hand-made examples.
    pub fn from_ascii(rows: &[&str]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut passable = Vec::with_capacity(width * height);
        for (y, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::InvalidInput(format!(
                    "row {y} has length {}, expected {width}",
                    row.len()
                )));
            }
            for ch in row.chars() {
                match ch {
                    '.' => passable.push(true),
                    '@' => passable.push(false),
                    other => return Err(Error::InvalidInput(format!("unexpected glyph {other:?} in row {y}"))),
                }
            }
        }
        Self::new(width, height, passable)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn num_cells(&self) -> usize {
        self.passable.len()
    }

    pub fn num_passable(&self) -> usize {
        self.passable.iter().filter(|&&p| p).count()
    }

    pub fn passable_mask(&self) -> &[bool] {
        &self.passable
    }

    /// The cell at column `x`, row `y`, if it lies within bounds.
    pub fn cell(&self, x: usize, y: usize) -> Option<Cell> {
        (x < self.width && y < self.height).then(|| Cell((y * self.width + x) as u32))
    }

    #[inline]
    pub fn xy(&self, cell: Cell) -> (usize, usize) {
        (cell.index() % self.width, cell.index() / self.width)
    }

    #[inline]
    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.index() < self.passable.len()
    }

    #[inline]
    pub fn is_passable(&self, cell: Cell) -> bool {
        self.passable.get(cell.index()).copied().unwrap_or(false)
    }

    /// The passable cell one step from `cell` in `dir`.
    #[inline]
    pub fn step(&self, cell: Cell, dir: Direction) -> Option<Cell> {
        let (x, y) = self.xy(cell);
        let (dx, dy) = dir.offset();
        let nx = x as i64 + dx;
        let ny = y as i64 + dy;
        if nx < 0 || ny < 0 || nx >= self.width as i64 || ny >= self.height as i64 {
            return None;
        }
        let next = Cell((ny as usize * self.width + nx as usize) as u32);
        self.is_passable(next).then_some(next)
    }

    /// Passable neighbours in up, right, down, left order.
    pub fn neighbors(&self, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
        Direction::ALL.into_iter().filter_map(move |d| self.step(cell, d))
    }

    pub fn degree(&self, cell: Cell) -> usize {
        self.neighbors(cell).count()
    }

    /// Direction of the single move `from -> to`, if the two cells are adjacent.
    pub fn direction_between(&self, from: Cell, to: Cell) -> Option<Direction> {
        Direction::ALL.into_iter().find(|&d| self.step(from, d) == Some(to))
    }

    #[inline]
    pub fn adjacent(&self, a: Cell, b: Cell) -> bool {
        self.direction_between(a, b).is_some()
    }

    pub fn passable_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.passable.len() as u32)
            .map(Cell)
            .filter(|c| self.is_passable(*c))
    }

    /// Number of undirected edges between passable cells.
    pub fn num_edges(&self) -> usize {
        self.passable_cells()
            .map(|c| {
                [Direction::Right, Direction::Down]
                    .into_iter()
                    .filter(|&d| self.step(c, d).is_some())
                    .count()
            })
            .sum()
    }

    pub(crate) fn check_cell(&self, cell: Cell, what: &str) -> Result<()> {
        if !self.in_bounds(cell) {
            return Err(Error::InvalidInput(format!("{what} {cell} is out of bounds")));
        }
        if !self.is_passable(cell) {
            let (x, y) = self.xy(cell);
            return Err(Error::InvalidInput(format!("{what} ({x}, {y}) is blocked")));
        }
        Ok(())
    }
}

/// Marker for cells that cannot reach the table's goal.
pub const UNREACHABLE: u32 = u32::MAX;

/// Shortest-path distances from every cell to one goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceTable {
    goal: Cell,
    dist: Vec<u32>,
}

impl DistanceTable {
    pub fn goal(&self) -> Cell {
        self.goal
    }

    /// Distance in steps, or [`UNREACHABLE`].
    #[inline]
    pub fn get(&self, cell: Cell) -> u32 {
        self.dist[cell.index()]
    }

    #[inline]
    pub fn reachable(&self, cell: Cell) -> bool {
        self.get(cell) != UNREACHABLE
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.dist
    }
}

/// Breadth-first distances to `goal` under 4-connectivity.
pub fn shortest_distance_table(map: &GridMap, goal: Cell) -> Result<DistanceTable> {
    map.check_cell(goal, "goal")?;
    let mut dist = vec![UNREACHABLE; map.num_cells()];
    let mut queue = VecDeque::new();
    dist[goal.index()] = 0;
    queue.push_back(goal);
    while let Some(cell) = queue.pop_front() {
        let d = dist[cell.index()] + 1;
        for next in map.neighbors(cell) {
            if dist[next.index()] == UNREACHABLE {
                dist[next.index()] = d;
                queue.push_back(next);
            }
        }
    }
    Ok(DistanceTable { goal, dist })
}
