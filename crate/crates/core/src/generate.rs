//! Seeded random maps and scenarios in the style of the `random-*` benchmark
//! family, for environments without the published files.

use std::fs;
use std::path::{Path as FsPath, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{shortest_distance_table, Cell, GridMap};
use crate::io::{map_to_text, scenario_to_text, select_agents, ScenarioEntry};
use crate::planner::Planner;

fn connected(width: usize, height: usize, passable: &[bool]) -> bool {
    let Some(start) = passable.iter().position(|&p| p) else {
        return false;
    };
    let total = passable.iter().filter(|&&p| p).count();
    let mut seen = vec![false; passable.len()];
    let mut stack = vec![start];
    seen[start] = true;
    let mut count = 1;
    while let Some(i) = stack.pop() {
        let (x, y) = (i % width, i / width);
        let mut visit = |j: usize| {
            if passable[j] && !seen[j] {
                seen[j] = true;
                count += 1;
                stack.push(j);
            }
        };
        if x > 0 {
            visit(i - 1);
        }
        if x + 1 < width {
            visit(i + 1);
        }
        if y > 0 {
            visit(i - width);
        }
        if y + 1 < height {
            visit(i + width);
        }
    }
    count == total
}

/// A `width`×`height` map with `round(obstacle_fraction · cells)` obstacles
/// placed uniformly at random, skipping placements that would disconnect the
/// free space. The result is always a single connected component.
pub fn random_map(width: usize, height: usize, obstacle_fraction: f64, seed: u64) -> Result<GridMap> {
    if !(0.0..1.0).contains(&obstacle_fraction) {
        return Err(Error::InvalidInput(format!(
            "obstacle fraction must lie in [0, 1), got {obstacle_fraction}"
        )));
    }
    let cells = width * height;
    if cells == 0 {
        return Err(Error::InvalidInput("map must have at least one cell".into()));
    }
    let target = (obstacle_fraction * cells as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..cells).collect();
    order.shuffle(&mut rng);
    let mut passable = vec![true; cells];
    let mut placed = 0;
    for i in order {
        if placed == target {
            break;
        }
        passable[i] = false;
        if connected(width, height, &passable) {
            placed += 1;
        } else {
            passable[i] = true;
        }
    }
    if placed < target {
        return Err(Error::InvalidInput(format!(
            "could only place {placed} of {target} obstacles without disconnecting the map"
        )));
    }
    GridMap::new(width, height, passable)
}

/// `rows` scenario rows on a connected map with pairwise distinct starts and
/// pairwise distinct goals. The distance column holds the 4-connected
/// shortest distance and the bucket is `distance / 4`.
pub fn random_scenario(map: &GridMap, map_name: &str, rows: usize, seed: u64) -> Result<Vec<ScenarioEntry>> {
    let cells: Vec<Cell> = map.passable_cells().collect();
    if rows > cells.len() {
        return Err(Error::InvalidInput(format!(
            "{rows} rows need distinct endpoints but the map has {} free cells",
            cells.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = cells.clone();
    starts.shuffle(&mut rng);
    let mut goals = cells;
    goals.shuffle(&mut rng);
    let mut entries = Vec::with_capacity(rows);
    for (&s, &g) in starts.iter().zip(&goals).take(rows) {
        let d = shortest_distance_table(map, g)?.get(s);
        if d == crate::grid::UNREACHABLE {
            return Err(Error::InvalidInput("map is not connected".into()));
        }
        entries.push(ScenarioEntry {
            bucket: d / 4,
            map_name: map_name.to_string(),
            map_width: map.width(),
            map_height: map.height(),
            start: map.xy(s),
            goal: map.xy(g),
            reference_distance: f64::from(d),
        });
    }
    Ok(entries)
}

/// Files written by [`write_benchmark`].
#[derive(Debug, Clone)]
pub struct BenchmarkFiles {
    pub map: PathBuf,
    pub scenarios: Vec<PathBuf>,
}

/// Parameters of a synthetic benchmark set.
#[derive(Debug, Clone)]
pub struct BenchmarkSpec {
    pub name: String,
    pub width: usize,
    pub height: usize,
    pub obstacle_fraction: f64,
    pub scenarios: usize,
    pub rows: usize,
    pub seed: u64,
    /// Reject scenarios whose first `agents` rows are solved by single-order
    /// prioritized planning for fewer than `min_successes` of `orders`
    /// seeded priority orders.
    pub solvable: Option<SolvabilityCheck>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolvabilityCheck {
    pub agents: usize,
    pub orders: usize,
    pub min_successes: usize,
}

/// Maximum scenario draws per file before giving up.
const MAX_SCENARIO_DRAWS: usize = 200;

/// Whether single-order prioritized planning solves the first `agents` rows
/// under at least `min_successes` of `orders` seeded priority orders. Stops
/// as soon as the answer is decided.
pub fn pp_solvable(map: &GridMap, entries: &[ScenarioEntry], check: SolvabilityCheck, seed: u64) -> Result<bool> {
    let instance = select_agents(entries, map, check.agents, None)?;
    let mut planner = Planner::new();
    let (mut ok, mut failed) = (0, 0);
    for k in 0..check.orders as u64 {
        if ok >= check.min_successes {
            break;
        }
        if check.orders - failed < check.min_successes {
            break;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k));
        match planner.initial_solution(&instance, &mut rng, 1) {
            Ok(_) => ok += 1,
            Err(_) => failed += 1,
        }
    }
    Ok(ok >= check.min_successes)
}

impl BenchmarkSpec {
    /// A 32×32 map with 20% obstacles and 25 scenarios of 400 rows.
    pub fn random_32_32_20() -> Self {
        Self {
            name: "random-32-32-20".into(),
            width: 32,
            height: 32,
            obstacle_fraction: 0.2,
            scenarios: 25,
            rows: 400,
            seed: 2022,
            solvable: Some(SolvabilityCheck {
                agents: 150,
                orders: 20,
                min_successes: 8,
            }),
        }
    }
}

/// Writes `<name>.map` and `<name>-random-<i>.scen` (i = 1..=scenarios)
/// into `dir`, creating it if needed.
pub fn write_benchmark(dir: impl AsRef<FsPath>, spec: &BenchmarkSpec) -> Result<BenchmarkFiles> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let map = random_map(spec.width, spec.height, spec.obstacle_fraction, spec.seed)?;
    let map_file = format!("{}.map", spec.name);
    let map_path = dir.join(&map_file);
    fs::write(&map_path, map_to_text(&map)).map_err(|e| Error::io(&map_path, e))?;
    let mut scenarios = Vec::with_capacity(spec.scenarios);
    let mut seeder = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5ce4_a810);
    for i in 1..=spec.scenarios {
        let mut draws = 0;
        let entries = loop {
            draws += 1;
            let entries = random_scenario(&map, &map_file, spec.rows, seeder.random())?;
            let ok = match spec.solvable {
                Some(check) => pp_solvable(&map, &entries, check, seeder.random())?,
                None => true,
            };
            if ok {
                break entries;
            }
            if draws == MAX_SCENARIO_DRAWS {
                return Err(Error::InvalidInput(format!(
                    "no solvable scenario {i} after {draws} draws"
                )));
            }
        };
        let path = dir.join(format!("{}-random-{i}.scen", spec.name));
        fs::write(&path, scenario_to_text(&entries)).map_err(|e| Error::io(&path, e))?;
        scenarios.push(path);
    }
    Ok(BenchmarkFiles {
        map: map_path,
        scenarios,
    })
}
