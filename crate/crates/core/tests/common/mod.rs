//! Independent reference implementations used as test oracles. Nothing here
//! calls the library's search, conflict or distance code; only the map and
//! instance accessors are shared.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

use anytime_mapf::grid::{Cell, GridMap};
use anytime_mapf::instance::Instance;
use anytime_mapf::plan::Path;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn xy(map: &GridMap, c: Cell) -> (i64, i64) {
    let i = c.0 as usize;
    ((i % map.width()) as i64, (i / map.width()) as i64)
}

/// 4-neighbours by coordinate arithmetic.
pub fn moves(map: &GridMap, c: Cell) -> Vec<Cell> {
    let (x, y) = xy(map, c);
    let mut out = Vec::with_capacity(4);
    for (dx, dy) in [(0, -1), (1, 0), (0, 1), (-1, 0)] {
        let (nx, ny) = (x + dx, y + dy);
        if nx < 0 || ny < 0 || nx >= map.width() as i64 || ny >= map.height() as i64 {
            continue;
        }
        let n = Cell((ny as usize * map.width() + nx as usize) as u32);
        if map.is_passable(n) {
            out.push(n);
        }
    }
    out
}

/// Plain BFS distance, `None` if unreachable.
pub fn bfs_distance(map: &GridMap, from: Cell, to: Cell) -> Option<usize> {
    let mut dist: HashMap<Cell, usize> = HashMap::new();
    let mut q = VecDeque::new();
    dist.insert(from, 0);
    q.push_back(from);
    while let Some(c) = q.pop_front() {
        if c == to {
            return Some(dist[&c]);
        }
        let d = dist[&c];
        for n in moves(map, c) {
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(n) {
                e.insert(d + 1);
                q.push_back(n);
            }
        }
    }
    None
}

fn pos(p: &Path, t: usize) -> Cell {
    p.cells[t.min(p.cells.len() - 1)]
}

/// All-pairs, all-times conflict check with wait-at-goal semantics. Returns
/// the number of (pair, time) conflicts plus structural violations.
pub fn brute_force_violations(instance: &Instance, paths: &[Path]) -> usize {
    let map = instance.map();
    let mut bad = 0;
    if paths.len() != instance.num_agents() {
        return 1;
    }
    for (i, p) in paths.iter().enumerate() {
        let a = instance.agent(i);
        if p.cells.is_empty() || p.cells[0] != a.start || *p.cells.last().unwrap() != a.goal {
            bad += 1;
            continue;
        }
        for w in p.cells.windows(2) {
            let ok = map.is_passable(w[1]) && (w[0] == w[1] || moves(map, w[0]).contains(&w[1]));
            if !ok {
                bad += 1;
            }
        }
        if !map.is_passable(p.cells[0]) {
            bad += 1;
        }
    }
    let horizon = paths.iter().map(|p| p.cells.len()).max().unwrap_or(0) + 1;
    for i in 0..paths.len() {
        for j in i + 1..paths.len() {
            for t in 0..horizon {
                if pos(&paths[i], t) == pos(&paths[j], t) {
                    bad += 1;
                }
                if pos(&paths[i], t) == pos(&paths[j], t + 1)
                    && pos(&paths[i], t + 1) == pos(&paths[j], t)
                    && pos(&paths[i], t) != pos(&paths[i], t + 1)
                {
                    bad += 1;
                }
            }
        }
    }
    bad
}

/// Sum over agents of (path steps − BFS distance).
pub fn oracle_sum_of_delays(instance: &Instance, paths: &[Path]) -> usize {
    paths
        .iter()
        .map(|p| {
            let a = instance.agent(p.agent);
            let d = bfs_distance(instance.map(), a.start, a.goal).unwrap();
            p.cells.len() - 1 - d
        })
        .sum()
}

/// Fewest steps for `agent` to reach its goal and stay there forever while
/// avoiding `obstacles` (vertex and swap conflicts, obstacles resting at
/// their goals after their paths end). Complete: searches up to the last
/// obstacle time plus the number of cells.
pub fn spacetime_bfs(instance: &Instance, agent: usize, obstacles: &[Path]) -> Option<usize> {
    let map = instance.map();
    let a = instance.agent(agent);
    let t_static = obstacles.iter().map(|p| p.cells.len()).max().unwrap_or(0);
    let horizon = t_static + map.num_cells() + 1;
    let occupied = |c: Cell, t: usize| obstacles.iter().any(|p| pos(p, t) == c);
    let swapped = |from: Cell, to: Cell, t: usize| obstacles.iter().any(|p| pos(p, t) == to && pos(p, t + 1) == from);
    let goal_free_from = |t: usize| {
        obstacles
            .iter()
            .all(|p| (t..=t.max(p.cells.len())).all(|tau| pos(p, tau) != a.goal))
    };
    if occupied(a.start, 0) {
        return None;
    }
    let mut seen: HashSet<(Cell, usize)> = HashSet::new();
    let mut q = VecDeque::new();
    q.push_back((a.start, 0usize));
    seen.insert((a.start, 0));
    while let Some((c, t)) = q.pop_front() {
        if c == a.goal && goal_free_from(t) {
            return Some(t);
        }
        if t >= horizon {
            continue;
        }
        let mut next = moves(map, c);
        next.push(c);
        for n in next {
            if occupied(n, t + 1) || (n != c && swapped(c, n, t)) {
                continue;
            }
            if seen.insert((n, t + 1)) {
                q.push_back((n, t + 1));
            }
        }
    }
    None
}

/// Minimum sum of delays over all conflict-free plans, by operator-decomposed
/// A* over joint states. Each agent, in turn, waits, moves, or (when on its
/// goal) commits to staying there forever; every non-committed agent pays one
/// unit per timestep. `None` if the search exceeds `max_expansions`.
pub fn optimal_sum_of_delays(instance: &Instance, max_expansions: usize) -> Option<usize> {
    let map = instance.map();
    let m = instance.num_agents();
    let goals: Vec<Cell> = instance.agents().iter().map(|a| a.goal).collect();
    let dist: Vec<HashMap<Cell, usize>> = goals
        .iter()
        .map(|&g| {
            map.passable_cells()
                .filter_map(|c| bfs_distance(map, c, g).map(|d| (c, d)))
                .collect()
        })
        .collect();
    let lower: usize = instance
        .agents()
        .iter()
        .enumerate()
        .map(|(i, a)| dist[i][&a.start])
        .sum();

    #[derive(Clone, PartialEq, Eq, Hash)]
    struct State {
        next: usize,
        pos: Vec<Cell>,
        prev: Vec<Cell>,
        done: Vec<bool>,
    }
    let h = |s: &State| -> usize { (0..m).filter(|&i| !s.done[i]).map(|i| dist[i][&s.pos[i]]).sum() };
    let start = State {
        next: 0,
        pos: instance.agents().iter().map(|a| a.start).collect(),
        prev: instance.agents().iter().map(|a| a.start).collect(),
        done: vec![false; m],
    };
    let mut best: HashMap<State, usize> = HashMap::new();
    let mut heap = BinaryHeap::new();
    let mut states: Vec<State> = Vec::new();
    best.insert(start.clone(), 0);
    heap.push(Reverse((h(&start), 0usize, 0usize)));
    states.push(start);
    let mut expansions = 0;
    while let Some(Reverse((_, g, id))) = heap.pop() {
        let s = states[id].clone();
        if best.get(&s).is_some_and(|&b| b < g) {
            continue;
        }
        if s.done.iter().all(|&d| d) {
            return Some(g - lower);
        }
        expansions += 1;
        if expansions > max_expansions {
            return None;
        }
        // skip committed agents; a full round starts a new timestep
        let mut i = s.next;
        let mut base = s.clone();
        loop {
            if i == m {
                i = 0;
                base.prev = base.pos.clone();
            }
            if !base.done[i] {
                break;
            }
            i += 1;
        }
        base.next = i;
        let assigned = |j: usize| -> bool {
            // j already acted in this timestep
            j < i
        };
        let c = base.pos[i];
        let mut options: Vec<(Cell, bool)> = moves(map, c).into_iter().map(|n| (n, false)).collect();
        options.push((c, false));
        if c == goals[i] {
            options.push((c, true));
        }
        for (n, commit) in options {
            let clash = (0..m).any(|j| {
                if j == i {
                    return false;
                }
                if base.done[j] || assigned(j) {
                    if base.pos[j] == n {
                        return true;
                    }
                    if assigned(j) && !base.done[j] && n != c && base.prev[j] == n && base.pos[j] == c {
                        return true;
                    }
                }
                false
            });
            // a committed agent must never be entered later; also forbid
            // committing where an unassigned agent still stands
            if clash {
                continue;
            }
            if commit && (0..m).any(|j| j != i && !base.done[j] && !assigned(j) && base.pos[j] == n) {
                continue;
            }
            let mut ns = base.clone();
            ns.prev[i] = c;
            ns.pos[i] = n;
            ns.next = i + 1;
            let cost = if commit {
                ns.done[i] = true;
                g
            } else {
                g + 1
            };
            if best.get(&ns).is_none_or(|&b| cost < b) {
                best.insert(ns.clone(), cost);
                let f = cost + h(&ns);
                states.push(ns);
                heap.push(Reverse((f, cost, states.len() - 1)));
            }
        }
    }
    None
}

/// Random map with the given obstacle probability whose free cells form one
/// component (retries until one is found).
pub fn random_connected_map(width: usize, height: usize, p_obstacle: f64, rng: &mut ChaCha8Rng) -> GridMap {
    loop {
        let passable: Vec<bool> = (0..width * height).map(|_| !rng.random_bool(p_obstacle)).collect();
        let Ok(map) = GridMap::new(width, height, passable) else {
            continue;
        };
        let cells: Vec<Cell> = map.passable_cells().collect();
        if cells.len() < 4 {
            continue;
        }
        let first = cells[0];
        if cells.iter().all(|&c| bfs_distance(&map, first, c).is_some()) {
            return map;
        }
    }
}

/// `m` agents with distinct starts and distinct goals on a connected map.
pub fn random_instance(map: &GridMap, m: usize, rng: &mut ChaCha8Rng) -> Instance {
    use rand::seq::SliceRandom;
    let mut cells: Vec<Cell> = map.passable_cells().collect();
    assert!(cells.len() >= m);
    cells.shuffle(rng);
    let starts = cells[..m].to_vec();
    cells.shuffle(rng);
    let goals = cells[..m].to_vec();
    Instance::new(map.clone(), starts.into_iter().zip(goals).collect()).unwrap()
}

/// Strict RFC 4180 reader: CRLF record separators, quoted fields with doubled
/// quotes, unquoted fields limited to TEXTDATA, equal field counts. Errors
/// name the byte offset of the first violation.
pub fn rfc4180_parse(bytes: &[u8]) -> Result<Vec<Vec<String>>, String> {
    let textdata = |b: u8| matches!(b, 0x20..=0x21 | 0x23..=0x2B | 0x2D..=0x7E);
    let mut records: Vec<Vec<String>> = Vec::new();
    let mut record: Vec<String> = Vec::new();
    let mut i = 0;
    if bytes.is_empty() {
        return Ok(records);
    }
    loop {
        let mut field = Vec::new();
        if i < bytes.len() && bytes[i] == b'"' {
            i += 1;
            loop {
                match bytes.get(i) {
                    None => return Err(format!("unterminated quoted field at byte {i}")),
                    Some(b'"') if bytes.get(i + 1) == Some(&b'"') => {
                        field.push(b'"');
                        i += 2;
                    }
                    Some(b'"') => {
                        i += 1;
                        break;
                    }
                    Some(&b) => {
                        field.push(b);
                        i += 1;
                    }
                }
            }
        } else {
            while i < bytes.len() && textdata(bytes[i]) {
                field.push(bytes[i]);
                i += 1;
            }
        }
        record.push(String::from_utf8(field).map_err(|e| e.to_string())?);
        match (bytes.get(i), bytes.get(i + 1)) {
            (Some(b','), _) => i += 1,
            (Some(b'\r'), Some(b'\n')) => {
                i += 2;
                records.push(std::mem::take(&mut record));
                if i == bytes.len() {
                    break;
                }
            }
            (None, _) => {
                records.push(std::mem::take(&mut record));
                break;
            }
            (Some(&b), _) => return Err(format!("byte {b:#04x} not allowed at offset {i}")),
        }
    }
    if let Some(first) = records.first() {
        if let Some((n, r)) = records.iter().enumerate().find(|(_, r)| r.len() != first.len()) {
            return Err(format!("record {n} has {} fields, header has {}", r.len(), first.len()));
        }
    }
    Ok(records)
}

/// Writes the 32×32 synthetic benchmark (or a smaller variant) into `dir`.
pub fn small_benchmark(dir: &std::path::Path, scenarios: usize) -> anytime_mapf::generate::BenchmarkFiles {
    use anytime_mapf::generate::{write_benchmark, BenchmarkSpec, SolvabilityCheck};
    let spec = BenchmarkSpec {
        name: "tiny-16-16-20".into(),
        width: 16,
        height: 16,
        obstacle_fraction: 0.2,
        scenarios,
        rows: 40,
        seed: 9,
        solvable: Some(SolvabilityCheck {
            agents: 20,
            orders: 4,
            min_successes: 3,
        }),
    };
    write_benchmark(dir, &spec).unwrap()
}
