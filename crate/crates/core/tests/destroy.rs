mod common;

use std::collections::HashSet;

use anytime_mapf::bandit::BetaParams;
use anytime_mapf::destroy::{
    address_destroy, agent_based_destroy, intersections, map_based_destroy, random_destroy, random_walk_neighborhood,
    select_tabu_seed, top_k, PlanIndex, SeedBandit, TabuList, WALK_RESTARTS,
};
use anytime_mapf::grid::{Cell, GridMap};
use anytime_mapf::instance::Instance;
use anytime_mapf::plan::{Path, Plan};
use anytime_mapf::planner::initial_solution;
use common::*;
use rand::Rng;
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, DiscreteCDF};

/// Agents in separate rows of an open map, each waiting `delays[i]` steps at
/// its start before walking `len` cells to the right.
fn row_plan(delays: &[usize], len: usize) -> (Instance, Plan) {
    let map = GridMap::open(len + 1, delays.len()).unwrap();
    let ends = (0..delays.len())
        .map(|y| (map.cell(0, y).unwrap(), map.cell(len, y).unwrap()))
        .collect();
    let inst = Instance::new(map.clone(), ends).unwrap();
    let paths = delays
        .iter()
        .enumerate()
        .map(|(y, &d)| {
            let mut cells = vec![map.cell(0, y).unwrap(); d + 1];
            cells.extend((1..=len).map(|x| map.cell(x, y).unwrap()));
            Path::new(y, cells)
        })
        .collect();
    let plan = Plan::new(&inst, paths).unwrap();
    (inst, plan)
}

fn solved_instance(r: &mut rand_chacha::ChaCha8Rng, w: usize, m: usize) -> (Instance, Plan) {
    loop {
        let map = random_connected_map(w, w, 0.15, r);
        let inst = random_instance(&map, m, r);
        if let Ok(plan) = initial_solution(&inst, r, 10) {
            return (inst, plan);
        }
    }
}

#[test]
fn random_destroy_is_uniform_per_agent() {
    let mut r = rng(51);
    let map = GridMap::open(10, 1).unwrap();
    let inst = Instance::new(
        map.clone(),
        (0..10)
            .map(|x| (map.cell(x, 0).unwrap(), map.cell(x, 0).unwrap()))
            .collect(),
    )
    .unwrap();
    let trials = 100_000u64;
    let mut counts = [0u64; 10];
    for _ in 0..trials {
        let n = random_destroy(&inst, 3, &mut r).unwrap();
        assert_eq!(n.agents.iter().collect::<HashSet<_>>().len(), 3);
        for a in n.agents {
            counts[a] += 1;
        }
    }
    let b = Binomial::new(0.3, trials).unwrap();
    for (a, &c) in counts.iter().enumerate() {
        let p = 2.0 * b.cdf(c).min(1.0 - b.cdf(c.saturating_sub(1)));
        // Bonferroni over ten agents
        assert!(p > 0.01 / 10.0, "agent {a} picked {c} times, p = {p}");
    }
    assert!(random_destroy(&inst, 10, &mut r).is_err());
    assert_eq!(random_destroy(&inst, 9, &mut r).unwrap().len(), 9);
}

#[test]
fn map_based_region_contains_every_collected_agent() {
    let mut r = rng(52);
    for _ in 0..200 {
        let m = r.random_range(4..12);
        let (inst, plan) = solved_instance(&mut r, 8, m);
        let map = inst.map();
        let centers = intersections(map);
        let oracle_centers: Vec<Cell> = map.passable_cells().filter(|&c| moves(map, c).len() > 2).collect();
        assert_eq!(centers, oracle_centers);
        let index = PlanIndex::new(map, &plan);
        let n = r.random_range(1..inst.num_agents());
        let out = map_based_destroy(&inst, &index, &centers, n, &mut r).unwrap();
        assert!(oracle_centers.contains(&out.center));
        assert_eq!(out.region[0], out.center);
        // region is a breadth-first prefix: distances never decrease
        let d: Vec<usize> = out
            .region
            .iter()
            .map(|&c| bfs_distance(map, out.center, c).unwrap())
            .collect();
        assert!(d.windows(2).all(|w| w[0] <= w[1]));
        let visits = |cells: &[Cell]| -> HashSet<usize> {
            plan.paths()
                .iter()
                .filter(|p| p.cells.iter().any(|c| cells.contains(c)))
                .map(|p| p.agent)
                .collect()
        };
        let hood = &out.neighborhood;
        let collected: HashSet<usize> = hood.collected().iter().copied().collect();
        assert!(collected.is_subset(&visits(&out.region)));
        assert!(visits(&out.region[..out.region.len() - 1]).is_subset(&collected));
        assert_eq!(hood.len(), n);
        assert_eq!(hood.agents.iter().collect::<HashSet<_>>().len(), n);
    }
}

#[test]
fn map_based_on_open_grid_picks_interior_cells() {
    let mut r = rng(53);
    let map = GridMap::open(5, 5).unwrap();
    let inst = Instance::new(map.clone(), vec![(map.cell(0, 2).unwrap(), map.cell(4, 2).unwrap())]).unwrap();
    let plan = initial_solution(&inst, &mut r, 1).unwrap();
    let index = PlanIndex::new(&map, &plan);
    let centers = intersections(&map);
    for _ in 0..200 {
        let out = map_based_destroy(&inst, &index, &centers, 1, &mut r).unwrap();
        let (x, y) = map.xy(out.center);
        assert!(map.degree(out.center) > 2);
        // open 5x5: degree > 2 excludes only the corners
        assert!(!((x == 0 || x == 4) && (y == 0 || y == 4)));
        assert_eq!(out.neighborhood.agents, vec![0]);
    }
    let corridor = GridMap::open(5, 1).unwrap();
    assert!(intersections(&corridor).is_empty());
}

/// Independent walk simulator following the same transition rule: from a
/// uniform time on the seed's path, move uniformly among cells (including
/// staying) from which the goal is still reachable strictly before the seed's
/// arrival, collecting vertex and swap encounters.
fn simulate_walk_membership(plan: &Plan, map: &GridMap, seed: usize, n: usize, r: &mut impl Rng) -> HashSet<usize> {
    let at = |p: &Path, t: usize| p.cells[t.min(p.cells.len() - 1)];
    let occupant = |c: Cell, t: usize| plan.paths().iter().find(|p| at(p, t) == c).map(|p| p.agent);
    let goal = *plan.path(seed).cells.last().unwrap();
    let upper = plan.path(seed).cells.len() - 1;
    let dist: std::collections::HashMap<Cell, usize> = map
        .passable_cells()
        .map(|c| (c, bfs_distance(map, c, goal).unwrap()))
        .collect();
    let mut set = vec![seed];
    for _ in 0..WALK_RESTARTS {
        if set.len() >= n {
            break;
        }
        let mut t = r.random_range(0..=upper);
        let mut loc = at(plan.path(seed), t);
        while t < upper && set.len() < n {
            let mut opts = moves(map, loc);
            opts.push(loc);
            opts.retain(|&c| t + 1 + dist[&c] < upper);
            if opts.is_empty() {
                break;
            }
            let next = opts[r.random_range(0..opts.len())];
            if let Some(a) = occupant(next, t + 1) {
                if a != seed && !set.contains(&a) {
                    set.push(a);
                }
            }
            if next != loc && set.len() < n {
                if let (Some(a), Some(b)) = (occupant(next, t), occupant(loc, t + 1)) {
                    if a == b && a != seed && !set.contains(&a) {
                        set.push(a);
                    }
                }
            }
            loc = next;
            t += 1;
        }
    }
    set.into_iter().collect()
}

#[test]
fn random_walk_frequencies_match_an_independent_simulator() {
    // seed 0 detours through the middle row; agents 1 and 2 cross its corridor
    let map = GridMap::from_ascii(&["......", "......", "......"]).unwrap();
    let c = |x, y| map.cell(x, y).unwrap();
    let inst = Instance::new(
        map.clone(),
        vec![(c(0, 1), c(5, 1)), (c(2, 0), c(2, 2)), (c(4, 2), c(4, 0))],
    )
    .unwrap();
    let plan = Plan::new(
        &inst,
        vec![
            Path::new(
                0,
                vec![
                    c(0, 1),
                    c(0, 1),
                    c(0, 1),
                    c(1, 1),
                    c(1, 1),
                    c(2, 1),
                    c(3, 1),
                    c(4, 1),
                    c(5, 1),
                ],
            ),
            Path::new(1, vec![c(2, 0), c(2, 1), c(2, 2)]),
            Path::new(2, vec![c(4, 2), c(4, 2), c(4, 2), c(4, 1), c(4, 0)]),
        ],
    )
    .unwrap();
    assert_eq!(plan.delays(), &[3, 0, 2]);
    let index = PlanIndex::new(&map, &plan);
    let trials = 100_000;
    for n in [2, 3] {
        let (mut lib, mut sim) = ([0usize; 3], [0usize; 3]);
        let (mut r1, mut r2) = (rng(54), rng(55));
        for _ in 0..trials {
            let hood = random_walk_neighborhood(&inst, &plan, &index, 0, n, &mut r1);
            assert_eq!(hood.agents[0], 0);
            assert_eq!(hood.len(), n);
            for &a in hood.collected() {
                lib[a] += 1;
            }
            for a in simulate_walk_membership(&plan, &map, 0, n, &mut r2) {
                sim[a] += 1;
            }
        }
        for a in 0..3 {
            let (f, g) = (lib[a] as f64 / trials as f64, sim[a] as f64 / trials as f64);
            assert!((f - g).abs() < 0.02, "N={n} agent {a}: walk {f} vs simulator {g}");
        }
        assert!(lib[1] > 0 && lib[2] > 0, "{lib:?}");
    }
}

#[test]
fn walk_from_an_undelayed_seed_only_pads() {
    let mut r = rng(56);
    let (inst, plan) = row_plan(&[0, 0, 0], 4);
    let index = PlanIndex::new(inst.map(), &plan);
    let hood = random_walk_neighborhood(&inst, &plan, &index, 1, 2, &mut r);
    assert_eq!(hood.collected(), &[1]);
    assert_eq!(hood.padded, 1);
    let (single, plan1) = row_plan(&[0], 3);
    let index1 = PlanIndex::new(single.map(), &plan1);
    assert_eq!(
        random_walk_neighborhood(&single, &plan1, &index1, 0, 1, &mut r).agents,
        vec![0]
    );
}

/// Reference tabu rule written from its definition.
fn oracle_tabu(delays: &[usize], tabu: &mut HashSet<usize>) -> usize {
    let mut best: Option<usize> = None;
    for a in 0..delays.len() {
        if tabu.contains(&a) {
            continue;
        }
        match best {
            Some(b) if delays[b] >= delays[a] => {}
            _ => best = Some(a),
        }
    }
    let s = best.unwrap();
    if delays[s] == 0 {
        tabu.clear();
    } else {
        tabu.insert(s);
        if tabu.len() == delays.len() {
            tabu.clear();
        }
    }
    s
}

#[test]
fn tabu_seed_matches_linear_scan() {
    let mut r = rng(57);
    let mut cases = 0;
    while cases < 10_000 {
        let m = r.random_range(1..12);
        let delays: Vec<usize> = (0..m)
            .map(|_| if r.random_bool(0.3) { 0 } else { r.random_range(0..6) })
            .collect();
        let mut tabu = TabuList::new(m);
        let mut oracle = HashSet::new();
        for _ in 0..r.random_range(1..2 * m + 2) {
            cases += 1;
            assert_eq!(select_tabu_seed(&delays, &mut tabu), oracle_tabu(&delays, &mut oracle));
            assert!((0..m).all(|a| tabu.contains(a) == oracle.contains(&a)));
        }
    }
    let mut tabu = TabuList::new(3);
    assert_eq!(select_tabu_seed(&[5, 3, 0], &mut tabu), 0);
    assert_eq!(select_tabu_seed(&[5, 3, 0], &mut tabu), 1);
    assert_eq!(select_tabu_seed(&[5, 3, 0], &mut tabu), 2);
    assert!(tabu.is_empty());
}

#[test]
fn top_k_matches_repeated_maximum_selection() {
    let mut r = rng(58);
    for _ in 0..5000 {
        let m = r.random_range(1..40);
        let delays: Vec<usize> = (0..m).map(|_| r.random_range(0..8)).collect();
        let k = r.random_range(1..m + 5);
        let mut left: Vec<usize> = (0..m).collect();
        let mut oracle = Vec::new();
        while oracle.len() < k.min(m) {
            let pos = (0..left.len()).fold(0, |b, i| if delays[left[i]] > delays[left[b]] { i } else { b });
            oracle.push(left.remove(pos));
        }
        assert_eq!(top_k(&delays, k), oracle);
    }
}

#[test]
fn address_seed_is_uniform_over_exchangeable_top_k() {
    let mut r = rng(59);
    let (inst, plan) = row_plan(&[9, 7, 7, 2, 0], 6);
    assert_eq!(top_k(plan.delays(), 3), vec![0, 1, 2]);
    let index = PlanIndex::new(inst.map(), &plan);
    let params = BetaParams::new(5);
    let mut counts = [0usize; 3];
    for _ in 0..30_000 {
        let (hood, seed) = address_destroy(&inst, &plan, &index, 3, &params, SeedBandit::Thompson, 2, &mut r).unwrap();
        assert!(seed < 3);
        assert_eq!(hood.agents[0], seed);
        assert_eq!(hood.len(), 2);
        counts[seed] += 1;
    }
    let e = counts.iter().sum::<usize>() as f64 / 3.0;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let p = 1.0 - ChiSquared::new(2.0).unwrap().cdf(stat);
    assert!(p > 0.01, "{counts:?} p = {p}");
}

#[test]
fn address_limits_match_their_degenerate_forms() {
    let mut r = rng(60);
    let (inst, plan) = row_plan(&[1, 4, 4, 0, 2], 5);
    let index = PlanIndex::new(inst.map(), &plan);
    let mut params = BetaParams::new(5);
    for _ in 0..200 {
        let (_, seed) = address_destroy(&inst, &plan, &index, 1, &params, SeedBandit::Thompson, 2, &mut r).unwrap();
        assert_eq!(seed, 1);
    }
    params.set(3, 40, 1).unwrap();
    let mut hit = false;
    for _ in 0..200 {
        let (_, seed) = address_destroy(
            &inst,
            &plan,
            &index,
            99,
            &params,
            SeedBandit::EpsGreedy { epsilon: 0.0 },
            2,
            &mut r,
        )
        .unwrap();
        hit |= seed == 3;
    }
    assert!(hit, "K >= m must admit the zero-delay agent");
    assert!(address_destroy(&inst, &plan, &index, 0, &params, SeedBandit::Thompson, 2, &mut r).is_err());
}

#[test]
fn every_heuristic_returns_exactly_n_distinct_agents() {
    let mut r = rng(61);
    for _ in 0..100 {
        let m = r.random_range(2..14);
        let (inst, plan) = solved_instance(&mut r, 8, m);
        let index = PlanIndex::new(inst.map(), &plan);
        let n = r.random_range(1..m);
        let centers = intersections(inst.map());
        let mut tabu = TabuList::new(m);
        let params = BetaParams::new(m);
        let k = r.random_range(1..m + 1);
        let (addr, seed) = address_destroy(&inst, &plan, &index, k, &params, SeedBandit::Thompson, n, &mut r).unwrap();
        assert!(top_k(plan.delays(), k).contains(&seed));
        let agent = agent_based_destroy(&inst, &plan, &index, &mut tabu, n, &mut r);
        let hoods = [
            random_destroy(&inst, n, &mut r).unwrap(),
            map_based_destroy(&inst, &index, &centers, n, &mut r)
                .unwrap()
                .neighborhood,
            agent.clone(),
            addr.clone(),
        ];
        for h in &hoods {
            assert_eq!(h.len(), n);
            assert_eq!(h.agents.iter().collect::<HashSet<_>>().len(), n);
            assert!(h.agents.iter().all(|&a| a < m));
        }
        assert_eq!(addr.agents[0], seed);
        assert_eq!(agent.seed, Some(agent.agents[0]));
    }
}
