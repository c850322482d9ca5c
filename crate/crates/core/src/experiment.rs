//! Batch runs over the cross-product of an experiment spec, with per-run
//! rows and mean ± 95% normal-approximation confidence intervals.
//!
//! Runs execute in parallel across a pool of `jobs` threads; each run is
//! single-threaded. Timing-sensitive comparisons should use `jobs = 1` or the
//! work clock.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path as FsPath, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{snapshot_metrics, solve, Algorithm, ClockKind, SolverConfig, DEFAULT_WORK_UNIT_S};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::io::{read_map, read_scenario, select_agents, write_results, OutputFormat, RunRecord};
use crate::planner::DEFAULT_RESTARTS;

/// A map plus the scenario files to run on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapSpec {
    /// Map path; scenarios default to `<stem>-random-*.scen` beside it.
    Path(String),
    Explicit {
        map: String,
        scenarios: String,
    },
}

fn default_repetitions() -> usize {
    1
}
fn default_jobs() -> usize {
    1
}
fn default_k_values() -> Vec<usize> {
    vec![32]
}
fn default_neighborhood() -> usize {
    8
}
fn default_epsilon() -> f64 {
    0.5
}
fn default_work_unit() -> f64 {
    DEFAULT_WORK_UNIT_S
}
fn default_restarts() -> usize {
    DEFAULT_RESTARTS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub maps: Vec<MapSpec>,
    pub agents: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub budgets_s: Vec<f64>,
    #[serde(default = "default_k_values")]
    pub k_values: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default = "default_neighborhood")]
    pub neighborhood_size: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub clock: ClockKind,
    #[serde(default = "default_work_unit")]
    pub work_unit_s: f64,
    /// Priority-order restarts for the initial solution.
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    /// Draw agents by a seeded shuffle of the scenario rows instead of the first m.
    #[serde(default)]
    pub shuffle_agents: Option<u64>,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("experiment spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn read(path: impl AsRef<FsPath>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("maps", self.maps.is_empty()),
            ("agents", self.agents.is_empty()),
            ("algorithms", self.algorithms.is_empty()),
            ("budgets_s", self.budgets_s.is_empty()),
            ("k_values", self.k_values.is_empty()),
            ("seeds", self.seeds.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::InvalidInput(format!("experiment spec: `{name}` is empty")));
        }
        if self.repetitions == 0 || self.jobs == 0 {
            return Err(Error::InvalidInput(
                "experiment spec: repetitions and jobs must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One fully resolved run of the cross-product.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub map_path: PathBuf,
    pub scen_path: PathBuf,
    pub m: usize,
    pub config: SolverConfig,
    pub shuffle_agents: Option<u64>,
}

impl RunSpec {
    fn label(path: &FsPath) -> String {
        path.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string())
    }

    pub fn map_name(&self) -> String {
        Self::label(&self.map_path)
    }

    pub fn scenario_name(&self) -> String {
        Self::label(&self.scen_path)
    }
}

/// A run that did not produce a result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub map: String,
    pub scenario: String,
    pub algorithm: String,
    pub m: usize,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub seed: u64,
    pub budget_s: f64,
    pub error: String,
}

/// Mean and 95% interval half-width for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub map: String,
    pub algorithm: String,
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub epsilon: Option<f64>,
    pub budget_s: f64,
    pub runs: usize,
    pub final_cost_mean: f64,
    pub final_cost_ci95: f64,
    pub auc_mean: f64,
    pub auc_ci95: f64,
    pub initial_cost_mean: f64,
    pub iterations_mean: f64,
    pub success_rate_mean: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentOutcome {
    pub runs: Vec<RunRecord>,
    pub failures: Vec<RunFailure>,
    pub summary: Vec<SummaryRow>,
}

/// Seed of repetition `rep`: the base seed itself for the first repetition,
/// then a SplitMix64 mix of both.
pub fn repetition_seed(seed: u64, rep: usize) -> u64 {
    if rep == 0 {
        return seed;
    }
    let mut z = seed ^ (rep as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn resolve(base: &FsPath, p: &str) -> PathBuf {
    let p = FsPath::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn scenario_files(base: &FsPath, map: &MapSpec) -> Result<(PathBuf, Vec<PathBuf>)> {
    let (map_path, pattern) = match map {
        MapSpec::Path(m) => {
            let map_path = resolve(base, m);
            let stem = map_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let dir = map_path.parent().unwrap_or(base).to_path_buf();
            let pattern = dir.join(format!("{stem}-random-*.scen"));
            (map_path, pattern)
        }
        MapSpec::Explicit { map, scenarios } => (resolve(base, map), resolve(base, scenarios)),
    };
    let pattern_str = pattern.to_string_lossy().into_owned();
    let mut files: Vec<PathBuf> = glob::glob(&pattern_str)
        .map_err(|e| Error::InvalidInput(format!("bad scenario glob {pattern_str:?}: {e}")))?
        .filter_map(|r| r.ok())
        .collect();
    // numeric-aware order so that `-10` follows `-9`
    files.sort_by_key(|p| natural_key(&p.to_string_lossy()));
    if files.is_empty() {
        return Err(Error::InvalidInput(format!("no scenario files match {pattern_str:?}")));
    }
    Ok((map_path, files))
}

fn natural_key(s: &str) -> Vec<(String, u64)> {
    let mut out = Vec::new();
    let mut text = String::new();
    let mut num: Option<u64> = None;
    for ch in s.chars() {
        if let Some(d) = ch.to_digit(10) {
            num = Some(num.unwrap_or(0).saturating_mul(10).saturating_add(u64::from(d)));
        } else {
            if let Some(n) = num.take() {
                out.push((std::mem::take(&mut text), n));
            }
            text.push(ch);
        }
    }
    out.push((text, num.unwrap_or(0)));
    out
}

/// Expands the spec into runs, ordered by map, scenario, agent count,
/// algorithm, budget, K, seed and repetition. Relative paths are resolved
/// against `base`.
pub fn expand(spec: &ExperimentSpec, base: &FsPath) -> Result<Vec<RunSpec>> {
    spec.validate()?;
    let mut runs = Vec::new();
    for map in &spec.maps {
        let (map_path, scens) = scenario_files(base, map)?;
        for scen in &scens {
            for &m in &spec.agents {
                for &algorithm in &spec.algorithms {
                    for &budget in &spec.budgets_s {
                        let ks: Vec<usize> = if algorithm.uses_k() {
                            spec.k_values.clone()
                        } else {
                            vec![spec.k_values[0]]
                        };
                        for k in ks {
                            for &seed in &spec.seeds {
                                for rep in 0..spec.repetitions {
                                    let config = SolverConfig {
                                        algorithm,
                                        neighborhood_size: spec.neighborhood_size,
                                        k,
                                        epsilon: spec.epsilon,
                                        time_budget_s: budget,
                                        seed: repetition_seed(seed, rep),
                                        clock: spec.clock,
                                        work_unit_s: spec.work_unit_s,
                                        restarts: spec.restarts,
                                        ..SolverConfig::default()
                                    };
                                    config.validate()?;
                                    runs.push(RunSpec {
                                        map_path: map_path.clone(),
                                        scen_path: scen.clone(),
                                        m,
                                        config,
                                        shuffle_agents: spec.shuffle_agents,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(runs)
}

/// Summary row of a finished run.
pub fn record_for(
    map: &str,
    scenario: &str,
    instance: &Instance,
    config: &SolverConfig,
    result: &crate::engine::RunResult,
) -> Result<RunRecord> {
    let metrics = snapshot_metrics(result, config.time_budget_s)?;
    Ok(RunRecord {
        map: map.to_string(),
        scenario: scenario.to_string(),
        algorithm: config.algorithm.name().to_string(),
        m: instance.num_agents(),
        n: config.neighborhood_size,
        k: config.algorithm.uses_k().then_some(config.k),
        epsilon: config.algorithm.uses_epsilon().then_some(config.epsilon),
        seed: config.seed,
        budget_s: config.time_budget_s,
        initial_cost: metrics.initial_cost,
        final_cost: metrics.final_cost,
        auc: metrics.auc,
        iterations: metrics.iterations,
        success_rate: metrics.success_rate,
    })
}

/// Loads the instance and runs one configuration.
pub fn run_one(run: &RunSpec) -> Result<RunRecord> {
    let map = read_map(&run.map_path)?;
    let entries = read_scenario(&run.scen_path)?;
    let instance = select_agents(&entries, &map, run.m, run.shuffle_agents)?;
    let result = solve(&instance, &run.config)?;
    record_for(&run.map_name(), &run.scenario_name(), &instance, &run.config, &result)
}

fn mean_ci(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * var.sqrt() / n.sqrt())
}

/// Groups runs by (map, algorithm, m, N, K, ε, budget) in first-seen order.
pub fn aggregate(runs: &[RunRecord]) -> Vec<SummaryRow> {
    type Key = (String, String, usize, usize, Option<usize>, Option<u64>, u64);
    let mut order: Vec<Key> = Vec::new();
    let mut groups: BTreeMap<Key, Vec<&RunRecord>> = BTreeMap::new();
    for r in runs {
        let key: Key = (
            r.map.clone(),
            r.algorithm.clone(),
            r.m,
            r.n,
            r.k,
            r.epsilon.map(f64::to_bits),
            r.budget_s.to_bits(),
        );
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let rows = &groups[&key];
            let col = |f: fn(&RunRecord) -> f64| rows.iter().map(|r| f(r)).collect::<Vec<f64>>();
            let (final_cost_mean, final_cost_ci95) = mean_ci(&col(|r| r.final_cost as f64));
            let (auc_mean, auc_ci95) = mean_ci(&col(|r| r.auc));
            let first = rows[0];
            SummaryRow {
                map: first.map.clone(),
                algorithm: first.algorithm.clone(),
                m: first.m,
                n: first.n,
                k: first.k,
                epsilon: first.epsilon,
                budget_s: first.budget_s,
                runs: rows.len(),
                final_cost_mean,
                final_cost_ci95,
                auc_mean,
                auc_ci95,
                initial_cost_mean: mean_ci(&col(|r| r.initial_cost as f64)).0,
                iterations_mean: mean_ci(&col(|r| r.iterations as f64)).0,
                success_rate_mean: mean_ci(&col(|r| r.success_rate)).0,
            }
        })
        .collect()
}

/// Called as `(index, total, run)` before each run starts.
pub type Progress<'a> = &'a (dyn Fn(usize, usize, &RunSpec) + Sync);

/// Runs every expanded configuration on `jobs` threads. Failed runs are
/// reported separately and never affect other rows.
pub fn run_experiment(
    spec: &ExperimentSpec,
    base: &FsPath,
    progress: Option<Progress<'_>>,
) -> Result<ExperimentOutcome> {
    let runs = expand(spec, base)?;
    let total = runs.len();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let results: Vec<Result<RunRecord>> = pool.install(|| {
        runs.par_iter()
            .enumerate()
            .map(|(i, run)| {
                let out = run_one(run);
                if let Some(cb) = progress {
                    cb(i, total, run);
                }
                out
            })
            .collect()
    });
    let mut outcome = ExperimentOutcome::default();
    for (run, res) in runs.iter().zip(results) {
        match res {
            Ok(record) => outcome.runs.push(record),
            Err(e) => outcome.failures.push(RunFailure {
                map: run.map_name(),
                scenario: run.scenario_name(),
                algorithm: run.config.algorithm.name().to_string(),
                m: run.m,
                k: run.config.algorithm.uses_k().then_some(run.config.k),
                seed: run.config.seed,
                budget_s: run.config.time_budget_s,
                error: e.to_string(),
            }),
        }
    }
    outcome.summary = aggregate(&outcome.runs);
    Ok(outcome)
}

fn write_csv<T: Serialize>(rows: &[T], header: &[&str], path: &FsPath) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = crate::io::results::csv_writer(std::io::BufWriter::new(file));
    w.write_record(header).map_err(|e| Error::format(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::format(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub const SUMMARY_COLUMNS: [&str; 15] = [
    "map",
    "algorithm",
    "m",
    "N",
    "K",
    "epsilon",
    "budget_s",
    "runs",
    "final_cost_mean",
    "final_cost_ci95",
    "auc_mean",
    "auc_ci95",
    "initial_cost_mean",
    "iterations_mean",
    "success_rate_mean",
];

pub const FAILURE_COLUMNS: [&str; 8] = ["map", "scenario", "algorithm", "m", "K", "seed", "budget_s", "error"];

/// Writes `runs.csv`, `runs.json`, `summary.csv` and `failures.csv` into `dir`.
pub fn write_outcome(outcome: &ExperimentOutcome, dir: impl AsRef<FsPath>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_results(&outcome.runs, OutputFormat::Csv, dir.join("runs.csv"))?;
    write_results(&outcome.runs, OutputFormat::Json, dir.join("runs.json"))?;
    write_csv(&outcome.summary, &SUMMARY_COLUMNS, &dir.join("summary.csv"))?;
    write_csv(&outcome.failures, &FAILURE_COLUMNS, &dir.join("failures.csv"))
}
