use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use anytime_mapf::engine::{snapshot_metrics, solve, Algorithm, ClockKind, SolverConfig, DEFAULT_WORK_UNIT_S};
use anytime_mapf::experiment::{record_for, run_experiment, write_outcome, ExperimentSpec};
use anytime_mapf::generate::{write_benchmark, BenchmarkSpec, SolvabilityCheck};
use anytime_mapf::io::{load_instance, write_results, write_trace, OutputFormat};
use anytime_mapf::planner::DEFAULT_RESTARTS;
use anytime_mapf::Error;

const EXIT_OTHER: u8 = 1;
const EXIT_BAD_FLAGS: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_NO_SOLUTION: u8 = 4;

#[derive(Parser)]
#[command(name = "anytime-mapf", version, about = "Anytime MAPF solver and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one map/scenario configuration.
    Solve(SolveArgs),
    /// Run the cross-product described by a JSON experiment spec.
    Experiment(ExperimentArgs),
    /// Write a seeded synthetic map and scenario set.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    scen: PathBuf,
    #[arg(long)]
    agents: usize,
    #[arg(long)]
    algorithm: Algorithm,
    /// Seconds, including the initial solution.
    #[arg(long)]
    time_budget: f64,
    #[arg(long, default_value_t = 8)]
    neighborhood_size: usize,
    #[arg(long, default_value_t = 32)]
    k: usize,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the (time_s, cost) trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the run summary here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// `work` makes runs reproducible to the byte.
    #[arg(long, default_value = "wall")]
    clock: ClockKind,
    #[arg(long, default_value_t = DEFAULT_WORK_UNIT_S)]
    work_unit: f64,
    /// Pick agents by a seeded shuffle of the scenario rows.
    #[arg(long)]
    shuffle_agents: Option<u64>,
    /// Priority-order restarts for the initial solution.
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Receives runs.csv, runs.json, summary.csv and failures.csv.
    #[arg(long)]
    out_dir: PathBuf,
    /// Overrides the spec's `jobs`.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value = "random-32-32-20")]
    name: String,
    #[arg(long, default_value_t = 32)]
    width: usize,
    #[arg(long, default_value_t = 32)]
    height: usize,
    #[arg(long, default_value_t = 0.2)]
    obstacles: f64,
    #[arg(long, default_value_t = 25)]
    scenarios: usize,
    #[arg(long, default_value_t = 400)]
    rows: usize,
    #[arg(long, default_value_t = 2022)]
    seed: u64,
    /// Keep only scenarios whose first this-many rows are solved by
    /// prioritized planning under at least `--check-min` of
    /// `--check-orders` random priority orders.
    #[arg(long, default_value_t = 150)]
    check_agents: usize,
    /// 0 disables the check.
    #[arg(long, default_value_t = 20)]
    check_orders: usize,
    #[arg(long, default_value_t = 8)]
    check_min: usize,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_) => EXIT_BAD_FLAGS,
        Error::Parse { .. } | Error::Format { .. } => EXIT_PARSE,
        Error::NoInitialSolution { .. } => EXIT_NO_SOLUTION,
        Error::Io { .. } | Error::InvalidPath { .. } => EXIT_OTHER,
    }
}

fn label(p: &std::path::Path) -> String {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.display().to_string())
}

fn cmd_solve(a: SolveArgs) -> anytime_mapf::Result<()> {
    let config = SolverConfig {
        algorithm: a.algorithm,
        neighborhood_size: a.neighborhood_size,
        k: a.k,
        epsilon: a.epsilon,
        time_budget_s: a.time_budget,
        seed: a.seed,
        clock: a.clock,
        work_unit_s: a.work_unit,
        restarts: a.restarts,
        ..SolverConfig::default()
    };
    config.validate()?;
    let instance = load_instance(&a.map, &a.scen, a.agents, a.shuffle_agents)?;
    let result = solve(&instance, &config)?;
    let metrics = snapshot_metrics(&result, config.time_budget_s)?;
    if let Some(path) = &a.trace {
        write_trace(&result.trace, path)?;
    }
    if let Some(path) = &a.out {
        let record = record_for(&label(&a.map), &label(&a.scen), &instance, &config, &result)?;
        write_results(&[record], a.format, path)?;
    }
    println!(
        "final_cost={} auc={} initial_cost={} iterations={} success_rate={:.4}",
        metrics.final_cost, metrics.auc, metrics.initial_cost, metrics.iterations, metrics.success_rate
    );
    Ok(())
}

fn cmd_experiment(a: ExperimentArgs) -> anytime_mapf::Result<()> {
    let mut spec = ExperimentSpec::read(&a.spec)?;
    if let Some(j) = a.jobs {
        spec.jobs = j;
    }
    spec.validate()?;
    let base = a
        .spec
        .parent()
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("."));
    let quiet = a.quiet;
    let progress = move |i: usize, total: usize, run: &anytime_mapf::experiment::RunSpec| {
        if !quiet {
            eprintln!(
                "[{}/{}] {} {} m={} seed={}",
                i + 1,
                total,
                run.config.algorithm,
                run.scenario_name(),
                run.m,
                run.config.seed
            );
        }
    };
    let outcome = run_experiment(&spec, &base, Some(&progress))?;
    write_outcome(&outcome, &a.out_dir)?;
    for row in &outcome.summary {
        println!(
            "{} {} m={} K={} final_cost={:.2}±{:.2} auc={:.2}±{:.2} runs={}",
            row.map,
            row.algorithm,
            row.m,
            row.k.map_or_else(|| "-".to_string(), |k| k.to_string()),
            row.final_cost_mean,
            row.final_cost_ci95,
            row.auc_mean,
            row.auc_ci95,
            row.runs
        );
    }
    if !outcome.failures.is_empty() {
        eprintln!("{} runs failed; see failures.csv", outcome.failures.len());
    }
    Ok(())
}

fn cmd_generate(a: GenerateArgs) -> anytime_mapf::Result<()> {
    let spec = BenchmarkSpec {
        name: a.name,
        width: a.width,
        height: a.height,
        obstacle_fraction: a.obstacles,
        scenarios: a.scenarios,
        rows: a.rows,
        seed: a.seed,
        solvable: (a.check_orders > 0).then_some(SolvabilityCheck {
            agents: a.check_agents,
            orders: a.check_orders,
            min_successes: a.check_min,
        }),
    };
    let files = write_benchmark(&a.out_dir, &spec)?;
    println!("{}", files.map.display());
    for s in &files.scenarios {
        println!("{}", s.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
