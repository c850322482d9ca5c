mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::{rfc4180_parse, small_benchmark};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_anytime-mapf"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Parses the `key=value` summary line.
fn field(line: &str, key: &str) -> f64 {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing in {line}"))
        .parse()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn solve_args<'a>(map: &'a str, scen: &'a str, agents: &'a str, alg: &'a str) -> Vec<&'a str> {
    vec![
        "solve",
        "--map",
        map,
        "--scen",
        scen,
        "--agents",
        agents,
        "--algorithm",
        alg,
        "--time-budget",
        "0.2",
        "--clock",
        "work",
    ]
}

#[test]
fn bad_flags_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let files = small_benchmark(dir.path(), 1);
    let (map, scen) = (s(&files.map), s(&files.scenarios[0]));
    assert_eq!(run(&["solve", "--map", map]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--bogus"]).status.code(), Some(2));
    let mut args = solve_args(map, scen, "5", "address_ts");
    args.extend(["--k", "0"]);
    assert_eq!(run(&args).status.code(), Some(2));
    let mut args = solve_args(map, scen, "5", "address_eg");
    args.extend(["--epsilon", "1.5"]);
    assert_eq!(run(&args).status.code(), Some(2));
    assert_eq!(run(&solve_args(map, scen, "5", "no_such_alg")).status.code(), Some(2));
}

#[test]
fn malformed_files_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let files = small_benchmark(dir.path(), 1);
    let bad = dir.path().join("bad.map");
    fs::write(&bad, "type octile\nheight 2\nwidth 2\nmap\n..\n.\n").unwrap();
    let out = run(&solve_args(
        s(&bad),
        s(&files.scenarios[0]),
        "2",
        "lns_adaptive_plus_address",
    ));
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.map"));
}

#[test]
fn unsolvable_initial_instance_exits_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("corridor.map");
    fs::write(&map, "type octile\nheight 1\nwidth 3\nmap\n...\n").unwrap();
    let scen = dir.path().join("swap.scen");
    fs::write(
        &scen,
        "version 1\n0\tcorridor.map\t3\t1\t0\t0\t2\t0\t2.00000000\n0\tcorridor.map\t3\t1\t2\t0\t0\t0\t2.00000000\n",
    )
    .unwrap();
    let out = run(&solve_args(s(&map), s(&scen), "2", "address_ts"));
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn single_agent_has_zero_cost() {
    let dir = tempfile::tempdir().unwrap();
    let files = small_benchmark(dir.path(), 1);
    let out = run(&solve_args(s(&files.map), s(&files.scenarios[0]), "1", "address_ts"));
    assert!(out.status.success());
    let line = stdout(&out);
    assert_eq!(field(&line, "final_cost"), 0.0);
    assert_eq!(field(&line, "auc"), 0.0);
}

#[test]
fn k_defaults_to_32() {
    let dir = tempfile::tempdir().unwrap();
    let files = small_benchmark(dir.path(), 1);
    let out_csv = dir.path().join("run.csv");
    let mut args = solve_args(s(&files.map), s(&files.scenarios[0]), "10", "address_ts");
    args.extend(["--out", s(&out_csv)]);
    assert!(run(&args).status.success());
    let rows = rfc4180_parse(&fs::read(&out_csv).unwrap()).unwrap();
    let k = rows[0].iter().position(|h| h == "K").unwrap();
    let n = rows[0].iter().position(|h| h == "N").unwrap();
    assert_eq!(rows[1][k], "32");
    assert_eq!(rows[1][n], "8");
}

#[test]
fn work_clock_traces_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let files = small_benchmark(dir.path(), 1);
    for alg in [
        "address_ts",
        "address_eg",
        "lns_adaptive",
        "lns_adaptive_plus_address",
        "lns_agent_only",
    ] {
        let traces: Vec<Vec<u8>> = (0..2)
            .map(|i| {
                let t = dir.path().join(format!("{alg}-{i}.csv"));
                let mut args = solve_args(s(&files.map), s(&files.scenarios[0]), "20", alg);
                args.extend(["--seed", "7", "--trace", s(&t)]);
                assert!(run(&args).status.success());
                fs::read(&t).unwrap()
            })
            .collect();
        assert_eq!(traces[0], traces[1], "{alg}");
        rfc4180_parse(&traces[0]).unwrap();
    }
}

#[test]
fn one_run_experiment_matches_solve() {
    let dir = tempfile::tempdir().unwrap();
    let files = small_benchmark(dir.path(), 1);
    let spec = dir.path().join("exp.json");
    fs::write(
        &spec,
        format!(
            r#"{{"maps": [{{"map": {:?}, "scenarios": {:?}}}], "agents": [15], "algorithms": ["address_eg"],
                "budgets_s": [0.2], "k_values": [8], "seeds": [3], "clock": "work"}}"#,
            files.map.file_name().unwrap().to_str().unwrap(),
            files.scenarios[0].file_name().unwrap().to_str().unwrap()
        ),
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let exp = run(&["experiment", "--spec", s(&spec), "--out-dir", s(&out_dir), "--quiet"]);
    assert!(exp.status.success(), "{}", String::from_utf8_lossy(&exp.stderr));
    let rows = rfc4180_parse(&fs::read(out_dir.join("runs.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    let col = |name: &str| rows[1][rows[0].iter().position(|h| h == name).unwrap()].clone();

    let mut args = solve_args(s(&files.map), s(&files.scenarios[0]), "15", "address_eg");
    args.extend(["--k", "8", "--seed", "3"]);
    let line = stdout(&run(&args));
    assert_eq!(field(&line, "final_cost"), col("final_cost").parse::<f64>().unwrap());
    assert_eq!(
        field(&line, "initial_cost"),
        col("initial_cost").parse::<f64>().unwrap()
    );
    assert_eq!(field(&line, "iterations"), col("iterations").parse::<f64>().unwrap());
    let auc: f64 = col("auc").parse().unwrap();
    assert!((field(&line, "auc") - auc).abs() <= 1e-9 * auc.max(1.0));
    for f in ["runs.json", "summary.csv", "failures.csv"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
}

#[test]
fn generate_writes_loadable_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "generate",
        "--out-dir",
        s(dir.path()),
        "--name",
        "g",
        "--width",
        "12",
        "--height",
        "10",
        "--scenarios",
        "2",
        "--rows",
        "30",
        "--seed",
        "5",
        "--check-agents",
        "10",
        "--check-orders",
        "3",
        "--check-min",
        "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let listed: Vec<String> = stdout(&out).lines().map(String::from).collect();
    assert_eq!(listed.len(), 3);
    let map = anytime_mapf::io::read_map(&listed[0]).unwrap();
    assert_eq!((map.width(), map.height()), (12, 10));
    assert_eq!(map.num_cells() - map.num_passable(), 24);
    for scen in &listed[1..] {
        assert_eq!(anytime_mapf::io::read_scenario(scen).unwrap().len(), 30);
    }
}
