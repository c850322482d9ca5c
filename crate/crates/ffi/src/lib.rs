//! C ABI over the anytime MAPF solver.
//!
//! Instances and results are opaque heap handles released with their
//! `*_free` function. Every fallible call returns a `MapfStatus`; on failure
//! `mapf_last_error` yields a message for the calling thread that stays valid
//! until that thread's next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use anytime_mapf::engine::{snapshot_metrics, solve, Algorithm, ClockKind, Metrics, RunResult, SolverConfig};
use anytime_mapf::io::{load_instance, parse_map, parse_scenario_entries, select_agents};
use anytime_mapf::{Error, Instance};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    ParseError = 3,
    NoInitialSolution = 4,
    IoError = 5,
    OutOfRange = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapfAlgorithm {
    AddressTs = 0,
    AddressEg = 1,
    LnsAdaptive = 2,
    LnsAgentOnly = 3,
    LnsAdaptivePlusAddress = 4,
}

impl From<MapfAlgorithm> for Algorithm {
    fn from(a: MapfAlgorithm) -> Self {
        match a {
            MapfAlgorithm::AddressTs => Algorithm::AddressTs,
            MapfAlgorithm::AddressEg => Algorithm::AddressEg,
            MapfAlgorithm::LnsAdaptive => Algorithm::LnsAdaptive,
            MapfAlgorithm::LnsAgentOnly => Algorithm::LnsAgentOnly,
            MapfAlgorithm::LnsAdaptivePlusAddress => Algorithm::LnsAdaptivePlusAddress,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapfClock {
    Wall = 0,
    Work = 1,
}

/// Solver settings; obtain defaults from `mapf_config_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MapfConfig {
    pub algorithm: MapfAlgorithm,
    pub neighborhood_size: usize,
    pub k: usize,
    pub epsilon: f64,
    pub time_budget_s: f64,
    pub seed: u64,
    pub clock: MapfClock,
    pub work_unit_s: f64,
}

impl From<&MapfConfig> for SolverConfig {
    fn from(c: &MapfConfig) -> Self {
        SolverConfig {
            algorithm: c.algorithm.into(),
            neighborhood_size: c.neighborhood_size,
            k: c.k,
            epsilon: c.epsilon,
            time_budget_s: c.time_budget_s,
            seed: c.seed,
            clock: match c.clock {
                MapfClock::Wall => ClockKind::Wall,
                MapfClock::Work => ClockKind::Work,
            },
            work_unit_s: c.work_unit_s,
            ..SolverConfig::default()
        }
    }
}

/// Opaque problem instance.
pub struct MapfInstance {
    inner: Instance,
}

/// Opaque solver outcome.
pub struct MapfResult {
    run: RunResult,
    metrics: Metrics,
    width: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> MapfStatus {
    match e {
        Error::InvalidInput(_) | Error::InvalidPath { .. } => MapfStatus::InvalidInput,
        Error::Parse { .. } | Error::Format { .. } => MapfStatus::ParseError,
        Error::NoInitialSolution { .. } => MapfStatus::NoInitialSolution,
        Error::Io { .. } => MapfStatus::IoError,
    }
}

fn fail(status: MapfStatus, msg: impl Into<String>) -> MapfStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> MapfStatus) -> MapfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(MapfStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, MapfStatus> {
    if p.is_null() {
        return Err(fail(MapfStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: caller passes a NUL-terminated string.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| fail(MapfStatus::InvalidInput, format!("{what} is not UTF-8")))
}

fn finish_instance(res: anytime_mapf::Result<Instance>, out: *mut *mut MapfInstance) -> MapfStatus {
    match res {
        Ok(inner) => {
            // SAFETY: `out` was checked non-null by the caller.
            unsafe { *out = Box::into_raw(Box::new(MapfInstance { inner })) };
            MapfStatus::Ok
        }
        Err(e) => fail(status_of(&e), e.to_string()),
    }
}

/// Writes the library defaults (ADDRESS-TS, N = 8, K = 32, ε = 0.5,
/// 15 s wall-clock budget, seed 0) into `out`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `MapfConfig`.
#[no_mangle]
pub unsafe extern "C" fn mapf_config_default(out: *mut MapfConfig) -> MapfStatus {
    if out.is_null() {
        return fail(MapfStatus::NullPointer, "out is null");
    }
    let d = SolverConfig::default();
    let cfg = MapfConfig {
        algorithm: MapfAlgorithm::AddressTs,
        neighborhood_size: d.neighborhood_size,
        k: d.k,
        epsilon: d.epsilon,
        time_budget_s: d.time_budget_s,
        seed: d.seed,
        clock: MapfClock::Wall,
        work_unit_s: d.work_unit_s,
    };
    // SAFETY: checked non-null above.
    unsafe { out.write(cfg) };
    MapfStatus::Ok
}

/// Builds an instance from Moving-AI map and scenario text, keeping the first
/// `agents` scenario rows.
///
/// # Safety
/// `map_text` and `scen_text` must be NUL-terminated strings; `out` must be
/// writable. On success `*out` owns a handle for `mapf_instance_free`.
#[no_mangle]
pub unsafe extern "C" fn mapf_instance_from_text(
    map_text: *const c_char,
    scen_text: *const c_char,
    agents: usize,
    out: *mut *mut MapfInstance,
) -> MapfStatus {
    guard(|| {
        if out.is_null() {
            return fail(MapfStatus::NullPointer, "out is null");
        }
        let (map_text, scen_text) = match unsafe { (read_str(map_text, "map_text"), read_str(scen_text, "scen_text")) }
        {
            (Ok(m), Ok(s)) => (m, s),
            (Err(e), _) | (_, Err(e)) => return e,
        };
        let res = parse_map(map_text).and_then(|map| {
            let entries = parse_scenario_entries(scen_text)?;
            select_agents(&entries, &map, agents, None)
        });
        finish_instance(res, out)
    })
}

/// Loads an instance from `.map` and `.scen` files.
///
/// # Safety
/// Same contract as `mapf_instance_from_text`, with paths instead of text.
#[no_mangle]
pub unsafe extern "C" fn mapf_instance_from_files(
    map_path: *const c_char,
    scen_path: *const c_char,
    agents: usize,
    out: *mut *mut MapfInstance,
) -> MapfStatus {
    guard(|| {
        if out.is_null() {
            return fail(MapfStatus::NullPointer, "out is null");
        }
        let (map_path, scen_path) = match unsafe { (read_str(map_path, "map_path"), read_str(scen_path, "scen_path")) }
        {
            (Ok(m), Ok(s)) => (m, s),
            (Err(e), _) | (_, Err(e)) => return e,
        };
        finish_instance(load_instance(map_path, scen_path, agents, None), out)
    })
}

/// Number of agents, or 0 for a null handle.
///
/// # Safety
/// `instance` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mapf_instance_num_agents(instance: *const MapfInstance) -> usize {
    // SAFETY: caller guarantees a live handle or null.
    unsafe { instance.as_ref() }.map_or(0, |i| i.inner.num_agents())
}

/// # Safety
/// `instance` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mapf_instance_free(instance: *mut MapfInstance) {
    if !instance.is_null() {
        // SAFETY: handle came from Box::into_raw and is freed once.
        drop(unsafe { Box::from_raw(instance) });
    }
}

/// Runs the configured solver.
///
/// # Safety
/// `instance` must be a live handle, `config` readable, `out` writable. On
/// success `*out` owns a handle for `mapf_result_free`.
#[no_mangle]
pub unsafe extern "C" fn mapf_solve(
    instance: *const MapfInstance,
    config: *const MapfConfig,
    out: *mut *mut MapfResult,
) -> MapfStatus {
    guard(|| {
        // SAFETY: caller guarantees live or null pointers.
        let (Some(inst), Some(cfg)) = (unsafe { instance.as_ref() }, unsafe { config.as_ref() }) else {
            return fail(MapfStatus::NullPointer, "instance or config is null");
        };
        if out.is_null() {
            return fail(MapfStatus::NullPointer, "out is null");
        }
        let config = SolverConfig::from(cfg);
        let res =
            solve(&inst.inner, &config).and_then(|run| snapshot_metrics(&run, config.time_budget_s).map(|m| (run, m)));
        match res {
            Ok((run, metrics)) => {
                // SAFETY: checked non-null above.
                unsafe {
                    *out = Box::into_raw(Box::new(MapfResult {
                        run,
                        metrics,
                        width: inst.inner.map().width(),
                    }))
                };
                MapfStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

fn with_result<T>(result: *const MapfResult, default: T, f: impl FnOnce(&MapfResult) -> T) -> T {
    // SAFETY: callers document that `result` is null or live.
    unsafe { result.as_ref() }.map_or(default, f)
}

/// Sum of delays of the returned plan, or `SIZE_MAX` for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mapf_result_final_cost(result: *const MapfResult) -> usize {
    with_result(result, usize::MAX, |r| r.metrics.final_cost)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mapf_result_initial_cost(result: *const MapfResult) -> usize {
    with_result(result, usize::MAX, |r| r.metrics.initial_cost)
}

/// Area under the best-cost curve up to the budget, or NaN for null.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mapf_result_auc(result: *const MapfResult) -> f64 {
    with_result(result, f64::NAN, |r| r.metrics.auc)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mapf_result_iterations(result: *const MapfResult) -> u64 {
    with_result(result, 0, |r| r.metrics.iterations)
}

/// Number of trace rows, including the closing row.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mapf_result_trace_len(result: *const MapfResult) -> usize {
    with_result(result, 0, |r| r.run.trace.entries().len())
}

/// Reads trace row `index`.
///
/// # Safety
/// `result` must be a live handle; `time_s` and `cost` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mapf_result_trace_entry(
    result: *const MapfResult,
    index: usize,
    time_s: *mut f64,
    cost: *mut usize,
) -> MapfStatus {
    if result.is_null() || time_s.is_null() || cost.is_null() {
        return fail(MapfStatus::NullPointer, "null argument");
    }
    with_result(result, MapfStatus::NullPointer, |r| {
        match r.run.trace.entries().get(index) {
            Some(e) => {
                // SAFETY: both checked non-null above.
                unsafe {
                    time_s.write(e.time_s);
                    cost.write(e.cost);
                }
                MapfStatus::Ok
            }
            None => fail(MapfStatus::OutOfRange, format!("trace index {index} out of range")),
        }
    })
}

/// Number of cells in `agent`'s path (steps + 1), or 0 if out of range.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mapf_result_path_len(result: *const MapfResult, agent: usize) -> usize {
    with_result(result, 0, |r| {
        r.run.plan.paths().get(agent).map_or(0, |p| p.cells.len())
    })
}

/// Writes the column `x` and row `y` of `agent` at time `t`; positions after
/// the path ends are the goal.
///
/// # Safety
/// `result` must be a live handle; `x` and `y` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mapf_result_position(
    result: *const MapfResult,
    agent: usize,
    t: usize,
    x: *mut usize,
    y: *mut usize,
) -> MapfStatus {
    if result.is_null() || x.is_null() || y.is_null() {
        return fail(MapfStatus::NullPointer, "null argument");
    }
    with_result(result, MapfStatus::NullPointer, |r| {
        match r.run.plan.paths().get(agent) {
            Some(p) => {
                let cell = p.at(t);
                let (cx, cy) = (cell.index() % r.width, cell.index() / r.width);
                // SAFETY: both checked non-null above.
                unsafe {
                    x.write(cx);
                    y.write(cy);
                }
                MapfStatus::Ok
            }
            None => fail(MapfStatus::OutOfRange, format!("agent {agent} out of range")),
        }
    })
}

/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mapf_result_free(result: *mut MapfResult) {
    if !result.is_null() {
        // SAFETY: handle came from Box::into_raw and is freed once.
        drop(unsafe { Box::from_raw(result) });
    }
}

/// Message of the calling thread's most recent failure, or null if none.
#[no_mangle]
pub extern "C" fn mapf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
