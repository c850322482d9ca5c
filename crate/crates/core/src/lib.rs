//! Anytime multi-agent path finding on 4-connected grids.
//!
//! An initial solution comes from prioritized planning with random restarts;
//! large neighborhood search then repeatedly replans a small group of agents
//! and keeps the result whenever the sum of delays strictly drops. The
//! `address_*` solvers choose that group around a seed agent drawn from the
//! K most delayed agents by a Beta-Bernoulli bandit.

pub mod bandit;
pub mod conflict;
pub mod destroy;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod generate;
pub mod grid;
pub mod instance;
pub mod io;
pub mod pathfinder;
pub mod plan;
pub mod planner;
pub mod reservation;
pub mod trace;

pub use engine::{solve, Algorithm, ClockKind, Metrics, RunResult, SolverConfig};
pub use error::{Error, Result};
pub use grid::{Cell, GridMap};
pub use instance::{AgentId, Instance};
pub use plan::{Path, Plan};
