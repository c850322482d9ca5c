//! Benchmark file parsing and result serialization.

mod movingai;
pub(crate) mod results;

pub use movingai::{
    load_instance, map_to_text, parse_map, parse_scenario, parse_scenario_entries, read_map, read_scenario,
    scenario_to_text, select_agents, ScenarioEntry,
};
pub use results::{read_results_json, write_results, write_trace, OutputFormat, RunRecord};
