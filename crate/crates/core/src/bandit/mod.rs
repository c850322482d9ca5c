//! Bandit primitives used for seed-agent and destroy-heuristic selection.

mod beta;
mod roulette;

pub use beta::{sample_beta, sample_gamma, select_eps_greedy, select_thompson, BetaParams};
pub use roulette::{SelectionWeights, DEFAULT_REACTION, DEFAULT_WEIGHT_FLOOR};
