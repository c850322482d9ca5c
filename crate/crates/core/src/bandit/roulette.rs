use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default reaction factor of the weight update.
pub const DEFAULT_REACTION: f64 = 0.1;
/// Lower bound that keeps every heuristic selectable.
pub const DEFAULT_WEIGHT_FLOOR: f64 = 1e-2;

/// Roulette-wheel weights over destroy heuristics with exponential smoothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionWeights {
    weights: Vec<f64>,
    reaction: f64,
    floor: f64,
}

impl SelectionWeights {
    /// `arms` weights of 1.0.
    pub fn new(arms: usize, reaction: f64, floor: f64) -> Result<Self> {
        if arms == 0 {
            return Err(Error::InvalidInput("at least one arm is required".into()));
        }
        if !(reaction > 0.0 && reaction < 1.0) {
            return Err(Error::InvalidInput(format!(
                "reaction factor must lie in (0, 1), got {reaction}"
            )));
        }
        if !(floor > 0.0 && floor.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "weight floor must be positive, got {floor}"
            )));
        }
        Ok(Self {
            weights: vec![1.0; arms],
            reaction,
            floor,
        })
    }

    pub fn with_defaults(arms: usize) -> Self {
        Self::new(arms, DEFAULT_REACTION, DEFAULT_WEIGHT_FLOOR).expect("valid defaults")
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn reaction(&self) -> f64 {
        self.reaction
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Normalized weights.
    pub fn shares(&self) -> Vec<f64> {
        let total: f64 = self.weights.iter().sum();
        self.weights.iter().map(|w| w / total).collect()
    }

    /// Picks arm `j` with probability `w_j / sum(w)`.
    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total: f64 = self.weights.iter().sum();
        let mut x = rng.random::<f64>() * total;
        for (i, &w) in self.weights.iter().enumerate() {
            if x < w {
                return i;
            }
            x -= w;
        }
        self.weights.len() - 1
    }

    /// `w <- reaction * max(improvement, 0) + (1 - reaction) * w`, floored.
    pub fn update(&mut self, arm: usize, improvement: f64) {
        let w = &mut self.weights[arm];
        *w = self.reaction * improvement.max(0.0) + (1.0 - self.reaction) * *w;
        if *w < self.floor {
            *w = self.floor;
        }
    }
}
