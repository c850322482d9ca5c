use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::AgentId;

/// Gamma(shape, 1) draw by Marsaglia and Tsang's squeeze method, with the
/// usual `U^(1/shape)` boost for shapes below one.
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        let u: f64 = rng.random();
        return sample_gamma(shape + 1.0, rng) * u.powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u: f64 = rng.random();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Draw from Beta(alpha, beta) as `X / (X + Y)` with independent Gamma draws.
pub fn sample_beta<R: Rng + ?Sized>(alpha: f64, beta: f64, rng: &mut R) -> Result<f64> {
    if !(alpha.is_finite() && beta.is_finite() && alpha > 0.0 && beta > 0.0) {
        return Err(Error::InvalidInput(format!(
            "Beta parameters must be positive and finite, got ({alpha}, {beta})"
        )));
    }
    let x = sample_gamma(alpha, rng);
    let y = sample_gamma(beta, rng);
    let q = x / (x + y);
    Ok(q.clamp(f64::MIN_POSITIVE, 1.0f64.next_down()))
}

/// Per-agent Beta posterior counters, all starting at `(1, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaParams {
    alpha: Vec<u64>,
    beta: Vec<u64>,
}

impl BetaParams {
    pub fn new(num_agents: usize) -> Self {
        Self {
            alpha: vec![1; num_agents],
            beta: vec![1; num_agents],
        }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn alpha(&self, agent: AgentId) -> u64 {
        self.alpha[agent]
    }

    pub fn beta(&self, agent: AgentId) -> u64 {
        self.beta[agent]
    }

    /// Posterior mean `alpha / (alpha + beta)`.
    pub fn mean(&self, agent: AgentId) -> f64 {
        let a = self.alpha[agent] as f64;
        a / (a + self.beta[agent] as f64)
    }

    /// Success increments alpha, failure increments beta.
    pub fn update(&mut self, agent: AgentId, success: bool) {
        if success {
            self.alpha[agent] += 1;
        } else {
            self.beta[agent] += 1;
        }
    }

    /// Sets both counters directly; useful for priors and tests.
    pub fn set(&mut self, agent: AgentId, alpha: u64, beta: u64) -> Result<()> {
        if alpha == 0 || beta == 0 {
            return Err(Error::InvalidInput("Beta counters must be at least 1".into()));
        }
        self.alpha[agent] = alpha;
        self.beta[agent] = beta;
        Ok(())
    }

    pub fn total_successes(&self) -> u64 {
        self.alpha.iter().map(|a| a - 1).sum()
    }

    pub fn total_failures(&self) -> u64 {
        self.beta.iter().map(|b| b - 1).sum()
    }

    fn check(&self, candidates: &[AgentId]) -> Result<()> {
        if candidates.is_empty() {
            return Err(Error::InvalidInput("no candidate agents".into()));
        }
        if let Some(&bad) = candidates.iter().find(|&&c| c >= self.len()) {
            return Err(Error::InvalidInput(format!("unknown agent {bad}")));
        }
        Ok(())
    }
}

/// Thompson Sampling restricted to `candidates`: one posterior draw per
/// candidate, highest draw wins, ties go to the earlier candidate.
pub fn select_thompson<R: Rng + ?Sized>(params: &BetaParams, candidates: &[AgentId], rng: &mut R) -> Result<AgentId> {
    params.check(candidates)?;
    let mut best = candidates[0];
    let mut best_q = f64::NEG_INFINITY;
    for &c in candidates {
        let q = sample_beta(params.alpha[c] as f64, params.beta[c] as f64, rng)?;
        if q > best_q {
            best_q = q;
            best = c;
        }
    }
    Ok(best)
}

/// ε-greedy over `candidates`: uniform with probability `epsilon`, otherwise
/// the highest posterior mean (ties to the earlier candidate).
pub fn select_eps_greedy<R: Rng + ?Sized>(
    params: &BetaParams,
    candidates: &[AgentId],
    epsilon: f64,
    rng: &mut R,
) -> Result<AgentId> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidInput(format!(
            "epsilon must lie in [0, 1], got {epsilon}"
        )));
    }
    params.check(candidates)?;
    if rng.random::<f64>() < epsilon {
        return Ok(candidates[rng.random_range(0..candidates.len())]);
    }
    let mut best = candidates[0];
    let mut best_mean = params.mean(best);
    for &c in &candidates[1..] {
        let m = params.mean(c);
        if m > best_mean {
            best_mean = m;
            best = c;
        }
    }
    Ok(best)
}
