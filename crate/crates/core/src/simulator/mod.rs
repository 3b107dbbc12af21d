//! Exposure-agent diffusion.
//!
//! Every node exposed for the first time (and every seed, at step 0) spawns
//! `k` agents, `k ~ Poisson(beta)` or `round(beta)`. Each agent hops once to
//! a uniformly random neighbor, exposes it on behalf of its spawning node,
//! and expires. After `horizon` steps every exposed non-seed node adopts
//! independently with probability `1 - exp(-(s_v + sum of w(v, u)))` over
//! its distinct exposing friends `u`.
//!
//! Run `i` of a Monte Carlo batch draws from the stream
//! [`crate::rng::derive_seed`]`(master_seed, i)`, so results are identical
//! regardless of how runs are scheduled across threads.

mod compare;
mod engine;
mod exact;
mod montecarlo;

pub use compare::{compare, write_compare_csv, CompareRow, ComparisonReport};
pub use engine::{adopt, run, step, AgentState, ExposureEvent, RunOutcome};
pub use exact::{exact_small, ExactDistribution, EXACT_PATH_LIMIT};
pub use montecarlo::{
    monte_carlo, read_empirical_csv, wilson_interval, write_empirical_csv, CurvePoint, EmpiricalCurve,
};

use crate::error::{invalid, Result};

/// Number of agents an exposed node spawns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaModel {
    /// `Poisson(beta)` agents.
    Poisson(f64),
    /// Exactly `round(beta)` agents.
    Deterministic(f64),
}

impl BetaModel {
    pub fn beta(&self) -> f64 {
        match *self {
            BetaModel::Poisson(b) | BetaModel::Deterministic(b) => b,
        }
    }

    fn validate(&self) -> Result<()> {
        let b = self.beta();
        if !(b >= 0.0) || !b.is_finite() {
            return Err(invalid(format!("beta must be finite and >= 0, got {b}")));
        }
        Ok(())
    }
}

/// When local adoption is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdoptionTiming {
    /// Once, after the last step.
    #[default]
    AtHorizon,
    /// After every step, for nodes exposed during that step.
    PerStep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub horizon: u32,
    pub beta_model: BetaModel,
    pub runs: u64,
    pub master_seed: u64,
    pub epsilon_grid: Vec<f64>,
    pub adoption: AdoptionTiming,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(invalid("horizon must be >= 1"));
        }
        if self.runs < 1 {
            return Err(invalid("runs must be >= 1"));
        }
        if let Some(e) = self.epsilon_grid.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
            return Err(invalid(format!("epsilon {e} outside (0, 1]")));
        }
        self.beta_model.validate()
    }
}

/// `count >= epsilon * n`, tolerant to rounding in `epsilon * n`.
pub fn meets_target(count: usize, n: usize, epsilon: f64) -> bool {
    count as f64 >= epsilon * n as f64 - 1e-9
}

/// `max(1, round(fraction * n))` distinct nodes drawn uniformly without
/// replacement, sorted.
pub fn random_seed_set(n: usize, fraction: f64, seed: u64) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(invalid("network has no nodes"));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(invalid(format!("seed fraction must lie in (0, 1], got {fraction}")));
    }
    let k = ((fraction * n as f64).round() as usize).clamp(1, n);
    let mut rng = crate::rng::rng_from_seed(seed);
    let mut picked = rand::seq::index::sample(&mut rng, n, k).into_vec();
    picked.sort_unstable();
    Ok(picked)
}
