//! Sweep configuration and seed derivation.

use std::fmt;

use qaoa_mc_core::proposal::MATRIX_CAP;
use qaoa_mc_core::rng::derive_seed;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Kernels compared by the sweeps.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum Proposal {
    /// Single-parameter circuit at θ* (or at `--theta` where accepted).
    #[value(alias = "qaoa")]
    Optimized,
    /// Single-parameter circuit at a θ frozen from `U[0, 2π]`.
    Random,
    Uniform,
    /// Single random spin flip.
    Local,
}

impl Proposal {
    pub const ALL: [Proposal; 4] = [Self::Optimized, Self::Random, Self::Uniform, Self::Local];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Optimized => "optimized",
            Self::Random => "random",
            Self::Uniform => "uniform",
            Self::Local => "local",
        }
    }
}

impl fmt::Display for Proposal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What to sweep over. Loaded from `--config` JSON; missing fields take the
/// desk-scale defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub sizes: Vec<usize>,
    pub instances_per_size: usize,
    pub temperature: f64,
    pub p: usize,
    pub theta_max: f64,
    pub proposals: Vec<Proposal>,
    pub master_seed: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            sizes: (3..=8).collect(),
            instances_per_size: 50,
            temperature: 0.1,
            p: 5,
            theta_max: 0.3,
            proposals: Proposal::ALL.to_vec(),
            master_seed: 0,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(HarnessError::InvalidSpec(msg.to_owned()));
        if self.sizes.is_empty() {
            return bad("sizes must not be empty");
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n == 0 || n > MATRIX_CAP) {
            return Err(HarnessError::InvalidSpec(format!(
                "size {n} outside 1..={MATRIX_CAP}"
            )));
        }
        if self.instances_per_size == 0 {
            return bad("instances_per_size must be positive");
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return bad("temperature must be positive");
        }
        if self.p == 0 {
            return bad("p must be at least 1");
        }
        if !(self.theta_max > 0.0 && self.theta_max.is_finite()) {
            return bad("theta_max must be positive");
        }
        if self.proposals.is_empty() {
            return bad("proposals must not be empty");
        }
        Ok(())
    }

    /// `(n, instance_seed)` for every instance, ordered by `n` then index.
    pub fn instance_seeds(&self) -> Vec<(usize, u64)> {
        self.sizes
            .iter()
            .flat_map(|&n| {
                (0..self.instances_per_size).map(move |i| (n, instance_seed(self.master_seed, n, i)))
            })
            .collect()
    }
}

/// Seed of instance `index` of size `n` under `master`.
pub fn instance_seed(master: u64, n: usize, index: usize) -> u64 {
    derive_seed(derive_seed(master, n as u64), index as u64)
}

/// Sub-stream tags for seeds derived from an instance seed.
pub mod stream {
    pub const RANDOM_THETA: u64 = 0x52;
    pub const SAMPLED_SEARCH: u64 = 0x53;
    pub const CHAINS: u64 = 0x43;
}
