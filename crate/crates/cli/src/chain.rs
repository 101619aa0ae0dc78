//! Plain chain runs written as traces.

use qaoa_mc_core::mcmc::{random_configuration, run_chain};
use qaoa_mc_core::rng::{derive_seed, seeded};
use qaoa_mc_core::{BoltzmannTarget, ProposalKernel, SpinConfiguration};
use rayon::prelude::*;

use crate::error::Result;
use crate::records::TraceRow;

/// Seed of chain `chain_id` under `master`; the initial state and the chain
/// generator are derived from it.
pub fn chain_seed(master: u64, chain_id: usize) -> u64 {
    derive_seed(master, chain_id as u64)
}

/// Uniformly random initial state of a chain.
pub fn initial_state(n: usize, chain_seed: u64) -> SpinConfiguration {
    random_configuration(n, &mut seeded(derive_seed(chain_seed, 0)))
}

/// Runs `chains` chains of `steps` steps each, chain-major. Each chain
/// starts from `init` or, if `None`, a random state.
pub fn run_chains(
    target: &BoltzmannTarget,
    kernel: &ProposalKernel,
    steps: usize,
    chains: usize,
    init: Option<SpinConfiguration>,
    master_seed: u64,
) -> Result<Vec<TraceRow>> {
    let per_chain: Vec<Vec<TraceRow>> = (0..chains)
        .into_par_iter()
        .map(|chain_id| {
            let seed = chain_seed(master_seed, chain_id);
            let start = init.unwrap_or_else(|| initial_state(target.n(), seed));
            let trace = run_chain(target, kernel, steps, start, derive_seed(seed, 1))?;
            Ok((0..trace.len())
                .map(|t| TraceRow {
                    step: t + 1,
                    state_index: trace.states[t].index(),
                    energy: trace.energies[t],
                    magnetization: trace.magnetizations[t],
                    acceptance_prob: trace.acceptance_probs[t],
                    accepted: trace.accepted[t],
                    chain_id,
                    seed,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_chain.into_iter().flatten().collect())
}
