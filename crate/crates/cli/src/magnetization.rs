//! Running estimates of the average magnetization from several chains per
//! kernel, against the exact enumeration value.

use qaoa_mc_core::mcmc::{estimate_average_magnetization, run_chain, MagnetizationSeries};
use qaoa_mc_core::rng::derive_seed;
use qaoa_mc_core::{BoltzmannTarget, ChainTrace, SampledSeeds, SearchMode, SpinGlassInstance};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{chain_seed, initial_state};
use crate::error::{HarnessError, Result};
use crate::kernels::{build_kernel, phase_table, CircuitSettings, ThetaChoice};
use crate::records::MagnetizationRow;
use crate::spec::{stream, Proposal};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MagnetizationSpec {
    pub temperature: f64,
    /// Chain length `M` behind each AR estimate in the θ* search.
    pub samples: usize,
    pub chains: usize,
    pub steps: usize,
    pub burn_in: usize,
    pub p: usize,
    pub theta_max: f64,
    pub proposals: Vec<Proposal>,
    /// Common random numbers across AR evaluations in the θ* search.
    pub common_seeds: bool,
}

impl Default for MagnetizationSpec {
    fn default() -> Self {
        Self {
            temperature: 1.0,
            samples: 1000,
            chains: 10,
            steps: 1000,
            burn_in: 0,
            p: 5,
            theta_max: 0.3,
            proposals: Proposal::ALL.to_vec(),
            common_seeds: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelRun {
    pub proposal: Proposal,
    pub theta: Option<f64>,
    pub status: &'static str,
    pub series: MagnetizationSeries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MagnetizationRun {
    pub exact: f64,
    pub burn_in: usize,
    pub runs: Vec<KernelRun>,
}

impl MagnetizationRun {
    /// Cross-chain mean and standard error after the last step.
    pub fn final_estimate(&self, proposal: Proposal) -> Option<(f64, f64)> {
        let run = self.runs.iter().find(|r| r.proposal == proposal)?;
        Some((*run.series.mean.last()?, *run.series.stderr.last()?))
    }

    /// Rows ordered by proposal, then step.
    pub fn rows(&self) -> Vec<MagnetizationRow> {
        self.runs
            .iter()
            .flat_map(|run| {
                (0..run.series.mean.len()).map(move |t| MagnetizationRow {
                    step: self.burn_in + t + 1,
                    proposal: run.proposal,
                    theta: run.theta,
                    mean: run.series.mean[t],
                    std: run.series.std[t],
                    stderr: run.series.stderr[t],
                    exact: self.exact,
                })
            })
            .collect()
    }
}

/// Runs every requested kernel with the same chain seeds, so chain `c` of
/// each kernel starts from the same random state. The optimized kernel's θ
/// comes from a sampled search with `spec.samples` steps per evaluation.
pub fn magnetization(
    instance: &SpinGlassInstance,
    spec: &MagnetizationSpec,
    master_seed: u64,
) -> Result<MagnetizationRun> {
    if spec.chains == 0 || spec.steps == 0 || spec.samples == 0 || spec.proposals.is_empty() {
        return Err(HarnessError::InvalidSpec(
            "chains, steps, samples and proposals must be non-empty".into(),
        ));
    }
    let target = BoltzmannTarget::new(instance.clone(), spec.temperature)?;
    let exact = target.enumerate()?.average_magnetization();
    let table = phase_table(instance)?;
    let settings = CircuitSettings {
        p: spec.p,
        theta_max: spec.theta_max,
        choice: ThetaChoice::Search(SearchMode::Sampled {
            samples: spec.samples,
            seed: derive_seed(master_seed, stream::SAMPLED_SEARCH),
        }),
        random_seed: derive_seed(master_seed, stream::RANDOM_THETA),
        seeds: if spec.common_seeds {
            SampledSeeds::Common
        } else {
            SampledSeeds::PerEvaluation
        },
    };
    let chains_master = derive_seed(master_seed, stream::CHAINS);
    let runs = spec
        .proposals
        .iter()
        .map(|&proposal| {
            let built = build_kernel(proposal, &target, &table, &settings)?;
            let traces: Vec<ChainTrace> = (0..spec.chains)
                .into_par_iter()
                .map(|c| {
                    let seed = chain_seed(chains_master, c);
                    let init = initial_state(instance.n(), seed);
                    run_chain(&target, &built.kernel, spec.steps, init, derive_seed(seed, 1))
                })
                .collect::<Result<_, _>>()?;
            Ok(KernelRun {
                proposal,
                theta: built.theta,
                status: built.status,
                series: estimate_average_magnetization(&traces, spec.burn_in)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MagnetizationRun {
        exact,
        burn_in: spec.burn_in,
        runs,
    })
}
