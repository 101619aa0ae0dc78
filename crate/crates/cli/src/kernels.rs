//! Building the compared kernels for one instance.

use std::sync::Arc;

use qaoa_mc_core::optimize::find_theta_star;
use qaoa_mc_core::rng::derive_seed;
use qaoa_mc_core::{
    BoltzmannTarget, Error, OptimizedTheta, PhaseTable, ProposalKernel, QaoaParameters,
    SampledSeeds, SearchMode, SpinGlassInstance, ThetaSearchConfig,
};

use crate::error::Result;
use crate::records::{STATUS_DEGENERATE, STATUS_OK};
use crate::spec::{stream, Proposal};

/// Phase table of the instance; all zeros when the instance has no
/// couplings or fields (`α` is undefined but `α E ≡ 0` for any `α`).
pub fn phase_table(instance: &SpinGlassInstance) -> Result<Arc<PhaseTable>> {
    let table = if instance.is_degenerate() {
        PhaseTable::from_entries(vec![0.0; instance.num_states()])?
    } else {
        PhaseTable::new(instance)?
    };
    Ok(Arc::new(table))
}

/// How the optimized kernel gets its angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaChoice {
    Fixed(f64),
    Search(SearchMode),
}

/// Shared settings for building circuit kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitSettings {
    pub p: usize,
    pub theta_max: f64,
    pub choice: ThetaChoice,
    /// Seed for the random-θ draw.
    pub random_seed: u64,
    pub seeds: SampledSeeds,
}

impl CircuitSettings {
    /// Exact search on `(0, θ_max]` and a random θ seeded from the
    /// instance.
    pub fn exact(instance: &SpinGlassInstance, p: usize, theta_max: f64) -> Self {
        Self {
            p,
            theta_max,
            choice: ThetaChoice::Search(SearchMode::Exact),
            random_seed: derive_seed(instance.seed(), stream::RANDOM_THETA),
            seeds: SampledSeeds::PerEvaluation,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BuiltKernel {
    pub kernel: ProposalKernel,
    pub theta: Option<f64>,
    pub search: Option<OptimizedTheta>,
    pub status: &'static str,
}

pub fn build_kernel(
    proposal: Proposal,
    target: &BoltzmannTarget,
    table: &Arc<PhaseTable>,
    settings: &CircuitSettings,
) -> Result<BuiltKernel> {
    let n = target.n();
    let plain = |kernel: ProposalKernel| BuiltKernel {
        theta: kernel.theta(),
        kernel,
        search: None,
        status: STATUS_OK,
    };
    Ok(match proposal {
        Proposal::Uniform => plain(ProposalKernel::uniform(n)?),
        Proposal::Local => plain(ProposalKernel::local(n)?),
        Proposal::Random => plain(ProposalKernel::random_theta_with_table(
            n,
            table.clone(),
            settings.p,
            settings.random_seed,
        )?),
        Proposal::Optimized => {
            let (theta, search, status) = match settings.choice {
                ThetaChoice::Fixed(theta) => (theta, None, STATUS_OK),
                ThetaChoice::Search(mode) => {
                    let config = ThetaSearchConfig::new(settings.p, mode)
                        .with_theta_max(settings.theta_max)
                        .with_seeds(settings.seeds);
                    match find_theta_star(target, &config) {
                        Ok(found) => (found.theta_star, Some(found), STATUS_OK),
                        Err(Error::DegenerateLandscape { theta_max }) => {
                            (0.5 * theta_max, None, STATUS_DEGENERATE)
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
            };
            let params = QaoaParameters::single(settings.p, theta)?;
            BuiltKernel {
                kernel: ProposalKernel::with_table(n, table.clone(), params)?,
                theta: Some(theta),
                search,
                status,
            }
        }
    })
}
