//! Metropolis chains over a Boltzmann target with any symmetric kernel.

use alloc::vec::Vec;
use rand::Rng;

use crate::error::{Error, Result};
use crate::ising::{magnetization, BoltzmannTarget, SpinConfiguration};
use crate::proposal::ProposalKernel;
use crate::rng::{self, ChaCha8Rng};
use crate::statevector::Statevector;

/// Result of one Metropolis step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    /// `A(x′|x)`, reported whether or not the move was taken.
    pub acceptance: f64,
    pub accepted: bool,
}

/// Current state of one chain with its own generator.
#[derive(Debug, Clone)]
pub struct ChainState {
    current: SpinConfiguration,
    current_energy: f64,
    rng: ChaCha8Rng,
    step_count: u64,
    scratch: Option<Statevector>,
}

impl ChainState {
    pub fn new(target: &BoltzmannTarget, init: SpinConfiguration, seed: u64) -> Result<Self> {
        let n = target.n();
        SpinConfiguration::new(init.index(), n)?;
        Ok(Self {
            current: init,
            current_energy: target.instance().energy(init),
            rng: rng::seeded(seed),
            step_count: 0,
            scratch: None,
        })
    }

    pub fn current(&self) -> SpinConfiguration {
        self.current
    }

    pub fn current_energy(&self) -> f64 {
        self.current_energy
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Proposes with `kernel` and accepts iff `A ≥ u`, `u ~ U[0, 1)`.
    pub fn metropolis_step(
        &mut self,
        kernel: &ProposalKernel,
        target: &BoltzmannTarget,
    ) -> Result<StepOutcome> {
        if !kernel.is_symmetric() {
            return Err(Error::NonSymmetricKernel);
        }
        if kernel.n() != target.n() {
            return Err(Error::SizeMismatch {
                expected: target.n(),
                found: kernel.n(),
            });
        }
        if self.scratch.is_none() {
            self.scratch = kernel.scratch();
        }
        let proposal = kernel.propose_with(self.current, &mut self.rng, self.scratch.as_mut())?;
        let proposal_energy = target.instance().energy(proposal);
        let acceptance = target.acceptance(self.current_energy, proposal_energy);
        let u: f64 = self.rng.random();
        let accepted = acceptance >= u;
        if accepted {
            self.current = proposal;
            self.current_energy = proposal_energy;
        }
        self.step_count += 1;
        debug_assert!(
            self.step_count % 1000 != 0
                || (self.current_energy - target.instance().energy(self.current)).abs() <= 1e-12
        );
        Ok(StepOutcome {
            acceptance,
            accepted,
        })
    }
}

/// Per-step record of a chain. Entry `t` describes the state after step `t + 1`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChainTrace {
    pub states: Vec<SpinConfiguration>,
    pub accepted: Vec<bool>,
    pub acceptance_probs: Vec<f64>,
    pub magnetizations: Vec<f64>,
    pub energies: Vec<f64>,
}

impl ChainTrace {
    fn with_capacity(steps: usize) -> Self {
        Self {
            states: Vec::with_capacity(steps),
            accepted: Vec::with_capacity(steps),
            acceptance_probs: Vec::with_capacity(steps),
            magnetizations: Vec::with_capacity(steps),
            energies: Vec::with_capacity(steps),
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn acceptance_fraction(&self) -> f64 {
        self.accepted.iter().filter(|&&a| a).count() as f64 / self.len() as f64
    }
}

/// Runs `steps` Metropolis steps from `init`. Fully determined by its inputs.
pub fn run_chain(
    target: &BoltzmannTarget,
    kernel: &ProposalKernel,
    steps: usize,
    init: SpinConfiguration,
    seed: u64,
) -> Result<ChainTrace> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1"));
    }
    let n = target.n();
    let mut chain = ChainState::new(target, init, seed)?;
    let mut trace = ChainTrace::with_capacity(steps);
    for _ in 0..steps {
        let out = chain.metropolis_step(kernel, target)?;
        trace.states.push(chain.current);
        trace.accepted.push(out.accepted);
        trace.acceptance_probs.push(out.acceptance);
        trace.magnetizations.push(magnetization(chain.current, n));
        trace.energies.push(chain.current_energy);
    }
    Ok(trace)
}

/// Uniformly random configuration of `n` spins.
pub fn random_configuration<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SpinConfiguration {
    SpinConfiguration::from_index(rng.random_range(0..1usize << n))
}

/// On-line acceptance-rate estimator `AR ≈ (1/M) Σ_j A(x⁽ʲ⁺¹⁾|x⁽ʲ⁾)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArEstimator {
    /// `M`, the number of averaged steps.
    pub samples: usize,
    /// Steps discarded before averaging starts.
    pub burn_in: usize,
    /// Average the 0/1 accept indicator instead of `A`.
    pub indicator: bool,
}

impl ArEstimator {
    pub fn new(samples: usize) -> Self {
        Self {
            samples,
            burn_in: 0,
            indicator: false,
        }
    }

    pub fn estimate(
        &self,
        target: &BoltzmannTarget,
        kernel: &ProposalKernel,
        init: SpinConfiguration,
        seed: u64,
    ) -> Result<f64> {
        if self.samples == 0 {
            return Err(Error::InvalidArgument("M must be at least 1"));
        }
        let mut chain = ChainState::new(target, init, seed)?;
        for _ in 0..self.burn_in {
            chain.metropolis_step(kernel, target)?;
        }
        let mut sum = 0.0;
        for _ in 0..self.samples {
            let out = chain.metropolis_step(kernel, target)?;
            sum += if self.indicator {
                f64::from(u8::from(out.accepted))
            } else {
                out.acceptance
            };
        }
        Ok(sum / self.samples as f64)
    }
}

/// [`ArEstimator`] with defaults: average of `A`, no burn-in.
pub fn estimate_ar(
    target: &BoltzmannTarget,
    kernel: &ProposalKernel,
    m: usize,
    init: SpinConfiguration,
    seed: u64,
) -> Result<f64> {
    ArEstimator::new(m).estimate(target, kernel, init, seed)
}

/// Cross-chain statistics of the running magnetization estimate, one entry
/// per step after burn-in.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MagnetizationSeries {
    pub mean: Vec<f64>,
    /// Sample standard deviation across chains (0 for a single chain).
    pub std: Vec<f64>,
    /// `std / sqrt(chains)`.
    pub stderr: Vec<f64>,
}

/// Per chain, the running mean of `m` over steps `burn_in..=t`; then the
/// mean and spread of those running means across chains at each `t`.
pub fn estimate_average_magnetization(
    traces: &[ChainTrace],
    burn_in: usize,
) -> Result<MagnetizationSeries> {
    let first = traces
        .first()
        .ok_or(Error::InvalidArgument("at least one trace is required"))?;
    let steps = first.len();
    if traces.iter().any(|t| t.len() != steps) {
        return Err(Error::InvalidArgument("traces must have equal length"));
    }
    if burn_in >= steps {
        return Err(Error::InvalidArgument("burn-in must be shorter than the chains"));
    }
    let chains = traces.len() as f64;
    let mut running: Vec<f64> = alloc::vec![0.0; traces.len()];
    let mut series = MagnetizationSeries::default();
    for t in burn_in..steps {
        let count = (t - burn_in + 1) as f64;
        for (sum, trace) in running.iter_mut().zip(traces) {
            *sum += trace.magnetizations[t];
        }
        let mean = running.iter().map(|s| s / count).sum::<f64>() / chains;
        let var = if traces.len() > 1 {
            running
                .iter()
                .map(|s| {
                    let d = s / count - mean;
                    d * d
                })
                .sum::<f64>()
                / (chains - 1.0)
        } else {
            0.0
        };
        let std = libm::sqrt(var);
        series.mean.push(mean);
        series.std.push(std);
        series.stderr.push(std / libm::sqrt(chains));
    }
    Ok(series)
}
