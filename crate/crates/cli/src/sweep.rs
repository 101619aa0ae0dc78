//! Spectral-gap sweeps over many instances.

use std::sync::Arc;
use std::time::Instant;

use qaoa_mc_core::optimize::find_theta_star;
use qaoa_mc_core::proposal::MATRIX_CAP;
use qaoa_mc_core::rng::derive_seed;
use qaoa_mc_core::spectral::{absolute_spectral_gap, exact_ar, symmetrize};
use qaoa_mc_core::{
    BoltzmannTarget, Error, ExactTarget, PhaseTable, ProposalKernel, QaoaParameters, SampledSeeds,
    SearchMode, SpinGlassInstance, ThetaSearchConfig,
};
use rayon::prelude::*;

use crate::error::Result;
use crate::kernels::{build_kernel, phase_table, CircuitSettings};
use crate::records::{ExperimentRecord, MSweepRecord, SampleBudget, STATUS_DEGENERATE, STATUS_OK};
use crate::spec::{stream, Proposal, SweepSpec};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Record wall-clock seconds per row. Off by default so outputs are
    /// reproducible byte for byte.
    pub timing: bool,
    /// Seeding of sampled AR evaluations in θ searches.
    pub seeds: SampledSeeds,
}

/// The instances named by `spec`, in sweep order.
pub fn generate_instances(spec: &SweepSpec) -> Result<Vec<SpinGlassInstance>> {
    spec.instance_seeds()
        .into_iter()
        .map(|(n, seed)| Ok(SpinGlassInstance::generate(n, seed)?))
        .collect()
}

/// `δ` and exact AR of `kernel` on the enumerated target.
pub fn kernel_metrics(exact: &ExactTarget, kernel: &ProposalKernel) -> Result<(f64, f64)> {
    let q = kernel.exact_q_matrix()?;
    let delta = absolute_spectral_gap(&symmetrize(exact, &q)?)?;
    Ok((delta, exact_ar(exact, &q)?))
}

/// One row per (instance, proposal) in input order. Instances run in
/// parallel on the current rayon pool; a failing instance yields error rows
/// and the sweep carries on.
pub fn spectral_sweep(
    spec: &SweepSpec,
    instances: &[SpinGlassInstance],
    options: RunOptions,
) -> Result<Vec<ExperimentRecord>> {
    spec.validate()?;
    let rows: Vec<Vec<ExperimentRecord>> = instances
        .par_iter()
        .map(|inst| sweep_instance(spec, inst, options))
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

fn sweep_instance(spec: &SweepSpec, inst: &SpinGlassInstance, options: RunOptions) -> Vec<ExperimentRecord> {
    let prepared = prepare(inst, spec.temperature);
    spec.proposals
        .iter()
        .map(|&proposal| {
            let start = Instant::now();
            let mut row = ExperimentRecord {
                n: inst.n(),
                instance_seed: inst.seed(),
                proposal,
                theta: None,
                delta: None,
                exact_ar: None,
                theta_star: None,
                boundary: None,
                wall_time: None,
                status: String::new(),
            };
            let outcome = prepared.as_ref().map_err(Clone::clone).and_then(|(target, exact, table)| {
                let settings = CircuitSettings::exact(inst, spec.p, spec.theta_max);
                let built = build_kernel(proposal, target, table, &settings).map_err(|e| e.to_string())?;
                let (delta, ar) = kernel_metrics(exact, &built.kernel).map_err(|e| e.to_string())?;
                Ok((built, delta, ar))
            });
            match outcome {
                Ok((built, delta, ar)) => {
                    row.theta = built.theta;
                    row.delta = Some(delta);
                    row.exact_ar = Some(ar);
                    if proposal == Proposal::Optimized {
                        row.theta_star = built.search.as_ref().map(|s| s.theta_star);
                        row.boundary = built.search.as_ref().map(|s| s.boundary);
                    }
                    row.status = built.status.to_owned();
                }
                Err(msg) => row.status = format!("error: {msg}"),
            }
            if options.timing {
                row.wall_time = Some(start.elapsed().as_secs_f64());
            }
            row
        })
        .collect()
}

type Prepared = (BoltzmannTarget, ExactTarget, Arc<PhaseTable>);

fn prepare(inst: &SpinGlassInstance, temperature: f64) -> Result<Prepared, String> {
    let run = || -> Result<Prepared> {
        let target = BoltzmannTarget::new(inst.clone(), temperature)?;
        let exact = target.enumerate_with_cap(MATRIX_CAP)?;
        let table = phase_table(inst)?;
        Ok((target, exact, table))
    };
    run().map_err(|e| e.to_string())
}

/// Re-optimizes θ for every instance at each sample budget `M` (sampled
/// search for finite `M`, exact search for `∞`) and records `δ` at the
/// resulting θ*. All budgets see the same instances.
pub fn m_sweep(
    spec: &SweepSpec,
    instances: &[SpinGlassInstance],
    budgets: &[SampleBudget],
    options: RunOptions,
) -> Result<Vec<MSweepRecord>> {
    spec.validate()?;
    let rows: Vec<Vec<MSweepRecord>> = instances
        .par_iter()
        .map(|inst| {
            let prepared = prepare(inst, spec.temperature);
            budgets
                .iter()
                .map(|&m| m_sweep_row(spec, inst, &prepared, m, options))
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// Search mode used for budget `m` on an instance.
pub fn search_mode(instance_seed: u64, m: SampleBudget) -> SearchMode {
    match m {
        SampleBudget::Infinite => SearchMode::Exact,
        SampleBudget::Finite(samples) => SearchMode::Sampled {
            samples,
            seed: derive_seed(derive_seed(instance_seed, stream::SAMPLED_SEARCH), samples as u64),
        },
    }
}

fn m_sweep_row(
    spec: &SweepSpec,
    inst: &SpinGlassInstance,
    prepared: &Result<Prepared, String>,
    m: SampleBudget,
    options: RunOptions,
) -> MSweepRecord {
    let start = Instant::now();
    let mut row = MSweepRecord {
        n: inst.n(),
        instance_seed: inst.seed(),
        m,
        theta_star: None,
        ar_at_star: None,
        delta: None,
        exact_ar: None,
        boundary: None,
        evaluations: None,
        wall_time: None,
        status: String::new(),
    };
    let outcome = prepared.as_ref().map_err(Clone::clone).and_then(|(target, exact, table)| {
        let run = || -> Result<_> {
            let config = ThetaSearchConfig::new(spec.p, search_mode(inst.seed(), m))
                .with_theta_max(spec.theta_max)
                .with_seeds(options.seeds);
            let (theta, found, status) = match find_theta_star(target, &config) {
                Ok(found) => (found.theta_star, Some(found), STATUS_OK),
                Err(Error::DegenerateLandscape { theta_max }) => (0.5 * theta_max, None, STATUS_DEGENERATE),
                Err(e) => return Err(e.into()),
            };
            let kernel = ProposalKernel::with_table(inst.n(), table.clone(), QaoaParameters::single(spec.p, theta)?)?;
            let (delta, ar) = kernel_metrics(exact, &kernel)?;
            Ok((theta, found, status, delta, ar))
        };
        run().map_err(|e| e.to_string())
    });
    match outcome {
        Ok((theta, found, status, delta, ar)) => {
            row.theta_star = Some(theta);
            row.ar_at_star = found.as_ref().map(|f| f.ar_at_star);
            row.boundary = found.as_ref().map(|f| f.boundary);
            row.evaluations = found.as_ref().map(|f| f.evaluations);
            row.delta = Some(delta);
            row.exact_ar = Some(ar);
            row.status = status.to_owned();
        }
        Err(msg) => row.status = format!("error: {msg}"),
    }
    if options.timing {
        row.wall_time = Some(start.elapsed().as_secs_f64());
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> SweepSpec {
        SweepSpec {
            sizes: vec![3, 4],
            instances_per_size: 2,
            ..SweepSpec::default()
        }
    }

    #[test]
    fn one_row_per_instance_and_proposal_in_order() {
        let spec = small_spec();
        let instances = generate_instances(&spec).unwrap();
        let rows = spectral_sweep(&spec, &instances, RunOptions::default()).unwrap();
        assert_eq!(rows.len(), 4 * 4);
        for (chunk, inst) in rows.chunks(4).zip(&instances) {
            let kinds: Vec<Proposal> = chunk.iter().map(|r| r.proposal).collect();
            assert_eq!(kinds, Proposal::ALL);
            assert!(chunk.iter().all(|r| r.instance_seed == inst.seed() && r.status == STATUS_OK));
            assert!(chunk.iter().all(|r| (0.0..=1.0).contains(&r.delta.unwrap())));
        }
    }

    #[test]
    fn degenerate_instance_is_flagged_not_fatal() {
        let spec = small_spec();
        let mut instances = generate_instances(&spec).unwrap();
        instances.insert(1, SpinGlassInstance::zero(3).unwrap());
        let rows = spectral_sweep(&spec, &instances, RunOptions::default()).unwrap();
        assert_eq!(rows.len(), 5 * 4);
        let opt = &rows[4];
        assert_eq!(opt.proposal, Proposal::Optimized);
        assert_eq!(opt.status, STATUS_DEGENERATE);
        assert_eq!(opt.theta, Some(0.15));
        // Zero instance: P = Q, so the uniform kernel mixes in one step.
        assert!((rows[6].delta.unwrap() - 1.0).abs() < 1e-12);
        assert!((rows[6].exact_ar.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infinite_budget_matches_spectral_sweep() {
        let spec = SweepSpec {
            proposals: vec![Proposal::Optimized],
            ..small_spec()
        };
        let instances = generate_instances(&spec).unwrap();
        let sweep = spectral_sweep(&spec, &instances, RunOptions::default()).unwrap();
        let ms = m_sweep(&spec, &instances, &[SampleBudget::Infinite], RunOptions::default()).unwrap();
        for (a, b) in sweep.iter().zip(&ms) {
            assert_eq!(a.theta_star, b.theta_star);
            assert_eq!(a.delta, b.delta);
        }
    }
}
