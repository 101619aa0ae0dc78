//! Aggregates over sweep rows: per-size means, `2^(−kn)` fits and win
//! fractions.

use std::collections::BTreeMap;

use qaoa_mc_core::fit::{fit_scaling, mean_std};

use crate::error::{HarnessError, Result};
use crate::records::{ExperimentRecord, FitRow, MSweepRecord, SizeSummary, WinFraction};
use crate::spec::Proposal;

/// Groups `(label, n, δ)` triples and summarizes each group, ordered by
/// label then `n`.
pub fn summarize<'a, I>(points: I) -> Vec<SizeSummary>
where
    I: IntoIterator<Item = (&'a str, usize, f64)>,
{
    let mut groups: BTreeMap<(&str, usize), Vec<f64>> = BTreeMap::new();
    for (label, n, delta) in points {
        groups.entry((label, n)).or_default().push(delta);
    }
    groups
        .into_iter()
        .map(|((label, n), deltas)| {
            let (mean, std) = mean_std(&deltas);
            SizeSummary {
                label: label.to_owned(),
                n,
                count: deltas.len(),
                mean_delta: mean,
                std_delta: std,
                stderr_delta: std / (deltas.len() as f64).sqrt(),
            }
        })
        .collect()
}

/// Fits `log₂⟨δ⟩ = −k n + c` per label. `ratio_to_uniform` is filled when a
/// label named `uniform` is present.
pub fn fit_summaries(summaries: &[SizeSummary]) -> Result<Vec<FitRow>> {
    let mut by_label: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for s in summaries {
        by_label
            .entry(s.label.as_str())
            .or_default()
            .push((s.n as f64, s.mean_delta));
    }
    let mut rows = Vec::with_capacity(by_label.len());
    for (label, points) in &by_label {
        let fit = fit_scaling(points)?;
        rows.push(FitRow {
            label: (*label).to_owned(),
            k: fit.k,
            k_uncertainty: fit.k_uncertainty,
            intercept: fit.intercept,
            r_squared: fit.r_squared,
            ratio_to_uniform: None,
            sizes: points.len(),
        });
    }
    if let Some(k_uniform) = rows.iter().find(|r| r.label == Proposal::Uniform.as_str()).map(|r| r.k) {
        for r in &mut rows {
            r.ratio_to_uniform = Some(k_uniform / r.k);
        }
    }
    Ok(rows)
}

pub fn summarize_sweep(records: &[ExperimentRecord]) -> Vec<SizeSummary> {
    summarize(
        records
            .iter()
            .filter_map(|r| r.delta.map(|d| (r.proposal.as_str(), r.n, d))),
    )
}

/// Per-size summaries and per-proposal fits of a spectral sweep.
pub fn fit_sweep(records: &[ExperimentRecord]) -> Result<(Vec<SizeSummary>, Vec<FitRow>)> {
    let summaries = summarize_sweep(records);
    if summaries.is_empty() {
        return Err(HarnessError::NoData("sweep has no rows with a gap".into()));
    }
    let fits = fit_summaries(&summaries)?;
    Ok((summaries, fits))
}

/// Per-size summaries and per-`M` fits of an M-sweep; labels are `M`
/// values.
pub fn fit_m_sweep(records: &[MSweepRecord]) -> Result<(Vec<SizeSummary>, Vec<FitRow>)> {
    let labeled: Vec<(String, usize, f64)> = records
        .iter()
        .filter_map(|r| r.delta.map(|d| (format!("M={}", r.m), r.n, d)))
        .collect();
    let summaries = summarize(labeled.iter().map(|(l, n, d)| (l.as_str(), *n, *d)));
    if summaries.is_empty() {
        return Err(HarnessError::NoData("M-sweep has no rows with a gap".into()));
    }
    let fits = fit_summaries(&summaries)?;
    Ok((summaries, fits))
}

/// Per size, how often the optimized kernel's `δ` strictly exceeds each
/// competitor's. Every instance needs a usable row for all four kernels.
pub fn win_fraction(records: &[ExperimentRecord]) -> Result<Vec<WinFraction>> {
    let mut instances: BTreeMap<(usize, u64), [Option<f64>; 4]> = BTreeMap::new();
    for r in records {
        let slot = Proposal::ALL.iter().position(|&p| p == r.proposal).expect("known proposal");
        instances.entry((r.n, r.instance_seed)).or_insert([None; 4])[slot] = r.delta;
    }
    if instances.is_empty() {
        return Err(HarnessError::NoData("sweep is empty".into()));
    }
    let mut tallies: BTreeMap<usize, [usize; 5]> = BTreeMap::new();
    for (&(n, instance_seed), deltas) in &instances {
        let mut values = [0.0; 4];
        for (slot, (value, proposal)) in values.iter_mut().zip(Proposal::ALL).enumerate() {
            *value = deltas[slot].ok_or_else(|| HarnessError::MissingKernel {
                n,
                instance_seed,
                proposal: proposal.to_string(),
            })?;
        }
        let [opt, random, uniform, local] = values;
        let t = tallies.entry(n).or_default();
        t[0] += 1;
        t[1] += usize::from(opt > uniform);
        t[2] += usize::from(opt > local);
        t[3] += usize::from(opt > random);
        t[4] += usize::from(opt > uniform && opt > local && opt > random);
    }
    Ok(tallies
        .into_iter()
        .map(|(n, t)| {
            let total = t[0] as f64;
            WinFraction {
                n,
                instances: t[0],
                beats_uniform: t[1] as f64 / total,
                beats_local: t[2] as f64 / total,
                beats_random: t[3] as f64 / total,
                beats_all: t[4] as f64 / total,
            }
        })
        .collect())
}
