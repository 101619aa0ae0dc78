//! θ* across instance sizes and circuit depths.

use std::collections::BTreeMap;

use qaoa_mc_core::fit::{fit_inverse_depth, mean_std};
use qaoa_mc_core::optimize::find_theta_star;
use qaoa_mc_core::{BoltzmannTarget, Error, SearchMode, SpinGlassInstance, ThetaSearchConfig};
use rayon::prelude::*;

use crate::error::{HarnessError, Result};
use crate::records::{ThetaRecord, ThetaSummary, STATUS_DEGENERATE, STATUS_OK};

/// Exact θ* for every (instance, depth) pair, instance-major. The search
/// range at depth `p` is `(0, theta_max(p)]`.
pub fn theta_study<F>(
    instances: &[SpinGlassInstance],
    depths: &[usize],
    temperature: f64,
    theta_max: F,
) -> Result<Vec<ThetaRecord>>
where
    F: Fn(usize) -> f64 + Sync,
{
    if depths.is_empty() || depths.contains(&0) {
        return Err(HarnessError::InvalidSpec("depths must be positive and non-empty".into()));
    }
    let jobs: Vec<(&SpinGlassInstance, usize)> = instances
        .iter()
        .flat_map(|inst| depths.iter().map(move |&p| (inst, p)))
        .collect();
    jobs.par_iter()
        .map(|&(inst, p)| {
            let tm = theta_max(p);
            let mut row = ThetaRecord {
                n: inst.n(),
                p,
                instance_seed: inst.seed(),
                theta_max: tm,
                theta_star: None,
                ar_at_star: None,
                boundary: None,
                evaluations: None,
                status: STATUS_OK.into(),
            };
            let target = BoltzmannTarget::new(inst.clone(), temperature)?;
            let config = ThetaSearchConfig::new(p, SearchMode::Exact).with_theta_max(tm);
            match find_theta_star(&target, &config) {
                Ok(found) => {
                    row.theta_star = Some(found.theta_star);
                    row.ar_at_star = Some(found.ar_at_star);
                    row.boundary = Some(found.boundary);
                    row.evaluations = Some(found.evaluations);
                }
                Err(Error::DegenerateLandscape { .. }) => row.status = STATUS_DEGENERATE.into(),
                Err(e) => row.status = format!("error: {e}"),
            }
            Ok(row)
        })
        .collect()
}

/// Mean θ* per `(n, p)` over rows that found one.
pub fn summarize_theta(records: &[ThetaRecord]) -> Vec<ThetaSummary> {
    let mut groups: BTreeMap<(usize, usize), (Vec<f64>, usize)> = BTreeMap::new();
    for r in records {
        if let Some(t) = r.theta_star {
            let g = groups.entry((r.n, r.p)).or_default();
            g.0.push(t);
            g.1 += usize::from(r.boundary == Some(true));
        }
    }
    groups
        .into_iter()
        .map(|((n, p), (thetas, boundary_count))| {
            let (mean, std) = mean_std(&thetas);
            ThetaSummary {
                n,
                p,
                count: thetas.len(),
                mean_theta_star: mean,
                std_theta_star: std,
                boundary_count,
            }
        })
        .collect()
}

/// Least-squares `a` in `θ* ≈ a/p` over all rows with a θ*, with its
/// standard error.
pub fn fit_depth_scaling(records: &[ThetaRecord]) -> Result<(f64, f64)> {
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.theta_star.map(|t| (r.p as f64, t)))
        .collect();
    Ok(fit_inverse_depth(&points)?)
}
