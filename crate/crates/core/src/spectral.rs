//! Exact chain analysis: transition matrix, acceptance rate and absolute
//! spectral gap.
//!
//! The gap is computed from the symmetric similarity transform
//! `S = D^{−1/2} P D^{1/2}`, `D = diag(μ)`. For a symmetric proposal under the
//! Metropolis rule the off-diagonal entries have the closed form
//! `S[x′,x] = Q(x′|x) exp(−|E(x′) − E(x)| / 2T)`, which only involves energy
//! differences and so survives temperatures where `μ` itself underflows.

use alloc::vec;
use alloc::vec::Vec;

use crate::eigen::symmetric_eigenvalues;
use crate::error::{Error, Result};
use crate::ising::ExactTarget;
use crate::proposal::{ProposalKernel, ProposalMatrix};

const STOCHASTIC_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-10;
/// Allowed deviation of the top eigenvalue from 1.
const UNIT_EIGENVALUE_TOL: f64 = 1e-6;
/// Entries at or below this are treated as structurally zero in the
/// detailed-balance check.
const LOG_FLOOR: f64 = 1e-300;
/// States with `μ(x)` below this fraction of `max μ` are skipped by
/// [`exact_ar_for_kernel`]; the absolute error is below `2ⁿ` times this.
pub const AR_WEIGHT_FLOOR: f64 = 1e-20;

/// `P(x′|x)` as a dense column-stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    dim: usize,
    /// Column-major: `data[from * dim + to]`.
    data: Vec<f64>,
}

impl TransitionMatrix {
    pub fn from_columns(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::SizeMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, to: usize, from: usize) -> f64 {
        self.data[from * self.dim + to]
    }

    pub fn set(&mut self, to: usize, from: usize, value: f64) {
        self.data[from * self.dim + to] = value;
    }

    pub fn column(&self, from: usize) -> &[f64] {
        &self.data[from * self.dim..(from + 1) * self.dim]
    }

    /// `max_x |Σ_x′ P(x′|x) − 1|`.
    pub fn max_column_error(&self) -> f64 {
        self.data
            .chunks_exact(self.dim)
            .map(|c| (c.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `P v` for a distribution `v` over states.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (from, col) in self.data.chunks_exact(self.dim).enumerate() {
            let w = v[from];
            for (o, &p) in out.iter_mut().zip(col) {
                *o += p * w;
            }
        }
        out
    }

    /// Row-major copy, `rows[to * dim + from]`.
    pub fn to_row_major(&self) -> Vec<f64> {
        transpose(&self.data, self.dim)
    }
}

/// Symmetric matrix with the same spectrum as `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizedMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymmetrizedMatrix {
    /// Wraps a row-major symmetric matrix; no checks beyond the size.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::SizeMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.data
    }

    /// `‖S − Sᵀ‖_max`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.dim {
            for b in 0..a {
                worst = worst.max((self.get(a, b) - self.get(b, a)).abs());
            }
        }
        worst
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        symmetric_eigenvalues(self.data.clone(), self.dim)
    }

    /// Whether the nonzero off-diagonal pattern connects every state.
    pub fn is_irreducible(&self) -> bool {
        if self.dim == 0 {
            return true;
        }
        let mut seen = vec![false; self.dim];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut reached = 1;
        while let Some(a) = stack.pop() {
            for b in 0..self.dim {
                if !seen[b] && b != a && self.get(a, b) > 0.0 {
                    seen[b] = true;
                    reached += 1;
                    stack.push(b);
                }
            }
        }
        reached == self.dim
    }
}

fn transpose(data: &[f64], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim * dim];
    for a in 0..dim {
        for b in 0..dim {
            out[b * dim + a] = data[a * dim + b];
        }
    }
    out
}

fn check_inputs(target: &ExactTarget, q: &ProposalMatrix) -> Result<()> {
    if q.dim() != target.dim() {
        return Err(Error::SizeMismatch {
            expected: target.dim(),
            found: q.dim(),
        });
    }
    q.check_normalized(STOCHASTIC_TOL)?;
    q.check_symmetric(SYMMETRY_TOL)
}

/// Metropolis transition matrix for a symmetric proposal.
///
/// Off-diagonal `P[x′,x] = Q(x′|x) A(x′|x)`; the diagonal collects the
/// rejected mass plus any self-proposal.
pub fn build_transition_matrix(target: &ExactTarget, q: &ProposalMatrix) -> Result<TransitionMatrix> {
    check_inputs(target, q)?;
    let dim = q.dim();
    let mut data = vec![0.0; dim * dim];
    for (from, col) in data.chunks_exact_mut(dim).enumerate() {
        let qcol = q.column(from);
        let mut moved = 0.0;
        for to in 0..dim {
            if to != from {
                let v = qcol[to] * target.acceptance(from, to);
                col[to] = v;
                moved += v;
            }
        }
        col[from] = 1.0 - moved;
    }
    Ok(TransitionMatrix { dim, data })
}

/// Symmetric form of the Metropolis transition matrix, built from energy
/// differences only.
pub fn symmetrize(target: &ExactTarget, q: &ProposalMatrix) -> Result<SymmetrizedMatrix> {
    check_inputs(target, q)?;
    let dim = q.dim();
    let energies = target.energies();
    let half_beta = 0.5 / target.temperature();
    let mut data = vec![0.0; dim * dim];
    for from in 0..dim {
        let qcol = q.column(from);
        let mut moved = 0.0;
        for to in 0..dim {
            if to == from {
                continue;
            }
            let de = energies[to] - energies[from];
            moved += qcol[to] * target.acceptance(from, to);
            // Column `from` of S, stored row-major at [to][from].
            data[to * dim + from] = qcol[to] * libm::exp(-de.abs() * half_beta);
        }
        data[from * dim + from] = 1.0 - moved;
    }
    // Q is symmetric only to rounding; average the two triangles.
    for a in 0..dim {
        for b in 0..a {
            let v = 0.5 * (data[a * dim + b] + data[b * dim + a]);
            data[a * dim + b] = v;
            data[b * dim + a] = v;
        }
    }
    Ok(SymmetrizedMatrix { dim, data })
}

/// `δ = 1 − |λ₂|`, `λ₂` the largest-magnitude eigenvalue after removing one
/// unit eigenvalue.
///
/// Reducible chains (disconnected move graph) are an error since their unit
/// eigenvalue is degenerate.
pub fn absolute_spectral_gap(s: &SymmetrizedMatrix) -> Result<f64> {
    if !s.is_irreducible() {
        return Err(Error::NotErgodic("move graph is disconnected"));
    }
    gap_from_spectrum(&s.eigenvalues()?)
}

/// As [`absolute_spectral_gap`] but a reducible chain yields `δ = 0`.
pub fn absolute_spectral_gap_allow_reducible(s: &SymmetrizedMatrix) -> Result<f64> {
    gap_from_spectrum(&s.eigenvalues()?)
}

/// `δ` from a full ascending spectrum.
pub fn gap_from_spectrum(eigenvalues: &[f64]) -> Result<f64> {
    let (&top, rest) = eigenvalues
        .split_last()
        .ok_or(Error::InvalidArgument("empty spectrum"))?;
    if (top - 1.0).abs() > UNIT_EIGENVALUE_TOL {
        return Err(Error::NotErgodic("largest eigenvalue is not 1"));
    }
    let second = rest.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok((1.0 - second).clamp(0.0, 1.0))
}

/// `δ` for a kernel on an enumerated target.
pub fn spectral_gap_for_kernel(target: &ExactTarget, kernel: &ProposalKernel) -> Result<f64> {
    let q = kernel.exact_q_matrix()?;
    absolute_spectral_gap(&symmetrize(target, &q)?)
}

/// `AR = Σ_{x,x′} μ(x) Q(x′|x) A(x′|x)`.
pub fn exact_ar(target: &ExactTarget, q: &ProposalMatrix) -> Result<f64> {
    if q.dim() != target.dim() {
        return Err(Error::SizeMismatch {
            expected: target.dim(),
            found: q.dim(),
        });
    }
    let mu = target.probabilities();
    let mut ar = 0.0;
    for (from, qcol) in q.columns().enumerate() {
        ar += mu[from] * column_acceptance(target, from, qcol);
    }
    Ok(ar)
}

/// [`exact_ar`] without materializing `Q`: columns are generated one at a
/// time and states with negligible weight (see [`AR_WEIGHT_FLOOR`]) skipped.
pub fn exact_ar_for_kernel(target: &ExactTarget, kernel: &ProposalKernel) -> Result<f64> {
    if kernel.n() != target.n() {
        return Err(Error::SizeMismatch {
            expected: target.n(),
            found: kernel.n(),
        });
    }
    let mu = target.probabilities();
    let floor = mu.iter().copied().fold(0.0, f64::max) * AR_WEIGHT_FLOOR;
    let mut column = vec![0.0; target.dim()];
    let mut scratch = kernel.scratch();
    let mut ar = 0.0;
    for (from, &weight) in mu.iter().enumerate() {
        if weight < floor {
            continue;
        }
        kernel.column_into(from, &mut column, scratch.as_mut())?;
        ar += weight * column_acceptance(target, from, &column);
    }
    Ok(ar)
}

fn column_acceptance(target: &ExactTarget, from: usize, qcol: &[f64]) -> f64 {
    qcol.iter()
        .enumerate()
        .map(|(to, &q)| if q == 0.0 { 0.0 } else { q * target.acceptance(from, to) })
        .sum()
}

/// `max |ln(μ(x) P[x′,x]) − ln(μ(x′) P[x,x′])|` over pairs `x ≠ x′`.
///
/// Pairs where both entries are at or below `1e−300` are skipped; a pair with
/// exactly one such entry violates reversibility and yields `∞`.
pub fn verify_detailed_balance(target: &ExactTarget, p: &TransitionMatrix) -> Result<f64> {
    if p.dim() != target.dim() {
        return Err(Error::SizeMismatch {
            expected: target.dim(),
            found: p.dim(),
        });
    }
    let log_mu = target.log_probabilities();
    let mut worst = 0.0f64;
    for a in 0..p.dim() {
        for b in 0..a {
            let forward = p.get(b, a);
            let backward = p.get(a, b);
            match (forward > LOG_FLOOR, backward > LOG_FLOOR) {
                (false, false) => {}
                (true, true) => {
                    let r = (log_mu[a] + libm::log(forward)) - (log_mu[b] + libm::log(backward));
                    worst = worst.max(r.abs());
                }
                _ => return Ok(f64::INFINITY),
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{BoltzmannTarget, SpinGlassInstance};
    use crate::statevector::QaoaParameters;

    fn exact(n: usize, seed: u64, t: f64) -> ExactTarget {
        BoltzmannTarget::new(SpinGlassInstance::generate(n, seed).unwrap(), t)
            .unwrap()
            .enumerate()
            .unwrap()
    }

    fn flat(n: usize) -> ExactTarget {
        BoltzmannTarget::new(SpinGlassInstance::zero(n).unwrap(), 0.1)
            .unwrap()
            .enumerate()
            .unwrap()
    }

    #[test]
    fn identity_proposal_gives_identity_chain() {
        let t = exact(3, 1, 0.1);
        let q = ProposalMatrix::identity(8);
        let p = build_transition_matrix(&t, &q).unwrap();
        for a in 0..8 {
            for b in 0..8 {
                assert_eq!(p.get(a, b), if a == b { 1.0 } else { 0.0 });
            }
        }
        let s = symmetrize(&t, &q).unwrap();
        assert_eq!(absolute_spectral_gap_allow_reducible(&s).unwrap(), 0.0);
        assert!(matches!(absolute_spectral_gap(&s), Err(Error::NotErgodic(_))));
        assert!((exact_ar(&t, &q).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn flat_target_chain_equals_proposal() {
        let t = flat(4);
        for k in [ProposalKernel::local(4).unwrap(), ProposalKernel::uniform(4).unwrap()] {
            let q = k.exact_q_matrix().unwrap();
            let p = build_transition_matrix(&t, &q).unwrap();
            let s = symmetrize(&t, &q).unwrap();
            for a in 0..16 {
                for b in 0..16 {
                    assert!((p.get(a, b) - q.get(a, b)).abs() < 1e-15);
                    assert!((s.get(a, b) - q.get(a, b)).abs() < 1e-15);
                }
            }
            assert!((exact_ar(&t, &q).unwrap() - 1.0).abs() < 1e-14);
        }
        let q = ProposalKernel::uniform(4).unwrap().exact_q_matrix().unwrap();
        let gap = absolute_spectral_gap(&symmetrize(&t, &q).unwrap()).unwrap();
        assert!((gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boltzmann_is_stationary() {
        let t = exact(3, 4, 0.1);
        let q = ProposalKernel::uniform(3).unwrap().exact_q_matrix().unwrap();
        let p = build_transition_matrix(&t, &q).unwrap();
        let mu = t.probabilities();
        for (a, b) in p.apply(mu).iter().zip(mu) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn symmetrized_matrix_is_similar_to_p() {
        // Entry-wise S = D^{-1/2} P D^{1/2} where μ does not underflow.
        let t = exact(4, 6, 1.0);
        let inst = SpinGlassInstance::generate(4, 6).unwrap();
        let k = ProposalKernel::qaoa(&inst, QaoaParameters::single(3, 0.4).unwrap()).unwrap();
        let q = k.exact_q_matrix().unwrap();
        let p = build_transition_matrix(&t, &q).unwrap();
        let s = symmetrize(&t, &q).unwrap();
        let mu = t.probabilities();
        for a in 0..16 {
            for b in 0..16 {
                let direct = (mu[b] / mu[a]).sqrt() * p.get(a, b);
                assert!((s.get(a, b) - direct).abs() < 1e-12);
            }
        }
        assert!(s.asymmetry() <= 1e-10);
    }

    #[test]
    fn gap_is_permutation_invariant() {
        let t = exact(3, 2, 0.1);
        let q = ProposalKernel::local(3).unwrap().exact_q_matrix().unwrap();
        let s = symmetrize(&t, &q).unwrap();
        let perm = [5usize, 2, 7, 0, 3, 6, 1, 4];
        let mut permuted = vec![0.0; 64];
        for a in 0..8 {
            for b in 0..8 {
                permuted[perm[a] * 8 + perm[b]] = s.get(a, b);
            }
        }
        let sp = SymmetrizedMatrix::from_row_major(8, permuted).unwrap();
        let g1 = absolute_spectral_gap(&s).unwrap();
        let g2 = absolute_spectral_gap(&sp).unwrap();
        assert!((g1 - g2).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&g1));
    }

    #[test]
    fn hot_uniform_chain_mixes_in_one_step() {
        let q = ProposalKernel::uniform(5).unwrap().exact_q_matrix().unwrap();
        let t = exact(5, 3, 1e6);
        let spread = t.energies().iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            - t.energies().iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let gap = absolute_spectral_gap(&symmetrize(&t, &q).unwrap()).unwrap();
        assert!(1.0 - gap <= spread / 1e6, "{gap}");
        let t = exact(5, 3, 1e8);
        let gap = absolute_spectral_gap(&symmetrize(&t, &q).unwrap()).unwrap();
        assert!((gap - 1.0).abs() < 1e-6, "{gap}");
    }

    #[test]
    fn gap_matches_power_iteration_with_deflation() {
        let t = exact(3, 5, 0.1);
        let q = ProposalKernel::local(3).unwrap().exact_q_matrix().unwrap();
        let s = symmetrize(&t, &q).unwrap();
        let gap = absolute_spectral_gap(&s).unwrap();

        // Top eigenvector of S is sqrt(μ); deflate and power-iterate.
        let v: Vec<f64> = t.probabilities().iter().map(|m| m.sqrt()).collect();
        let mut deflated = s.as_row_major().to_vec();
        for a in 0..8 {
            for b in 0..8 {
                deflated[a * 8 + b] -= v[a] * v[b];
            }
        }
        let mut x: Vec<f64> = (0..8).map(|i| 1.0 + i as f64 * 0.1).collect();
        let mut lambda = 0.0;
        for _ in 0..200_000 {
            let y: Vec<f64> = (0..8)
                .map(|a| (0..8).map(|b| deflated[a * 8 + b] * x[b]).sum())
                .collect();
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            lambda = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>()
                / x.iter().map(|v| v * v).sum::<f64>();
            x = y.iter().map(|v| v / norm).collect();
        }
        assert!((gap - (1.0 - lambda.abs())).abs() < 1e-6, "{gap} vs {lambda}");
    }

    #[test]
    fn detailed_balance_holds_and_detects_corruption() {
        let t = exact(4, 8, 0.1);
        let inst = SpinGlassInstance::generate(4, 8).unwrap();
        let k = ProposalKernel::qaoa(&inst, QaoaParameters::single(5, 0.3).unwrap()).unwrap();
        let q = k.exact_q_matrix().unwrap();
        let mut p = build_transition_matrix(&t, &q).unwrap();
        assert!(verify_detailed_balance(&t, &p).unwrap() <= 1e-9);
        assert!(p.max_column_error() < 1e-10);
        let v = p.get(3, 1);
        p.set(3, 1, v * (1.0 + 1e-3));
        assert!(verify_detailed_balance(&t, &p).unwrap() > 1e-4);
    }

    #[test]
    fn rejects_bad_proposals() {
        let t = exact(1, 0, 1.0);
        let bad = ProposalMatrix::from_columns(2, vec![0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(build_transition_matrix(&t, &bad).is_ok());
        let inst = SpinGlassInstance::generate(3, 1).unwrap();
        let t3 = exact(3, 1, 1.0);
        let params = QaoaParameters::new(vec![0.3, 0.7], vec![0.5, 0.2]).unwrap();
        let fwd = ProposalKernel::qaoa_forward(&inst, params)
            .unwrap()
            .exact_q_matrix()
            .unwrap();
        assert_eq!(build_transition_matrix(&t3, &fwd), Err(Error::NonSymmetricKernel));
        assert!(build_transition_matrix(&t, &ProposalMatrix::identity(4)).is_err());
    }

    #[test]
    fn streaming_ar_matches_matrix_ar() {
        let inst = SpinGlassInstance::generate(5, 9).unwrap();
        let t = exact(5, 9, 0.1);
        let k = ProposalKernel::qaoa(&inst, QaoaParameters::single(5, 0.2).unwrap()).unwrap();
        let a = exact_ar(&t, &k.exact_q_matrix().unwrap()).unwrap();
        let b = exact_ar_for_kernel(&t, &k).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!(a > 0.0 && a <= 1.0);
    }

    #[test]
    fn spectrum_without_unit_top_is_rejected() {
        assert!(gap_from_spectrum(&[0.2, 0.5]).is_err());
        assert_eq!(gap_from_spectrum(&[-0.5, 0.25, 1.0]).unwrap(), 0.5);
    }
}
