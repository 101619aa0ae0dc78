//! Proposal kernels `Q(x′|x)`: sampled one move at a time or materialized as
//! an exact `2ⁿ × 2ⁿ` column-stochastic matrix.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use rand::Rng;

use crate::error::{Error, Result};
use crate::ising::{SpinConfiguration, SpinGlassInstance};
use crate::rng;
use crate::statevector::{PhaseTable, QaoaParameters, Statevector};

/// Largest `n` for which a dense `2ⁿ × 2ⁿ` kernel matrix is built.
pub const MATRIX_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum ProposalKind {
    /// Flip one uniformly chosen spin.
    Local,
    /// Uniform over all `2ⁿ` states, current state included.
    Uniform,
    /// Measure `U|x⟩` for fixed angles.
    QaoaFixed(QaoaParameters),
    /// Single-parameter circuit with `θ ~ U[0, 2π]` drawn from `seed` at
    /// construction.
    QaoaRandomTheta { seed: u64, p: usize, theta: f64 },
    /// Measure `V|x⟩` without the `Vᵀ` half. Asymmetric in general; a
    /// negative control for the symmetry requirement.
    QaoaForward(QaoaParameters),
}

impl ProposalKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Local => "local",
            Self::Uniform => "uniform",
            Self::QaoaFixed(_) => "qaoa",
            Self::QaoaRandomTheta { .. } => "random",
            Self::QaoaForward(_) => "qaoa-forward",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProposalKernel {
    n: usize,
    kind: ProposalKind,
    table: Option<Arc<PhaseTable>>,
    symmetric: bool,
    redraw_theta: bool,
}

impl ProposalKernel {
    pub fn local(n: usize) -> Result<Self> {
        Self::classical(n, ProposalKind::Local)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::classical(n, ProposalKind::Uniform)
    }

    fn classical(n: usize, kind: ProposalKind) -> Result<Self> {
        if n == 0 || n >= usize::BITS as usize {
            return Err(Error::InvalidArgument("n out of range"));
        }
        Ok(Self {
            n,
            kind,
            table: None,
            symmetric: true,
            redraw_theta: false,
        })
    }

    /// Circuit kernel with fixed angles.
    pub fn qaoa(instance: &SpinGlassInstance, params: QaoaParameters) -> Result<Self> {
        Self::with_table(instance.n(), Arc::new(PhaseTable::new(instance)?), params)
    }

    /// Circuit kernel reusing a prebuilt phase table.
    pub fn with_table(n: usize, table: Arc<PhaseTable>, params: QaoaParameters) -> Result<Self> {
        check_table(n, &table)?;
        Ok(Self {
            n,
            kind: ProposalKind::QaoaFixed(params),
            table: Some(table),
            symmetric: true,
            redraw_theta: false,
        })
    }

    /// Single-parameter circuit at a `θ` frozen from `U[0, 2π]`.
    pub fn qaoa_random_theta(instance: &SpinGlassInstance, p: usize, seed: u64) -> Result<Self> {
        Self::random_theta_with_table(instance.n(), Arc::new(PhaseTable::new(instance)?), p, seed)
    }

    pub fn random_theta_with_table(
        n: usize,
        table: Arc<PhaseTable>,
        p: usize,
        seed: u64,
    ) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument("depth p must be at least 1"));
        }
        check_table(n, &table)?;
        let theta = draw_theta(&mut rng::seeded(seed));
        Ok(Self {
            n,
            kind: ProposalKind::QaoaRandomTheta { seed, p, theta },
            table: Some(table),
            symmetric: true,
            redraw_theta: false,
        })
    }

    /// `V|x⟩` kernel. Not symmetric, so Metropolis steps refuse it.
    pub fn qaoa_forward(instance: &SpinGlassInstance, params: QaoaParameters) -> Result<Self> {
        Ok(Self {
            n: instance.n(),
            kind: ProposalKind::QaoaForward(params),
            table: Some(Arc::new(PhaseTable::new(instance)?)),
            symmetric: false,
            redraw_theta: false,
        })
    }

    /// For random-θ kernels, draw a fresh `θ` on every proposal from the
    /// chain's generator. Such a kernel has no fixed matrix.
    pub fn with_theta_redraw(mut self, redraw: bool) -> Self {
        self.redraw_theta = redraw && matches!(self.kind, ProposalKind::QaoaRandomTheta { .. });
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &ProposalKind {
        &self.kind
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn redraws_theta(&self) -> bool {
        self.redraw_theta
    }

    /// `θ` of single-parameter circuit kernels.
    pub fn theta(&self) -> Option<f64> {
        match &self.kind {
            ProposalKind::QaoaFixed(p) | ProposalKind::QaoaForward(p) => p.single_theta(),
            ProposalKind::QaoaRandomTheta { theta, .. } => Some(*theta),
            _ => None,
        }
    }

    /// Scratch statevector sized for this kernel, if it needs one.
    pub fn scratch(&self) -> Option<Statevector> {
        self.table
            .as_ref()
            .map(|_| Statevector::basis(self.n, SpinConfiguration::all_up()).expect("n in range"))
    }

    /// Draws `x′ ~ Q(·|x)`.
    pub fn propose<R: Rng + ?Sized>(
        &self,
        x: SpinConfiguration,
        rng: &mut R,
    ) -> Result<SpinConfiguration> {
        let mut scratch = self.scratch();
        self.propose_with(x, rng, scratch.as_mut())
    }

    /// As [`Self::propose`], reusing `scratch` (from [`Self::scratch`]).
    pub fn propose_with<R: Rng + ?Sized>(
        &self,
        x: SpinConfiguration,
        rng: &mut R,
        scratch: Option<&mut Statevector>,
    ) -> Result<SpinConfiguration> {
        let check = |c: SpinConfiguration| SpinConfiguration::new(c.index(), self.n);
        check(x)?;
        match &self.kind {
            ProposalKind::Local => Ok(x.flipped(rng.random_range(0..self.n))),
            ProposalKind::Uniform => check(SpinConfiguration::from_index(
                rng.random_range(0..1usize << self.n),
            )),
            _ => {
                let state = scratch.ok_or(Error::InvalidArgument("circuit kernel needs scratch"))?;
                if self.redraw_theta {
                    let ProposalKind::QaoaRandomTheta { p, .. } = self.kind else {
                        unreachable!()
                    };
                    let params = QaoaParameters::single(p, draw_theta(rng))?;
                    state.evolve_symmetric_qaoa(x, &params, self.table())?;
                } else {
                    self.evolve(x, state)?;
                }
                Ok(state.sample(rng))
            }
        }
    }

    fn table(&self) -> &PhaseTable {
        self.table.as_deref().expect("circuit kernels carry a table")
    }

    fn evolve(&self, x: SpinConfiguration, state: &mut Statevector) -> Result<()> {
        match &self.kind {
            ProposalKind::QaoaFixed(params) => state.evolve_symmetric_qaoa(x, params, self.table()),
            ProposalKind::QaoaRandomTheta { p, theta, .. } => {
                state.evolve_symmetric_qaoa(x, &QaoaParameters::single(*p, *theta)?, self.table())
            }
            ProposalKind::QaoaForward(params) => state.evolve_forward_qaoa(x, params, self.table()),
            ProposalKind::Local | ProposalKind::Uniform => unreachable!(),
        }
    }

    /// Writes column `Q(·|from)` into `out` (length `2ⁿ`).
    pub fn column_into(
        &self,
        from: usize,
        out: &mut [f64],
        scratch: Option<&mut Statevector>,
    ) -> Result<()> {
        let dim = 1usize << self.n;
        if out.len() != dim {
            return Err(Error::SizeMismatch {
                expected: dim,
                found: out.len(),
            });
        }
        let x = SpinConfiguration::new(from, self.n)?;
        if self.redraw_theta {
            return Err(Error::InvalidArgument(
                "a kernel that redraws θ per step has no fixed matrix",
            ));
        }
        match &self.kind {
            ProposalKind::Local => {
                out.fill(0.0);
                let w = 1.0 / self.n as f64;
                for j in 0..self.n {
                    out[from ^ (1 << j)] = w;
                }
            }
            ProposalKind::Uniform => out.fill(1.0 / dim as f64),
            _ => {
                let state = scratch.ok_or(Error::InvalidArgument("circuit kernel needs scratch"))?;
                self.evolve(x, state)?;
                state.probabilities_into(out);
            }
        }
        Ok(())
    }

    /// Exact `Q` as a dense matrix, column `x` holding `Q(·|x)`.
    pub fn exact_q_matrix(&self) -> Result<ProposalMatrix> {
        if self.n > MATRIX_CAP {
            return Err(Error::EnumerationInfeasible {
                n: self.n,
                cap: MATRIX_CAP,
            });
        }
        let dim = 1usize << self.n;
        let mut data = vec![0.0; dim * dim];
        let mut scratch = self.scratch();
        for (from, col) in data.chunks_exact_mut(dim).enumerate() {
            self.column_into(from, col, scratch.as_mut())?;
        }
        Ok(ProposalMatrix { dim, data })
    }
}

fn draw_theta<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>() * TAU
}

fn check_table(n: usize, table: &PhaseTable) -> Result<()> {
    if table.len() != 1usize << n {
        return Err(Error::SizeMismatch {
            expected: 1 << n,
            found: table.len(),
        });
    }
    Ok(())
}

/// Dense column-stochastic proposal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalMatrix {
    dim: usize,
    /// Column-major: `data[from * dim + to] = Q(to | from)`.
    data: Vec<f64>,
}

impl ProposalMatrix {
    /// Builds from column-major data, checking nonnegativity and normalization.
    pub fn from_columns(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::SizeMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if data.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::InvalidArgument("proposal probabilities must be nonnegative"));
        }
        let m = Self { dim, data };
        m.check_normalized(1e-10)?;
        Ok(m)
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, to: usize, from: usize) -> f64 {
        self.data[from * self.dim + to]
    }

    pub fn column(&self, from: usize) -> &[f64] {
        &self.data[from * self.dim..(from + 1) * self.dim]
    }

    pub fn columns(&self) -> core::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    /// `max |Q(a|b) − Q(b|a)|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.dim {
            for b in 0..a {
                worst = worst.max((self.get(a, b) - self.get(b, a)).abs());
            }
        }
        worst
    }

    pub fn max_column_error(&self) -> f64 {
        self.columns()
            .map(|c| (c.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_normalized(&self, tol: f64) -> Result<()> {
        for (column, c) in self.columns().enumerate() {
            let sum: f64 = c.iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(Error::NotNormalized { column, sum });
            }
        }
        Ok(())
    }

    pub(crate) fn check_symmetric(&self, tol: f64) -> Result<()> {
        if self.asymmetry() > tol {
            return Err(Error::NonSymmetricKernel);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn instance(n: usize, seed: u64) -> SpinGlassInstance {
        SpinGlassInstance::generate(n, seed).unwrap()
    }

    fn all_kernels(inst: &SpinGlassInstance) -> Vec<ProposalKernel> {
        vec![
            ProposalKernel::local(inst.n()).unwrap(),
            ProposalKernel::uniform(inst.n()).unwrap(),
            ProposalKernel::qaoa(inst, QaoaParameters::single(5, 0.3).unwrap()).unwrap(),
            ProposalKernel::qaoa_random_theta(inst, 5, 99).unwrap(),
        ]
    }

    #[test]
    fn local_single_spin_always_flips() {
        let k = ProposalKernel::local(1).unwrap();
        let mut rng = seeded(0);
        for _ in 0..100 {
            assert_eq!(k.propose(SpinConfiguration::all_up(), &mut rng).unwrap().index(), 1);
        }
    }

    #[test]
    fn uniform_frequencies() {
        let k = ProposalKernel::uniform(3).unwrap();
        let mut rng = seeded(1);
        let draws = 100_000;
        let mut counts = [0usize; 8];
        for _ in 0..draws {
            counts[k.propose(SpinConfiguration::all_up(), &mut rng).unwrap().index()] += 1;
        }
        let p = 1.0 / 8.0;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - draws as f64 * p).abs() < 5.0 * sigma);
        }
    }

    #[test]
    fn zero_angle_circuit_stays_put() {
        let inst = instance(4, 3);
        let k = ProposalKernel::qaoa(&inst, QaoaParameters::single(5, 0.0).unwrap()).unwrap();
        let mut rng = seeded(2);
        let x = SpinConfiguration::new(11, 4).unwrap();
        assert!((0..200).all(|_| k.propose(x, &mut rng).unwrap() == x));
        assert_eq!(k.exact_q_matrix().unwrap(), ProposalMatrix::identity(16));
    }

    #[test]
    fn local_matrix_n2() {
        let q = ProposalKernel::local(2).unwrap().exact_q_matrix().unwrap();
        for a in 0..4usize {
            for b in 0..4usize {
                let expect = if (a ^ b).count_ones() == 1 { 0.5 } else { 0.0 };
                assert_eq!(q.get(a, b), expect);
            }
        }
    }

    #[test]
    fn circuit_matrix_is_symmetric_stochastic() {
        let inst = instance(3, 5);
        let k = ProposalKernel::qaoa(&inst, QaoaParameters::single(5, 0.3).unwrap()).unwrap();
        let q = k.exact_q_matrix().unwrap();
        assert!(q.asymmetry() < 1e-10);
        assert!(q.max_column_error() < 1e-10);
    }

    #[test]
    fn every_kernel_matrix_is_symmetric_stochastic() {
        for seed in 0..5 {
            for n in 1..=6 {
                let inst = instance(n, seed);
                for k in all_kernels(&inst) {
                    let q = k.exact_q_matrix().unwrap();
                    assert!(q.asymmetry() < 1e-10, "{:?}", k.kind());
                    assert!(q.max_column_error() < 1e-10);
                    assert!(q.data.iter().all(|&v| v >= 0.0));
                }
            }
        }
    }

    #[test]
    fn forward_only_circuit_is_asymmetric() {
        let inst = instance(3, 1);
        // Single-θ forward circuits are palindromic up to an output phase, so
        // asymmetry needs distinct mixer angles.
        let params = QaoaParameters::new(vec![0.3, 0.7], vec![0.5, 0.2]).unwrap();
        let k = ProposalKernel::qaoa_forward(&inst, params).unwrap();
        assert!(!k.is_symmetric());
        let q = k.exact_q_matrix().unwrap();
        assert!(q.max_column_error() < 1e-10);
        assert!(q.asymmetry() > 1e-6);
    }

    #[test]
    fn sampled_columns_match_exact_columns() {
        let inst = instance(3, 8);
        let draws = 100_000;
        for k in all_kernels(&inst) {
            let q = k.exact_q_matrix().unwrap();
            let x = SpinConfiguration::new(5, 3).unwrap();
            let mut rng = seeded(3);
            let mut scratch = k.scratch();
            let mut counts = [0usize; 8];
            for _ in 0..draws {
                counts[k.propose_with(x, &mut rng, scratch.as_mut()).unwrap().index()] += 1;
            }
            for to in 0..8 {
                let p = q.get(to, 5);
                let sigma = (draws as f64 * p * (1.0 - p)).sqrt().max(1.0);
                assert!(
                    (counts[to] as f64 - draws as f64 * p).abs() < 5.0 * sigma,
                    "{:?} {to}",
                    k.kind()
                );
            }
        }
    }

    #[test]
    fn local_moves_connect_every_state() {
        for n in 1..=6 {
            let dim = 1usize << n;
            let q = ProposalKernel::local(n).unwrap().exact_q_matrix().unwrap();
            let mut seen = vec![false; dim];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(s) = stack.pop() {
                for t in 0..dim {
                    if q.get(t, s) > 0.0 && !seen[t] {
                        seen[t] = true;
                        stack.push(t);
                    }
                }
            }
            assert!(seen.iter().all(|&v| v));
        }
    }

    #[test]
    fn random_theta_is_frozen_per_seed() {
        let inst = instance(4, 2);
        let a = ProposalKernel::qaoa_random_theta(&inst, 5, 7).unwrap();
        let b = ProposalKernel::qaoa_random_theta(&inst, 5, 7).unwrap();
        let theta = a.theta().unwrap();
        assert_eq!(Some(theta), b.theta());
        assert!((0.0..=TAU).contains(&theta));
        let redraw = a.clone().with_theta_redraw(true);
        assert!(redraw.exact_q_matrix().is_err());
        let mut rng = seeded(4);
        let mut scratch = redraw.scratch();
        redraw
            .propose_with(SpinConfiguration::all_up(), &mut rng, scratch.as_mut())
            .unwrap();
    }

    #[test]
    fn matrix_cap() {
        let k = ProposalKernel::uniform(13).unwrap();
        assert!(matches!(
            k.exact_q_matrix(),
            Err(Error::EnumerationInfeasible { n: 13, cap: 12 })
        ));
    }

    #[test]
    fn from_columns_validates() {
        assert!(ProposalMatrix::from_columns(2, vec![0.5, 0.5, 0.5, 0.5]).is_ok());
        assert!(matches!(
            ProposalMatrix::from_columns(2, vec![0.5, 0.6, 0.5, 0.5]),
            Err(Error::NotNormalized { column: 0, .. })
        ));
        assert!(ProposalMatrix::from_columns(2, vec![1.5, -0.5, 0.5, 0.5]).is_err());
    }
}
