//! Statevector simulation of the symmetric circuit `U = VᵀV`.
//!
//! `V(β, γ) = U_C(γ_p) U_B(β_p) ⋯ U_C(γ_1) U_B(β_1)` with
//! `U_B(β) = exp(−iβ Σ_j X_j)` and `U_C(γ) = exp(−iγ α H_prob)`.
//! Every layer is a symmetric matrix (the mixer is a tensor product of
//! symmetric 2×2 blocks, the problem layer is diagonal), so `Vᵀ` is the same
//! layers in reverse order with no conjugation. Applied to `|x⟩` the full
//! sequence is
//!
//! ```text
//! U_B(β₁) U_C(γ₁) ⋯ U_B(β_p) U_C(γ_p) · U_C(γ_p) U_B(β_p) ⋯ U_C(γ₁) U_B(β₁) |x⟩
//! ```
//!
//! where the rightmost factor acts first. Adjacent `U_C(γ_p) U_C(γ_p)` are
//! fused into one phase rotation by `2γ_p`.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::ising::{SpinConfiguration, SpinGlassInstance};

/// `α = ‖H_mix‖_F / ‖H_prob‖_F`.
///
/// Distinct Pauli strings are orthogonal under the Frobenius inner product, so
/// both norms reduce to coefficient sums and `α = sqrt(n / (Σ J² + Σ h²))`.
pub fn alpha_norm(instance: &SpinGlassInstance) -> Result<f64> {
    let norm = instance.coefficient_norm_sqr();
    if norm == 0.0 {
        return Err(Error::DegenerateHamiltonian);
    }
    Ok(libm::sqrt(instance.n() as f64 / norm))
}

/// Diagonal of `α H_prob`: entry `z` is `α E(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTable {
    entries: Vec<f64>,
}

impl PhaseTable {
    pub fn new(instance: &SpinGlassInstance) -> Result<Self> {
        let alpha = alpha_norm(instance)?;
        let mut entries = instance.energies();
        entries.iter_mut().for_each(|e| *e *= alpha);
        Ok(Self { entries })
    }

    pub fn from_entries(entries: Vec<f64>) -> Result<Self> {
        if !entries.len().is_power_of_two() {
            return Err(Error::InvalidArgument("phase table length must be a power of two"));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Circuit angles for depth `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct QaoaParameters {
    betas: Vec<f64>,
    gammas: Vec<f64>,
    single_theta: Option<f64>,
}

impl QaoaParameters {
    pub fn new(betas: Vec<f64>, gammas: Vec<f64>) -> Result<Self> {
        if betas.is_empty() || betas.len() != gammas.len() {
            return Err(Error::InvalidArgument("betas and gammas must have equal nonzero length"));
        }
        Ok(Self {
            betas,
            gammas,
            single_theta: None,
        })
    }

    /// Single-parameter circuit: every `β_k` and `γ_k` equal to `theta`.
    pub fn single(p: usize, theta: f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument("depth p must be at least 1"));
        }
        Ok(Self {
            betas: vec![theta; p],
            gammas: vec![theta; p],
            single_theta: Some(theta),
        })
    }

    pub fn depth(&self) -> usize {
        self.betas.len()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn single_theta(&self) -> Option<f64> {
        self.single_theta
    }
}

/// `2ⁿ` complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// Computational basis state `|x⟩`.
    pub fn basis(n: usize, x: SpinConfiguration) -> Result<Self> {
        let dim = 1usize << n;
        if x.index() >= dim {
            return Err(Error::ConfigurationOutOfRange { index: x.index(), n });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[x.index()] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::InvalidArgument("amplitude count must be a power of two"));
        }
        let n = amps.len().trailing_zeros() as usize;
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Resets to `|x⟩` without reallocating.
    pub fn reset_to(&mut self, x: SpinConfiguration) -> Result<()> {
        if x.index() >= self.amps.len() {
            return Err(Error::ConfigurationOutOfRange { index: x.index(), n: self.n });
        }
        self.amps.fill(Complex64::new(0.0, 0.0));
        self.amps[x.index()] = Complex64::new(1.0, 0.0);
        Ok(())
    }

    /// `exp(−iβX)` on every qubit.
    pub fn apply_mixer_layer(&mut self, beta: f64) {
        let (s, c) = libm::sincos(beta);
        let dim = self.amps.len();
        for j in 0..self.n {
            let stride = 1usize << j;
            let mut base = 0;
            while base < dim {
                for lo in base..base + stride {
                    let hi = lo + stride;
                    let a = self.amps[lo];
                    let b = self.amps[hi];
                    // (a, b) -> (a cos β − i b sin β, b cos β − i a sin β)
                    self.amps[lo] = Complex64::new(a.re * c + b.im * s, a.im * c - b.re * s);
                    self.amps[hi] = Complex64::new(b.re * c + a.im * s, b.im * c - a.re * s);
                }
                base += 2 * stride;
            }
        }
    }

    /// Multiplies amplitude `z` by `exp(−iγ table[z])`.
    pub fn apply_problem_layer(&mut self, gamma: f64, table: &PhaseTable) -> Result<()> {
        if table.len() != self.amps.len() {
            return Err(Error::SizeMismatch {
                expected: self.amps.len(),
                found: table.len(),
            });
        }
        for (a, &phase) in self.amps.iter_mut().zip(&table.entries) {
            let (s, c) = libm::sincos(gamma * phase);
            *a = Complex64::new(a.re * c + a.im * s, a.im * c - a.re * s);
        }
        Ok(())
    }

    /// Overwrites `self` with `U|x⟩` for `U = VᵀV`.
    pub fn evolve_symmetric_qaoa(
        &mut self,
        x: SpinConfiguration,
        params: &QaoaParameters,
        table: &PhaseTable,
    ) -> Result<()> {
        self.reset_to(x)?;
        if table.len() != self.amps.len() {
            return Err(Error::SizeMismatch {
                expected: self.amps.len(),
                found: table.len(),
            });
        }
        let p = params.depth();
        // V: U_B(β₁) first, then U_C(γ₁), …, U_C(γ_p) last.
        for k in 0..p - 1 {
            self.apply_mixer_layer(params.betas[k]);
            self.apply_problem_layer(params.gammas[k], table)?;
        }
        self.apply_mixer_layer(params.betas[p - 1]);
        // U_C(γ_p) from V and U_C(γ_p) from Vᵀ.
        self.apply_problem_layer(2.0 * params.gammas[p - 1], table)?;
        self.apply_mixer_layer(params.betas[p - 1]);
        // Vᵀ: remaining layers in reverse order.
        for k in (0..p - 1).rev() {
            self.apply_problem_layer(params.gammas[k], table)?;
            self.apply_mixer_layer(params.betas[k]);
        }
        Ok(())
    }

    /// Overwrites `self` with `V|x⟩` only. Not symmetric as an operator.
    pub fn evolve_forward_qaoa(
        &mut self,
        x: SpinConfiguration,
        params: &QaoaParameters,
        table: &PhaseTable,
    ) -> Result<()> {
        self.reset_to(x)?;
        for k in 0..params.depth() {
            self.apply_mixer_layer(params.betas[k]);
            self.apply_problem_layer(params.gammas[k], table)?;
        }
        Ok(())
    }

    /// `|amp_z|²` for every `z`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Writes `|amp_z|²` into `out`, which must have length `2ⁿ`.
    pub fn probabilities_into(&self, out: &mut [f64]) {
        for (o, a) in out.iter_mut().zip(&self.amps) {
            *o = a.norm_sqr();
        }
    }

    /// Computational-basis measurement by inverse CDF.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SpinConfiguration {
        let u: f64 = rng.random();
        let total = self.norm_sqr();
        let target = u * total;
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (z, a) in self.amps.iter().enumerate() {
            let w = a.norm_sqr();
            if w > 0.0 {
                acc += w;
                last_nonzero = z;
                if target < acc {
                    return config(z);
                }
            }
        }
        // Rounding left `target` past the accumulated mass.
        config(last_nonzero)
    }
}

#[inline]
fn config(z: usize) -> SpinConfiguration {
    SpinConfiguration::from_index(z)
}

/// `U|x⟩` for the symmetric circuit.
pub fn apply_symmetric_qaoa(
    x: SpinConfiguration,
    params: &QaoaParameters,
    table: &PhaseTable,
) -> Result<Statevector> {
    let n = table.len().trailing_zeros() as usize;
    let mut state = Statevector::basis(n, x)?;
    state.evolve_symmetric_qaoa(x, params, table)?;
    Ok(state)
}

/// Computational-basis probabilities of a state.
pub fn measure_probabilities(state: &Statevector) -> Vec<f64> {
    state.probabilities()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use core::f64::consts::FRAC_PI_2;
    use core::f64::consts::FRAC_PI_4;
    use nalgebra::DMatrix;

    type CMat = DMatrix<Complex64>;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn dense_h_mix(n: usize) -> CMat {
        let dim = 1 << n;
        let mut h = CMat::zeros(dim, dim);
        for z in 0..dim {
            for j in 0..n {
                h[(z ^ (1 << j), z)] += c(1.0);
            }
        }
        h
    }

    fn dense_h_prob(inst: &SpinGlassInstance) -> CMat {
        let n = inst.n();
        let dim = 1 << n;
        let mut h = CMat::zeros(dim, dim);
        let zeta = |z: usize, j: usize| if z & (1 << j) == 0 { 1.0 } else { -1.0 };
        for z in 0..dim {
            let mut e = 0.0;
            for j in 0..n {
                for k in 0..j {
                    e -= inst.coupling(j, k) * zeta(z, j) * zeta(z, k);
                }
                e -= inst.fields()[j] * zeta(z, j);
            }
            h[(z, z)] = c(e);
        }
        h
    }

    fn expm_minus_i(h: &CMat, t: f64) -> CMat {
        (h * Complex64::new(0.0, -t)).exp()
    }

    fn random_state(n: usize, seed: u64) -> Statevector {
        let mut rng = seeded(seed);
        let mut amps: Vec<Complex64> = (0..1 << n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        Statevector::from_amplitudes(amps).unwrap()
    }

    fn to_vec(s: &Statevector) -> nalgebra::DVector<Complex64> {
        nalgebra::DVector::from_column_slice(s.amplitudes())
    }

    #[test]
    fn alpha_small_cases() {
        let one = SpinGlassInstance::new(1, vec![], vec![2.0], 0).unwrap();
        assert!((alpha_norm(&one).unwrap() - 0.5).abs() < 1e-15);
        let two = SpinGlassInstance::new(2, vec![1.0], vec![0.0, 0.0], 0).unwrap();
        assert!((alpha_norm(&two).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(
            alpha_norm(&SpinGlassInstance::zero(3).unwrap()),
            Err(Error::DegenerateHamiltonian)
        );
    }

    #[test]
    fn alpha_matches_dense_frobenius() {
        for n in 1..=4 {
            for seed in 0..5 {
                let inst = SpinGlassInstance::generate(n, seed).unwrap();
                let oracle = dense_h_mix(n).norm() / dense_h_prob(&inst).norm();
                let a = alpha_norm(&inst).unwrap();
                assert!((a - oracle).abs() <= 1e-12 * oracle, "{a} vs {oracle}");
            }
        }
    }

    #[test]
    fn mixer_cases() {
        let mut s = random_state(3, 1);
        let before = s.clone();
        s.apply_mixer_layer(0.0);
        assert_eq!(s, before);

        let mut one = Statevector::basis(1, SpinConfiguration::all_up()).unwrap();
        one.apply_mixer_layer(FRAC_PI_2);
        assert!(one.amplitudes()[0].norm() < 1e-12);
        assert!((one.amplitudes()[1] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn mixer_matches_dense_expm() {
        let mut s = random_state(3, 2);
        let oracle = expm_minus_i(&dense_h_mix(3), 0.37) * to_vec(&s);
        s.apply_mixer_layer(0.37);
        assert!((to_vec(&s) - oracle).camax() < 1e-12);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn problem_layer_cases() {
        let inst = SpinGlassInstance::generate(3, 4).unwrap();
        let table = PhaseTable::new(&inst).unwrap();
        let mut s = random_state(3, 3);
        let before = s.clone();
        s.apply_problem_layer(0.0, &table).unwrap();
        assert_eq!(s, before);

        let mut b = Statevector::basis(3, SpinConfiguration::new(5, 3).unwrap()).unwrap();
        b.apply_problem_layer(0.9, &table).unwrap();
        let p = b.probabilities();
        assert!((p[5] - 1.0).abs() < 1e-15);

        let oracle =
            expm_minus_i(&(dense_h_prob(&inst) * c(alpha_norm(&inst).unwrap())), 0.8) * to_vec(&s);
        s.apply_problem_layer(0.8, &table).unwrap();
        assert!((to_vec(&s) - oracle).camax() < 1e-12);

        let short = PhaseTable::from_entries(vec![0.0; 4]).unwrap();
        assert!(s.apply_problem_layer(0.1, &short).is_err());
    }

    #[test]
    fn symmetric_circuit_at_zero_is_identity() {
        let inst = SpinGlassInstance::generate(4, 1).unwrap();
        let table = PhaseTable::new(&inst).unwrap();
        let params = QaoaParameters::single(5, 0.0).unwrap();
        let x = SpinConfiguration::new(9, 4).unwrap();
        let s = apply_symmetric_qaoa(x, &params, &table).unwrap();
        assert_eq!(s, Statevector::basis(4, x).unwrap());
    }

    #[test]
    fn symmetric_circuit_matches_dense_vtv() {
        let inst = SpinGlassInstance::generate(2, 8).unwrap();
        let table = PhaseTable::new(&inst).unwrap();
        let params = QaoaParameters::single(1, 0.25).unwrap();
        let alpha = alpha_norm(&inst).unwrap();
        let v = expm_minus_i(&(dense_h_prob(&inst) * c(alpha)), 0.25)
            * expm_minus_i(&dense_h_mix(2), 0.25);
        let u = v.transpose() * &v;
        for x in 0..4 {
            let s = apply_symmetric_qaoa(SpinConfiguration::new(x, 2).unwrap(), &params, &table)
                .unwrap();
            let col = u.column(x);
            for z in 0..4 {
                assert!((s.amplitudes()[z] - col[z]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn measurement_cases() {
        let b = Statevector::basis(3, SpinConfiguration::new(6, 3).unwrap()).unwrap();
        let p = measure_probabilities(&b);
        assert_eq!(p[6], 1.0);
        assert_eq!(p.iter().sum::<f64>(), 1.0);

        let mut s = Statevector::basis(5, SpinConfiguration::all_up()).unwrap();
        s.apply_mixer_layer(FRAC_PI_4);
        assert!(s.probabilities().iter().all(|&q| (q - 1.0 / 32.0).abs() < 1e-10));
    }

    #[test]
    fn sampling_one_hot_and_identity_circuit() {
        let mut rng = seeded(0);
        let x = SpinConfiguration::new(3, 3).unwrap();
        let b = Statevector::basis(3, x).unwrap();
        assert!((0..1000).all(|_| b.sample(&mut rng) == x));

        let inst = SpinGlassInstance::generate(3, 2).unwrap();
        let table = PhaseTable::new(&inst).unwrap();
        let s = apply_symmetric_qaoa(x, &QaoaParameters::single(3, 0.0).unwrap(), &table).unwrap();
        assert!((0..1000).all(|_| s.sample(&mut rng) == x));
    }

    #[test]
    fn sampling_frequencies_concentrate() {
        let s = random_state(3, 17);
        let p = s.probabilities();
        let mut counts = [0usize; 8];
        let mut rng = seeded(5);
        let draws = 100_000;
        for _ in 0..draws {
            counts[s.sample(&mut rng).index()] += 1;
        }
        let bound = 4.0 / (draws as f64).sqrt();
        for z in 0..8 {
            assert!((counts[z] as f64 / draws as f64 - p[z]).abs() < bound);
        }
    }
}
