//! Spin-glass instances and their Boltzmann distributions.

use alloc::vec::Vec;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng;

/// Largest `n` for which full-distribution enumeration is attempted.
pub const DISTRIBUTION_CAP: usize = 20;

/// One of the `2ⁿ` classical spin states.
///
/// Bit `j` of the index (least significant first) is 0 for spin `+1` and 1 for
/// spin `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinConfiguration(usize);

impl SpinConfiguration {
    pub fn new(index: usize, n: usize) -> Result<Self> {
        if n >= usize::BITS as usize || index >> n != 0 {
            return Err(Error::ConfigurationOutOfRange { index, n });
        }
        Ok(Self(index))
    }

    /// All spins up.
    pub const fn all_up() -> Self {
        Self(0)
    }

    /// Builds a configuration from `±1` spins, `spins[j]` being spin `j`.
    pub fn from_spins(spins: &[i8]) -> Result<Self> {
        let mut index = 0usize;
        for (j, &s) in spins.iter().enumerate() {
            match s {
                1 => {}
                -1 => index |= 1 << j,
                _ => return Err(Error::InvalidArgument("spins must be +1 or -1")),
            }
        }
        Self::new(index, spins.len())
    }

    /// Unchecked; callers guarantee `index < 2ⁿ`.
    pub(crate) const fn from_index(index: usize) -> Self {
        Self(index)
    }

    pub const fn index(self) -> usize {
        self.0
    }

    /// Spin `j` as `+1.0` or `-1.0`.
    #[inline]
    pub fn spin(self, j: usize) -> f64 {
        spin_of(self.0, j)
    }

    pub const fn flipped(self, j: usize) -> Self {
        Self(self.0 ^ (1 << j))
    }

    /// Global spin flip within `n` spins.
    pub const fn inverted(self, n: usize) -> Self {
        Self(self.0 ^ ((1 << n) - 1))
    }
}

#[inline]
fn spin_of(index: usize, j: usize) -> f64 {
    if (index >> j) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Magnetization `(1/n) Σ x_j` of a configuration.
pub fn magnetization(config: SpinConfiguration, n: usize) -> f64 {
    let down = (config.0 & low_mask(n)).count_ones() as f64;
    (n as f64 - 2.0 * down) / n as f64
}

fn low_mask(n: usize) -> usize {
    if n >= usize::BITS as usize {
        usize::MAX
    } else {
        (1 << n) - 1
    }
}

/// Position of `J_jk` (`j > k`) in the packed coupling vector.
///
/// Order is row-major over the strict lower triangle:
/// `(1,0), (2,0), (2,1), (3,0), …`.
#[inline]
pub const fn pair_index(j: usize, k: usize) -> usize {
    j * (j - 1) / 2 + k
}

/// All-to-all Ising spin glass `E(x) = −Σ_{j>k} J_jk x_j x_k − Σ_j h_j x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinGlassInstance {
    n: usize,
    couplings: Vec<f64>,
    fields: Vec<f64>,
    seed: u64,
}

impl SpinGlassInstance {
    /// Builds an instance from packed couplings (see [`pair_index`]) and fields.
    pub fn new(n: usize, couplings: Vec<f64>, fields: Vec<f64>, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1"));
        }
        if couplings.len() != n * (n - 1) / 2 {
            return Err(Error::SizeMismatch {
                expected: n * (n - 1) / 2,
                found: couplings.len(),
            });
        }
        if fields.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                found: fields.len(),
            });
        }
        if couplings.iter().chain(&fields).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("coefficients must be finite"));
        }
        Ok(Self {
            n,
            couplings,
            fields,
            seed,
        })
    }

    /// Draws every `J_jk` and `h_j` independently from the standard normal.
    ///
    /// The stream is `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha 0.9) fed
    /// through `rand_distr::StandardNormal` (rand_distr 0.5, ziggurat).
    /// Couplings are drawn first in packed order, then the fields. Changing
    /// either crate version may change instances.
    pub fn generate(n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1"));
        }
        let mut rng = rng::seeded(seed);
        let couplings = (0..n * (n - 1) / 2)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let fields = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        Self::new(n, couplings, fields, seed)
    }

    /// Instance with every coefficient zero. Flat energy landscape.
    pub fn zero(n: usize) -> Result<Self> {
        Self::new(n, alloc::vec![0.0; n * n.saturating_sub(1) / 2], alloc::vec![0.0; n], 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `J_jk` for `j ≠ k`, symmetric in its arguments.
    pub fn coupling(&self, j: usize, k: usize) -> f64 {
        match j.cmp(&k) {
            core::cmp::Ordering::Greater => self.couplings[pair_index(j, k)],
            core::cmp::Ordering::Less => self.couplings[pair_index(k, j)],
            core::cmp::Ordering::Equal => 0.0,
        }
    }

    /// `Σ J² + Σ h²`, the squared Frobenius norm of `H_prob` divided by `2ⁿ`.
    pub fn coefficient_norm_sqr(&self) -> f64 {
        self.couplings.iter().chain(&self.fields).map(|v| v * v).sum()
    }

    pub fn is_degenerate(&self) -> bool {
        self.couplings.iter().chain(&self.fields).all(|&v| v == 0.0)
    }

    pub fn num_states(&self) -> usize {
        1 << self.n
    }

    /// Energy of a configuration with index below `2ⁿ`.
    pub fn energy(&self, config: SpinConfiguration) -> f64 {
        debug_assert!(config.0 >> self.n == 0);
        let z = config.0;
        let mut pair = 0.0;
        let mut at = 0;
        for j in 1..self.n {
            let sj = spin_of(z, j);
            let row = &self.couplings[at..at + j];
            let mut acc = 0.0;
            for (k, &jk) in row.iter().enumerate() {
                acc += jk * spin_of(z, k);
            }
            pair += sj * acc;
            at += j;
        }
        let field: f64 = self
            .fields
            .iter()
            .enumerate()
            .map(|(j, &h)| h * spin_of(z, j))
            .sum();
        -pair - field
    }

    /// Energies of all `2ⁿ` configurations, indexed by configuration.
    pub fn energies(&self) -> Vec<f64> {
        (0..self.num_states())
            .map(|z| self.energy(SpinConfiguration(z)))
            .collect()
    }
}

/// Boltzmann distribution `μ(x) ∝ exp(−E(x)/T)` over an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BoltzmannTarget {
    instance: SpinGlassInstance,
    temperature: f64,
}

impl BoltzmannTarget {
    pub fn new(instance: SpinGlassInstance, temperature: f64) -> Result<Self> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidArgument("temperature must be positive and finite"));
        }
        Ok(Self {
            instance,
            temperature,
        })
    }

    pub fn instance(&self) -> &SpinGlassInstance {
        &self.instance
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn n(&self) -> usize {
        self.instance.n
    }

    /// Metropolis acceptance `min(1, exp((E(x) − E(x′))/T))`.
    #[inline]
    pub fn acceptance(&self, energy_from: f64, energy_to: f64) -> f64 {
        metropolis_acceptance(energy_from, energy_to, self.temperature)
    }

    /// Enumerates the distribution, refusing `n` above [`DISTRIBUTION_CAP`].
    pub fn enumerate(&self) -> Result<ExactTarget> {
        self.enumerate_with_cap(DISTRIBUTION_CAP)
    }

    pub fn enumerate_with_cap(&self, cap: usize) -> Result<ExactTarget> {
        let n = self.instance.n;
        if n > cap {
            return Err(Error::EnumerationInfeasible { n, cap });
        }
        let energies = self.instance.energies();
        let log_mu = log_boltzmann(&energies, self.temperature);
        let mu = log_mu.iter().map(|&l| libm::exp(l)).collect();
        Ok(ExactTarget {
            n,
            temperature: self.temperature,
            energies,
            log_mu,
            mu,
        })
    }
}

#[inline]
pub(crate) fn metropolis_acceptance(energy_from: f64, energy_to: f64, temperature: f64) -> f64 {
    let delta = energy_to - energy_from;
    if delta <= 0.0 {
        1.0
    } else {
        libm::exp(-delta / temperature)
    }
}

/// Normalized `ln μ` via log-sum-exp.
fn log_boltzmann(energies: &[f64], temperature: f64) -> Vec<f64> {
    let max = energies
        .iter()
        .map(|&e| -e / temperature)
        .fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = energies
        .iter()
        .map(|&e| libm::exp(-e / temperature - max))
        .sum();
    let log_z = max + libm::log(sum);
    energies.iter().map(|&e| -e / temperature - log_z).collect()
}

/// Fully enumerated Boltzmann target: energies, `ln μ` and `μ` for every state.
#[derive(Debug, Clone)]
pub struct ExactTarget {
    n: usize,
    temperature: f64,
    energies: Vec<f64>,
    log_mu: Vec<f64>,
    mu: Vec<f64>,
}

impl ExactTarget {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn log_probabilities(&self) -> &[f64] {
        &self.log_mu
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.mu
    }

    /// `A(to | from)` for the Metropolis rule.
    #[inline]
    pub fn acceptance(&self, from: usize, to: usize) -> f64 {
        metropolis_acceptance(self.energies[from], self.energies[to], self.temperature)
    }

    /// `Σ_x μ(x) m(x)`.
    pub fn average_magnetization(&self) -> f64 {
        self.mu
            .iter()
            .enumerate()
            .map(|(z, &p)| p * magnetization(SpinConfiguration(z), self.n))
            .sum()
    }
}

/// `μ(x)` for all `2ⁿ` states.
pub fn exact_distribution(target: &BoltzmannTarget) -> Result<Vec<f64>> {
    Ok(target.enumerate()?.mu)
}

/// Exact `⟨m⟩ = Σ_x μ(x) m(x)` by enumeration.
pub fn exact_average_magnetization(target: &BoltzmannTarget) -> Result<f64> {
    Ok(target.enumerate()?.average_magnetization())
}
