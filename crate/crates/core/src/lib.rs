//! Markov chain Monte Carlo over classical Ising spin glasses with proposals
//! drawn from a symmetric QAOA-type circuit, simulated as a statevector.
//!
//! The crate is `no_std` (it needs `alloc`) and holds only the numerics:
//!
//! - [`ising`]: spin-glass instances, energies, exact Boltzmann enumeration.
//! - [`statevector`]: the `U = VᵀV` circuit on `2ⁿ` amplitudes.
//! - [`proposal`]: local, uniform and circuit proposal kernels, sampled or as
//!   an exact `2ⁿ × 2ⁿ` matrix.
//! - [`mcmc`]: Metropolis chains and the on-line acceptance-rate estimator.
//! - [`spectral`]: exact transition matrices, acceptance rate and the
//!   absolute spectral gap.
//! - [`optimize`]: the search for the smallest positive acceptance-rate
//!   minimizer θ*.
//! - [`fit`]: scaling-law and `a/p` least-squares fits.
//!
//! Spin convention: bit `j` of a configuration index (least significant bit
//! first) set to 0 means spin `+1`, set to 1 means spin `-1`. With this choice
//! `Z|0⟩ = +|0⟩`, so the diagonal of the problem Hamiltonian equals the
//! classical energy.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod eigen;
pub mod error;
pub mod fit;
pub mod ising;
pub mod mcmc;
pub mod optimize;
pub mod proposal;
pub mod rng;
pub mod scalar;
pub mod spectral;
pub mod statevector;

pub use error::{Error, Result};
pub use ising::{BoltzmannTarget, ExactTarget, SpinConfiguration, SpinGlassInstance};
pub use mcmc::{ChainState, ChainTrace};
pub use optimize::{OptimizedTheta, SampledSeeds, SearchMode, ThetaSearchConfig};
pub use proposal::{ProposalKernel, ProposalKind, ProposalMatrix};
pub use spectral::{SymmetrizedMatrix, TransitionMatrix};
pub use statevector::{PhaseTable, QaoaParameters, Statevector};
