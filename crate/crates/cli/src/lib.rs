//! Experiment harness for QAOA-proposal Metropolis sampling.
//!
//! Everything here is plumbing around [`qaoa_mc_core`]: instance files,
//! seeded sweeps over many instances, scaling fits, win fractions, θ* studies
//! and magnetization runs. Results are plain CSV rows written in a fixed
//! order, so a rerun with the same flags reproduces the files byte for byte.

pub mod analysis;
pub mod chain;
pub mod error;
pub mod files;
pub mod kernels;
pub mod magnetization;
pub mod records;
pub mod spec;
pub mod sweep;
pub mod theta_study;

pub use error::{HarnessError, Result};
pub use records::{ExperimentRecord, MSweepRecord, SampleBudget, ThetaRecord};
pub use spec::{Proposal, SweepSpec};
