//! CSV row types. Every harness output is a sequence of one of these.

use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{io_error, Result};
use crate::spec::Proposal;

pub const STATUS_OK: &str = "ok";
/// AR was flat in θ; the circuit ran at `θ_max / 2` instead of θ*.
pub const STATUS_DEGENERATE: &str = "degenerate_landscape";

/// One (instance, proposal) row of a spectral sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub n: usize,
    pub instance_seed: u64,
    pub proposal: Proposal,
    /// Circuit angle actually used (θ* for optimized, the frozen draw for
    /// random).
    pub theta: Option<f64>,
    pub delta: Option<f64>,
    pub exact_ar: Option<f64>,
    pub theta_star: Option<f64>,
    /// θ* came from the grid boundary rather than an interior minimum.
    pub boundary: Option<bool>,
    /// Seconds; only filled with `--timing`.
    pub wall_time: Option<f64>,
    pub status: String,
}

impl ExperimentRecord {
    pub fn is_ok(&self) -> bool {
        self.delta.is_some()
    }
}

/// Number of chain steps `M` behind an AR estimate; `Infinite` is exact AR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SampleBudget {
    Finite(usize),
    Infinite,
}

impl fmt::Display for SampleBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(m) => write!(f, "{m}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for SampleBudget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "inf" | "∞" => Ok(Self::Infinite),
            t => match t.parse::<usize>() {
                Ok(0) => Err("M must be at least 1".into()),
                Ok(m) => Ok(Self::Finite(m)),
                Err(_) => Err(format!("expected a positive integer or `inf`, got `{t}`")),
            },
        }
    }
}

impl TryFrom<String> for SampleBudget {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<SampleBudget> for String {
    fn from(m: SampleBudget) -> String {
        m.to_string()
    }
}

/// One (instance, M) row of an M-sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MSweepRecord {
    pub n: usize,
    pub instance_seed: u64,
    pub m: SampleBudget,
    pub theta_star: Option<f64>,
    /// AR at θ* as seen by the search (an estimate for finite M).
    pub ar_at_star: Option<f64>,
    pub delta: Option<f64>,
    pub exact_ar: Option<f64>,
    pub boundary: Option<bool>,
    pub evaluations: Option<usize>,
    pub wall_time: Option<f64>,
    pub status: String,
}

/// One θ* search in a θ* study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaRecord {
    pub n: usize,
    pub p: usize,
    pub instance_seed: u64,
    pub theta_max: f64,
    pub theta_star: Option<f64>,
    pub ar_at_star: Option<f64>,
    pub boundary: Option<bool>,
    pub evaluations: Option<usize>,
    pub status: String,
}

/// Mean and spread of `δ` over the instances of one size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub label: String,
    pub n: usize,
    pub count: usize,
    pub mean_delta: f64,
    pub std_delta: f64,
    pub stderr_delta: f64,
}

/// `⟨δ⟩ ≈ 2^(−k n + c)` for one label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub label: String,
    pub k: f64,
    pub k_uncertainty: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `k_uniform / k`, when a uniform fit is present.
    pub ratio_to_uniform: Option<f64>,
    pub sizes: usize,
}

/// Fraction of instances of one size on which the optimized kernel has a
/// strictly larger `δ` than each competitor, and than all at once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinFraction {
    pub n: usize,
    pub instances: usize,
    pub beats_uniform: f64,
    pub beats_local: f64,
    pub beats_random: f64,
    pub beats_all: f64,
}

/// Mean and spread of θ* at one `(n, p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSummary {
    pub n: usize,
    pub p: usize,
    pub count: usize,
    pub mean_theta_star: f64,
    pub std_theta_star: f64,
    pub boundary_count: usize,
}

/// Per-step cross-chain statistics of the running magnetization estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnetizationRow {
    pub step: usize,
    pub proposal: Proposal,
    pub theta: Option<f64>,
    pub mean: f64,
    pub std: f64,
    pub stderr: f64,
    pub exact: f64,
}

/// One chain step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub state_index: usize,
    pub energy: f64,
    pub magnetization: f64,
    pub acceptance_prob: f64,
    pub accepted: bool,
    pub chain_id: usize,
    pub seed: u64,
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(io_error(path))?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(io_error(path))?;
    Ok(())
}

/// Writes to any sink; used for stdout and in tests.
pub fn write_csv_to<T: Serialize, W: Write>(sink: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(io_error("<sink>"))?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<Result<Vec<T>, _>>()?;
    Ok(rows)
}

/// Header names of a CSV file.
pub fn read_headers(path: &Path) -> Result<Vec<String>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.headers()?.iter().map(str::to_owned).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_budget_round_trip() {
        for s in ["8", "128", "inf"] {
            assert_eq!(s.parse::<SampleBudget>().unwrap().to_string(), s);
        }
        assert!("0".parse::<SampleBudget>().is_err());
        assert!("x".parse::<SampleBudget>().is_err());
        assert!(SampleBudget::Finite(1_000_000) < SampleBudget::Infinite);
    }

    #[test]
    fn optional_fields_are_blank() {
        let row = ExperimentRecord {
            n: 3,
            instance_seed: 9,
            proposal: Proposal::Uniform,
            theta: None,
            delta: Some(0.5),
            exact_ar: Some(0.25),
            theta_star: None,
            boundary: None,
            wall_time: None,
            status: STATUS_OK.into(),
        };
        let mut buf = Vec::new();
        write_csv_to(&mut buf, &[row.clone()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "n,instance_seed,proposal,theta,delta,exact_ar,theta_star,boundary,wall_time,status\n\
             3,9,uniform,,0.5,0.25,,,,ok\n"
        );
        let back: ExperimentRecord = csv::Reader::from_reader(text.as_bytes())
            .deserialize()
            .next()
            .unwrap()
            .unwrap();
        assert_eq!(back, row);
    }
}
