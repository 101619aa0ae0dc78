//! Instance JSON and dense matrix dumps.

use std::fs;
use std::io::Write;
use std::path::Path;

use qaoa_mc_core::SpinGlassInstance;
use serde::{Deserialize, Serialize};

use crate::error::{io_error, HarnessError, Result};

/// On-disk instance. `couplings` is row-major over pairs `j > k`:
/// `(1,0), (2,0), (2,1), (3,0), …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub n: usize,
    pub seed: u64,
    pub couplings: Vec<f64>,
    pub fields: Vec<f64>,
}

impl From<&SpinGlassInstance> for InstanceFile {
    fn from(inst: &SpinGlassInstance) -> Self {
        Self {
            n: inst.n(),
            seed: inst.seed(),
            couplings: inst.couplings().to_vec(),
            fields: inst.fields().to_vec(),
        }
    }
}

impl TryFrom<InstanceFile> for SpinGlassInstance {
    type Error = HarnessError;

    fn try_from(f: InstanceFile) -> Result<Self> {
        Ok(SpinGlassInstance::new(f.n, f.couplings, f.fields, f.seed)?)
    }
}

pub fn instance_to_json(inst: &SpinGlassInstance) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&InstanceFile::from(inst))?;
    s.push('\n');
    Ok(s)
}

pub fn instance_from_json(text: &str) -> Result<SpinGlassInstance> {
    serde_json::from_str::<InstanceFile>(text)?.try_into()
}

pub fn write_instance(path: &Path, inst: &SpinGlassInstance) -> Result<()> {
    fs::write(path, instance_to_json(inst)?).map_err(io_error(path))
}

pub fn read_instance(path: &Path) -> Result<SpinGlassInstance> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    instance_from_json(&text)
}

/// Writes a row-major `dim × dim` matrix as CSV after one `#` comment line
/// carrying `description`.
pub fn write_matrix<W: Write>(mut sink: W, description: &str, dim: usize, rows: &[f64]) -> std::io::Result<()> {
    assert_eq!(rows.len(), dim * dim);
    writeln!(sink, "# {description}")?;
    for row in rows.chunks_exact(dim) {
        let mut first = true;
        for v in row {
            if !first {
                sink.write_all(b",")?;
            }
            write!(sink, "{v:e}")?;
            first = false;
        }
        sink.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads back [`write_matrix`] output as `(description, dim, rows)`.
pub fn read_matrix(text: &str) -> Result<(String, usize, Vec<f64>)> {
    let mut lines = text.lines();
    let description = lines
        .next()
        .and_then(|l| l.strip_prefix("# "))
        .ok_or_else(|| HarnessError::InvalidSpec("matrix file lacks a `#` header".into()))?
        .to_owned();
    let mut data = Vec::new();
    let mut dim = None;
    for line in lines {
        let row = line
            .split(',')
            .map(|t| t.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| HarnessError::InvalidSpec(format!("bad matrix entry: {e}")))?;
        if *dim.get_or_insert(row.len()) != row.len() {
            return Err(HarnessError::InvalidSpec("ragged matrix rows".into()));
        }
        data.extend(row);
    }
    let dim = dim.unwrap_or(0);
    if data.len() != dim * dim {
        return Err(HarnessError::InvalidSpec("matrix is not square".into()));
    }
    Ok((description, dim, data))
}
