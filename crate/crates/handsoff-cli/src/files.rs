//! File formats: the plant spec, solution artifacts, verification reports,
//! and atomic writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use handsoff::matfun::validate_assumption;
use handsoff::solver::SolveReport;
use handsoff::{LtiSystem, PropertyReport, ValidatedSystem};

/// On-disk plant description: `{"A": [[...]], "B": [...], "T": 5.0, "N": 1000}`.
#[derive(Debug, Clone, Deserialize)]
pub struct SystemSpecFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "N", default)]
    pub default_cells: Option<usize>,
}

impl SystemSpecFile {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read system file {}: {e}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| format!("malformed system file {}: {e}", path.display()))
    }

    /// Build and validate the plant.
    pub fn build(&self) -> Result<ValidatedSystem, String> {
        let rows = self.a.len();
        if rows == 0 || self.a.iter().any(|r| r.len() != rows) {
            return Err("field A must be a nonempty square matrix".into());
        }
        let flat: Vec<f64> = self.a.iter().flatten().copied().collect();
        let a = DMatrix::from_row_slice(rows, rows, &flat);
        let b = DVector::from_column_slice(&self.b);
        let sys = LtiSystem::new(a, b, self.horizon).map_err(|e| e.to_string())?;
        validate_assumption(sys).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSection {
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "N")]
    pub cells: usize,
}

/// Solution artifact written by `solve`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionFile {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linf: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bang_off_bang_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase1_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terminal_residual: Option<Vec<f64>>,
    pub xi: Vec<f64>,
    pub grid: GridSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
}

impl SolutionFile {
    pub fn from_report(report: &SolveReport) -> Self {
        Self {
            status: "optimal".into(),
            value: Some(report.value),
            l1: Some(report.l1),
            l0: Some(report.l0),
            linf: Some(report.linf),
            bang_off_bang_fraction: Some(report.bang_off_bang_fraction),
            phase1_residual: None,
            terminal_residual: Some(report.terminal_residual.iter().copied().collect()),
            xi: report.xi.iter().copied().collect(),
            grid: GridSection {
                horizon: report.control.grid().horizon(),
                cells: report.control.grid().cells(),
            },
            u: Some(report.control.values().to_vec()),
        }
    }

    pub fn infeasible(xi: &[f64], horizon: f64, cells: usize, phase1_residual: f64) -> Self {
        Self {
            status: "infeasible".into(),
            value: None,
            l1: None,
            l0: None,
            linf: None,
            bang_off_bang_fraction: None,
            phase1_residual: Some(phase1_residual),
            terminal_residual: None,
            xi: xi.to_vec(),
            grid: GridSection { horizon, cells },
            u: None,
        }
    }
}

/// Verification report written by `verify`. Contains nothing volatile, so
/// identical invocations produce byte-identical files.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyFile {
    pub seed: u64,
    pub cells: usize,
    pub pass: bool,
    pub suites: Vec<PropertyReport>,
}

/// Serialize as pretty JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, String> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| format!("serialization failed: {e}"))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Write through a temporary file in the same directory, then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), String> {
    let tmp: PathBuf = {
        let mut name = path.file_name().unwrap_or_default().to_os_string();
        name.push(".tmp");
        path.with_file_name(name)
    };
    let write = || -> std::io::Result<()> {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    };
    write().map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Parse a comma-separated vector of reals.
pub fn parse_vector(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number {part:?}: {e}"))
        })
        .collect()
}
