//! Experiment reports and their CSV/JSON emission.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::theory::PredictionBundle;

use super::config::ScenarioConfig;

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("serialization failed: {0}")]
    Serialize(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format '{s}' (csv or json)")),
        }
    }
}

/// State at one recorded iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub k: u64,
    /// Diagonal of VᵀW(k)V in the eigenbasis of the target, one entry per eigenvalue.
    pub eig: Vec<f64>,
    /// Per-eigenvalue factor scalars: d, (d₁, d₂) or (d_1..d_N); empty for full-matrix runs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factors: Vec<Vec<f64>>,
    /// ½‖W − Ŵ‖_F².
    pub loss: f64,
    /// ‖W − W_LR‖_F / ‖W_LR‖_F, when the target carries noise.
    pub approx_error: Option<f64>,
    /// None for W = 0.
    pub effective_rank: Option<f64>,
}

/// Outcome of one invariant check. Unenforced checks are informational and do not affect the exit code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// None when the check could not be evaluated.
    pub passed: Option<bool>,
    pub enforced: bool,
    pub detail: String,
}

impl Check {
    pub fn enforced(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed: Some(passed), enforced: true, detail: detail.into() }
    }

    pub fn advisory(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed: Some(passed), enforced: false, detail: detail.into() }
    }

    pub fn skipped(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed: None, enforced: false, detail: detail.into() }
    }

    pub fn failed(&self) -> bool {
        self.enforced && self.passed == Some(false)
    }
}

/// First iteration at which eigenvalue `index` reaches the tolerance for `epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitTime {
    pub index: usize,
    pub lambda: f64,
    pub epsilon: f64,
    pub tolerance: f64,
    pub k: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Flow,
    Discrete,
}

/// Predicted plateau for rank L together with the simulated effective-rank deviation inside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauWindow {
    pub rank: usize,
    pub kind: WindowKind,
    /// Iteration windows [start, end]; end None means unbounded.
    pub windows: Vec<(u64, Option<u64>)>,
    pub bound: f64,
    /// Informational sharper bound, where one is available.
    pub bound_refined: Option<f64>,
    pub target_effective_rank: f64,
    /// max |r(W(k)) − r(Ŵ_L)| over the simulated iterations inside the windows.
    pub max_deviation: Option<f64>,
    /// Last iteration inspected; unbounded windows are truncated here.
    pub checked_until: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoiseSummary {
    pub rank: usize,
    pub best_k: u64,
    pub best_error: f64,
    pub final_error: f64,
    /// ‖Ξ_sym‖_F / ‖W_LR‖_F, the error of the fully fitted noisy target.
    pub noise_error: f64,
    /// Error of the best rank-L approximation of the noisy target.
    pub truncation_error: f64,
    /// Predicted discrete plateau [k_lo, k_hi] for L = rank(W_LR), when its preconditions hold and it is non-empty.
    pub window: Option<(f64, f64)>,
    pub best_k_in_window: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomInitRun {
    pub alpha: f64,
    pub seed: u64,
    /// Initial factor scalars α_j.
    pub initial_factors: Vec<f64>,
    /// Arrival iteration per eigenvalue (spectrum order).
    pub arrivals: Vec<Option<u64>>,
    /// Eigenvalue indices sorted by arrival; eigenvalues that never arrive go last.
    pub order: Vec<usize>,
    /// Pairs of same-sign eigenvalues where the smaller |λ| arrives strictly first.
    pub inversions: usize,
    /// Same count without the sign grouping.
    pub magnitude_inversions: usize,
    pub records: Vec<Record>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceProbe {
    pub depth: u32,
    pub lambda: f64,
    pub alpha: f64,
    /// "negative", "linear" or "unstable_fixed_point".
    pub case: String,
    pub threshold: f64,
    pub convergence_bound: f64,
    pub diverged_above: bool,
    pub converged_below: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ScenarioConfig,
    pub eta: f64,
    /// "decoupled" or "matrix".
    pub mode: String,
    /// Eigenvalues of the (possibly noisy) target, in column order of `eig`.
    pub target_eigenvalues: Vec<f64>,
    pub records: Vec<Record>,
    pub predictions: Vec<PredictionBundle>,
    pub hit_times: Vec<HitTime>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub plateaus: Vec<PlateauWindow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub denoise: Option<DenoiseSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub random_init: Vec<RandomInitRun>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        !self.checks.iter().any(Check::failed)
    }

    pub fn to_json(&self) -> Result<String, EmitError> {
        serde_json::to_string_pretty(self).map_err(|e| EmitError::Serialize(e.to_string()))
    }

    /// Header plus one line per record; eigenvalue columns follow the target.
    pub fn to_csv(&self) -> String {
        records_csv(&self.records, self.target_eigenvalues.len())
    }
}

/// 17 significant digits, enough to recover the f64 exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_float(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub fn records_csv(records: &[Record], columns: usize) -> String {
    let mut out = String::from("k");
    for i in 1..=columns {
        write!(out, ",eig_{i}").unwrap();
    }
    out.push_str(",loss,approx_error,effective_rank\n");
    for r in records {
        write!(out, "{}", r.k).unwrap();
        for v in &r.eig {
            write!(out, ",{}", fmt_float(*v)).unwrap();
        }
        writeln!(out, ",{},{},{}", fmt_float(r.loss), opt_float(r.approx_error), opt_float(r.effective_rank)).unwrap();
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<(), EmitError> {
    std::fs::write(path, text).map_err(|source| EmitError::Io { path: path.display().to_string(), source })
}

pub fn emit(report: &Report, format: Format, path: &Path) -> Result<(), EmitError> {
    let text = match format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json()?,
    };
    write_text(path, &text)
}
