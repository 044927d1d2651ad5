// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

//! Versioned JSON report and the scan CSV.

use std::collections::BTreeMap;
use std::path::Path;

use adiabat::approximation::BundleSummary;
use adiabat::fit::GrowthFit;
use adiabat::nilpotent::{SupSample, Verdict};
use adiabat::propagator::EvolutionSummary;
use adiabat::scaled::ScaledValue;
use adiabat::C64;
use serde::Serialize;

use crate::config::{ExperimentConfig, OutputKind};
use crate::error::{error_kind, CliError, CliResult};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 6] = ["epsilon", "q", "delta", "error_q0", "error_qstar", "kappa_fit_r2"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Environment {
    pub tol: f64,
    pub grid_size: usize,
    pub gap_floor: f64,
    pub q_max: usize,
    pub seed: u64,
}

impl Environment {
    pub fn from_config(c: &ExperimentConfig, seed: u64) -> Self {
        Self {
            tol: c.tol,
            grid_size: c.grid_size,
            gap_floor: c.gap_floor,
            q_max: c.q_max,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub experiment_id: String,
    pub command: String,
    pub family: String,
    pub environment: Environment,
    pub records: Vec<Record>,
    pub fits: BTreeMap<String, GrowthFit>,
    /// Why a fit listed for the command could not be made.
    pub fit_errors: BTreeMap<String, String>,
    pub summary: BTreeMap<String, SummaryValue>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SummaryValue {
    Flag(bool),
    Number(f64),
    Text(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum Record {
    Node(NodeRecord),
    Evolution(EvolutionRecord),
    Scan(ScanRecord),
    Nilpotent(NilpotentRecord),
    Dichotomy(DichotomyRecord),
    Comparison(ComparisonRecord),
    Failed(FailedRecord),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeRecord {
    pub t: f64,
    pub eigenvalues: Vec<C64>,
    pub multiplicities: Vec<usize>,
    pub nilpotency_indices: Vec<usize>,
    pub min_gap: Option<f64>,
    pub omega: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvolutionRecord {
    pub evolution: EvolutionSummary,
    /// `‖P_j(t) U(t,s) P_k(s)‖` indexed `[j][k]`.
    pub transitions: Vec<Vec<ScaledValue>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRecord {
    pub epsilon: f64,
    pub grid_size: usize,
    pub q_star: usize,
    pub deltas: Vec<f64>,
    pub stopped_early: bool,
    pub trivially_converged: bool,
    pub error_q0: f64,
    pub error_qstar: f64,
    pub bundle: BundleSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NilpotentRecord {
    pub epsilon: f64,
    pub sup: SupSample,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DichotomyRecord {
    pub verdict: Verdict,
    pub s: f64,
    pub t: f64,
    pub ratio: f64,
    pub sup_n: f64,
    pub norms: Vec<ScaledValue>,
}

/// A numerical value next to its closed form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRecord {
    pub quantity: String,
    pub epsilon: f64,
    pub t: f64,
    pub numerical: ScaledValue,
    pub closed_form: ScaledValue,
    pub rel_error: f64,
}

/// An ε whose computation raised a library error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FailedRecord {
    pub epsilon: Option<f64>,
    pub kind: String,
    pub message: String,
}

impl FailedRecord {
    pub fn new(epsilon: Option<f64>, e: &adiabat::Error) -> Self {
        Self {
            epsilon,
            kind: error_kind(e),
            message: e.to_string(),
        }
    }
}

impl Report {
    pub fn new(config: &ExperimentConfig, command: &str, family: &str, seed: u64) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            experiment_id: config.id.clone(),
            command: command.into(),
            family: family.into(),
            environment: Environment::from_config(config, seed),
            records: Vec::new(),
            fits: BTreeMap::new(),
            fit_errors: BTreeMap::new(),
            summary: BTreeMap::new(),
        }
    }

    pub fn record_fit(&mut self, name: &str, r: adiabat::Result<GrowthFit>) {
        match r {
            Ok(f) => {
                self.fits.insert(name.into(), f);
            }
            Err(e) => {
                self.fit_errors.insert(name.into(), e.to_string());
            }
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn scan_rows(&self) -> impl Iterator<Item = &ScanRecord> {
        self.records.iter().filter_map(|r| match r {
            Record::Scan(s) => Some(s),
            _ => None,
        })
    }

    /// One row per (ε, q) of every successful scan record.
    pub fn to_csv(&self) -> String {
        let r2 = self.fits.get("kappa").map(|f| format_float(f.r_squared)).unwrap_or_default();
        let mut out = CSV_HEADER.join(",");
        out.push('\n');
        for s in self.scan_rows() {
            for (q, d) in s.deltas.iter().enumerate() {
                let row = [
                    format_float(s.epsilon),
                    q.to_string(),
                    format_float(*d),
                    format_float(s.error_q0),
                    format_float(s.error_qstar),
                    r2.clone(),
                ];
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        out
    }

    pub fn write_outputs(&self, config: &ExperimentConfig) -> CliResult<()> {
        for o in &config.outputs {
            let body = match o.kind {
                OutputKind::Json => self.to_json(),
                OutputKind::Csv => self.to_csv(),
            };
            write_file(Path::new(&o.path), &body)?;
        }
        Ok(())
    }
}

pub fn write_file(path: &Path, body: &str) -> CliResult<()> {
    std::fs::write(path, body).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// 17 significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_roundtrip_through_csv_format() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 6.02e23, 0.0] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            assert_eq!(s.split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
        }
    }
}
