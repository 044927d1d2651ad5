// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

//! Declarative experiment configuration, stored as TOML.
//!
//! ```toml
//! schema_version = 1
//! id = "two_level_scan"
//! epsilon_grid = [0.1, 0.07, 0.05, 0.035, 0.025]
//! grid_size = 65
//!
//! [family]
//! kind = "two_level"
//! delta = 0.2
//! coupling = 1.0
//!
//! [[outputs]]
//! kind = "csv"
//! path = "scan.csv"
//! ```

use std::path::Path;

use adiabat::families::{GeneratorFamily, IntroParams};
use adiabat::{ComplexMatrix, C64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const MIN_GRID_SIZE: usize = 33;

fn default_grid_size() -> usize {
    65
}
fn default_tol() -> f64 {
    1e-10
}
fn default_q_max() -> usize {
    16
}
fn default_gap_floor() -> f64 {
    0.5
}
fn default_end() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub id: String,
    pub epsilon_grid: Vec<f64>,
    #[serde(default = "default_grid_size")]
    pub grid_size: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_q_max")]
    pub q_max: usize,
    #[serde(default = "default_gap_floor")]
    pub gap_floor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub family: FamilySpec,
    #[serde(default)]
    pub evolve: EvolveSpec,
    #[serde(default)]
    pub nilpotent: NilpotentSpec,
    #[serde(default)]
    pub outputs: Vec<OutputSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    IntroExample {
        a: f64,
        k: f64,
        #[serde(default)]
        a_im: f64,
        #[serde(default)]
        k_im: f64,
    },
    TwoLevel {
        delta: f64,
        coupling: f64,
    },
    NilpotentExample,
    Constant {
        h0: MatrixSpec,
    },
    Polynomial {
        coeffs: Vec<MatrixSpec>,
    },
    RotatedConstant {
        h0: MatrixSpec,
        l: MatrixSpec,
    },
}

/// Square matrix as real rows plus optional imaginary rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSpec {
    #[serde(default)]
    pub s: f64,
    #[serde(default = "default_end")]
    pub t: f64,
}

impl Default for EvolveSpec {
    fn default() -> Self {
        Self { s: 0.0, t: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NilpotentSpec {
    /// Bounded perturbation `A(t)` added as `εA`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<FamilySpec>,
    #[serde(default)]
    pub s: f64,
    #[serde(default = "default_end")]
    pub t: f64,
}

impl Default for NilpotentSpec {
    fn default() -> Self {
        Self {
            perturbation: None,
            s: 0.0,
            t: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub kind: OutputKind,
    pub path: String,
}

impl MatrixSpec {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        let re = (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect();
        let im: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect();
        let any_im = im.iter().flatten().any(|&x| x != 0.0);
        Self {
            re,
            im: any_im.then_some(im),
        }
    }

    pub fn to_matrix(&self, field: &str) -> CliResult<ComplexMatrix> {
        let n = self.re.len();
        if n == 0 {
            return Err(CliError::Config(format!("{field}: empty matrix")));
        }
        let im = match &self.im {
            Some(im) => im.clone(),
            None => vec![vec![0.0; n]; n],
        };
        if im.len() != n {
            return Err(CliError::Config(format!("{field}.im: expected {n} rows, found {}", im.len())));
        }
        let mut rows = Vec::with_capacity(n);
        for (i, (r, s)) in self.re.iter().zip(&im).enumerate() {
            if r.len() != n || s.len() != n {
                return Err(CliError::Config(format!("{field}: row {i} is not of length {n}")));
            }
            if r.iter().chain(s).any(|x| !x.is_finite()) {
                return Err(CliError::Config(format!("{field}: row {i} has a non-finite entry")));
            }
            rows.push(r.iter().zip(s).map(|(&a, &b)| C64::new(a, b)).collect());
        }
        ComplexMatrix::from_rows(&rows).map_err(|e| CliError::Config(format!("{field}: {e}")))
    }
}

impl FamilySpec {
    pub fn build(&self, field: &str) -> CliResult<GeneratorFamily> {
        let wrap = |e: adiabat::Error| CliError::Config(format!("{field}: {e}"));
        match self {
            Self::IntroExample { a, k, a_im, k_im } => Ok(GeneratorFamily::intro_example(IntroParams::new(
                C64::new(*a, *a_im),
                C64::new(*k, *k_im),
            ))),
            Self::TwoLevel { delta, coupling } => GeneratorFamily::two_level(*delta, *coupling).map_err(wrap),
            Self::NilpotentExample => Ok(GeneratorFamily::nilpotent_example()),
            Self::Constant { h0 } => Ok(GeneratorFamily::constant(h0.to_matrix(&format!("{field}.h0"))?)),
            Self::Polynomial { coeffs } => {
                let m = coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c.to_matrix(&format!("{field}.coeffs[{i}]")))
                    .collect::<CliResult<Vec<_>>>()?;
                GeneratorFamily::polynomial_family(m).map_err(wrap)
            }
            Self::RotatedConstant { h0, l } => GeneratorFamily::rotated_constant(
                h0.to_matrix(&format!("{field}.h0"))?,
                l.to_matrix(&format!("{field}.l"))?,
            )
            .map_err(wrap),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "schema_version: unsupported version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.epsilon_grid.is_empty() {
            return bad("epsilon_grid: must not be empty".into());
        }
        for (i, &e) in self.epsilon_grid.iter().enumerate() {
            if !(e > 0.0 && e <= 1.0) {
                return bad(format!("epsilon_grid[{i}]: {e} outside (0, 1]"));
            }
            if i > 0 && e >= self.epsilon_grid[i - 1] {
                return bad(format!(
                    "epsilon_grid[{i}]: {e} is not below {} (values must be distinct and descending)",
                    self.epsilon_grid[i - 1]
                ));
            }
        }
        if self.grid_size < MIN_GRID_SIZE || self.grid_size.is_multiple_of(2) {
            return bad(format!("grid_size: {} must be odd and at least {MIN_GRID_SIZE}", self.grid_size));
        }
        if !(self.tol > 0.0 && self.tol < 1e-2) {
            return bad(format!("tol: {} outside (0, 1e-2)", self.tol));
        }
        if self.q_max == 0 || self.q_max > 64 {
            return bad(format!("q_max: {} outside 1..=64", self.q_max));
        }
        if !(self.gap_floor > 0.0 && self.gap_floor.is_finite()) {
            return bad(format!("gap_floor: {} must be positive", self.gap_floor));
        }
        let times = [
            ("evolve.s", self.evolve.s),
            ("evolve.t", self.evolve.t),
            ("nilpotent.s", self.nilpotent.s),
            ("nilpotent.t", self.nilpotent.t),
        ];
        for (name, v) in times {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name}: {v} outside [0, 1]"));
            }
        }
        self.family.build("family")?;
        if let Some(p) = &self.nilpotent.perturbation {
            p.build("nilpotent.perturbation")?;
        }
        Ok(())
    }
}
