// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

//! Experiment configs, ε-scans and reports on top of the `adiabat` library.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::RunOptions;
pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
pub use report::Report;
