// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

//! Runs all nine acceptance criteria and prints one line per criterion.
//!
//! `ADIABAT_ACCEPTANCE=3,7` restricts the run to the listed criteria.

use std::process::ExitCode;

use adiabat::acceptance::{run, DEFAULT_SEED};

fn main() -> ExitCode {
    let ids: Vec<u8> = std::env::var("ADIABAT_ACCEPTANCE")
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect())
        .unwrap_or_default();
    let outcomes = run(&ids, DEFAULT_SEED);
    for o in &outcomes {
        println!("{o}");
    }
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id.to_string()).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        outcomes.len() - failed.len(),
        failed.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(" ({})", failed.join(", "))
        }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
