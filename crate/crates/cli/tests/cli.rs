// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::process::{Command, Output, Stdio};

use adiabat::fit::{GrowthModel, SeriesPoint};
use adiabat_cli::commands::{self, example_config, RunOptions};
use adiabat_cli::config::{ExperimentConfig, FamilySpec, MatrixSpec};
use adiabat_cli::report::{Record, SummaryValue, CSV_HEADER};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::Value;

const TWO_LEVEL: &str = r#"
schema_version = 1
id = "tl"
epsilon_grid = [0.1, 0.085, 0.07, 0.06]
q_max = 8

[family]
kind = "two_level"
delta = 0.2
coupling = 1.0
"#;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adiabat"))
        .args(args)
        .env_remove("ADIABAT_TOL")
        .env_remove("ADIABAT_WORKERS")
        .output()
        .unwrap()
}

fn write_config(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|_| panic!("stderr: {}", String::from_utf8_lossy(&o.stderr)))
}

#[test]
fn config_roundtrip_is_identity() {
    let mut configs: Vec<ExperimentConfig> =
        ["intro", "nilpotent", "two_level"].iter().map(|n| example_config(n).unwrap().0).collect();
    let mut c = ExperimentConfig::parse(TWO_LEVEL).unwrap();
    c.family = FamilySpec::Polynomial {
        coeffs: vec![
            MatrixSpec {
                re: vec![vec![0.0, 1.0], vec![0.0, 0.0]],
                im: Some(vec![vec![0.5, 0.0], vec![0.0, -0.25]]),
            },
            MatrixSpec {
                re: vec![vec![1.0, 0.0], vec![0.0, -1.0]],
                im: None,
            },
        ],
    };
    c.nilpotent.perturbation = Some(FamilySpec::Constant {
        h0: MatrixSpec {
            re: vec![vec![0.0, -1.0], vec![1.0, 0.0]],
            im: None,
        },
    });
    c.seed = Some(7);
    configs.push(c);
    for c in configs {
        let text = c.to_toml();
        let back = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(back, c, "{text}");
        assert_eq!(back.to_toml(), text);
    }
}

#[test]
fn decompose_intro_has_double_zero_and_unit_gap() {
    let (c, _) = example_config("intro").unwrap();
    let r = commands::run_decompose(&c, &RunOptions::default()).unwrap();
    assert_eq!(r.records.len(), c.grid_size);
    for rec in &r.records {
        let Record::Node(n) = rec else { panic!("node records only") };
        assert_eq!(n.multiplicities, vec![2, 1]);
        assert_eq!(n.nilpotency_indices, vec![2, 1]);
        assert!(n.eigenvalues[0].norm() < 1e-9 && (n.eigenvalues[1] - 1.0).norm() < 1e-9);
        assert!((n.min_gap.unwrap() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn decompose_two_level_gap_matches_eigensolve() {
    let c = ExperimentConfig::parse(TWO_LEVEL).unwrap();
    let r = commands::run_decompose(&c, &RunOptions::default()).unwrap();
    for rec in &r.records {
        let Record::Node(n) = rec else { panic!() };
        // H = [[h, 1/2], [1/2, -h]] has eigenvalues ±sqrt(h² + 1/4)
        let h = 0.5 * ((n.t - 0.5) / 0.2).tanh();
        let want = 2.0 * (h * h + 0.25).sqrt();
        assert!((n.min_gap.unwrap() - want).abs() < 1e-10);
        assert!(n.min_gap.unwrap() >= 1.0 - 1e-12);
    }
}

#[test]
fn decompose_zero_matrix_is_one_group() {
    let mut c = ExperimentConfig::parse(TWO_LEVEL).unwrap();
    c.family = FamilySpec::Constant {
        h0: MatrixSpec {
            re: vec![vec![0.0; 3]; 3],
            im: None,
        },
    };
    let r = commands::run_decompose(&c, &RunOptions::default()).unwrap();
    let Record::Node(n) = &r.records[0] else { panic!() };
    assert_eq!(n.multiplicities, vec![3]);
    assert_eq!(n.nilpotency_indices, vec![1]);
    assert_eq!(n.eigenvalues[0].norm(), 0.0);
    assert!(n.min_gap.is_none());
}

#[test]
fn superadiabatic_constant_family_is_trivially_converged() {
    let mut c = ExperimentConfig::parse(TWO_LEVEL).unwrap();
    c.family = FamilySpec::Constant {
        h0: MatrixSpec {
            re: vec![vec![1.0, 1.0], vec![0.0, -1.0]],
            im: None,
        },
    };
    let r = commands::run_superadiabatic_scan(&c, &RunOptions::default()).unwrap();
    assert_eq!(r.summary["trivially_converged"], SummaryValue::Flag(true));
    let rows: Vec<_> = r.scan_rows().collect();
    assert_eq!(rows.len(), 4);
    for s in rows {
        assert_eq!(s.q_star, 0);
        assert!(s.deltas.iter().all(|&d| d == 0.0));
    }
}

#[test]
fn superadiabatic_scan_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("scan.csv");
    let json = dir.path().join("scan.json");
    let body = format!(
        "{TWO_LEVEL}\n[[outputs]]\nkind = \"csv\"\npath = \"{}\"\n\n[[outputs]]\nkind = \"json\"\npath = \"{}\"\n",
        csv.display(),
        json.display()
    );
    let cfg = write_config(&dir, "tl.toml", &body);
    let o = bin(&["superadiabatic", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let total: usize = report["records"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["record"] == "scan")
        .map(|r| r["deltas"].as_array().unwrap().len())
        .sum();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), total);
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f.len(), 6);
        let eps: f64 = f[0].parse().unwrap();
        assert!(f[0].contains('e') && eps > 0.0);
        f[1].parse::<usize>().unwrap();
        for x in &f[2..] {
            x.parse::<f64>().unwrap();
        }
    }
    assert_eq!(report["schema_version"], 1);
    assert!(report["fits"]["kappa"]["r_squared"].as_f64().unwrap() > 0.9);
}

#[test]
fn scan_records_errors_as_rows() {
    // gap floor above the two-level gap: every ε fails at level 0
    let c = ExperimentConfig::parse(&TWO_LEVEL.replace("q_max = 8", "q_max = 8\ngap_floor = 5.0")).unwrap();
    let r = commands::run_superadiabatic_scan(&c, &RunOptions::default()).unwrap();
    assert_eq!(r.records.len(), 4);
    for rec in &r.records {
        let Record::Failed(f) = rec else { panic!("expected failures") };
        assert_eq!(f.kind, "gap_violation");
        assert!(f.epsilon.is_some());
    }
    assert!(r.fit_errors.contains_key("kappa"));
}

#[test]
fn nilpotent_scan_rows() {
    let opts = RunOptions::default();
    let (c, _) = example_config("nilpotent").unwrap();
    let r = commands::run_nilpotent_scan(&c, &opts).unwrap();
    let SummaryValue::Number(beta) = r.summary["beta"] else { panic!() };
    assert!((beta - 0.5).abs() <= 0.03);
    let closed: Vec<f64> = r
        .records
        .iter()
        .filter_map(|x| match x {
            Record::Comparison(c) => Some(c.rel_error),
            _ => None,
        })
        .collect();
    assert_eq!(closed.len(), 5);
    assert!(closed.iter().all(|&e| e < 1e-8));

    let zero = |n| MatrixSpec {
        re: vec![vec![0.0; n]; n],
        im: None,
    };
    let mut c0 = c.clone();
    c0.family = FamilySpec::Constant { h0: zero(2) };
    c0.nilpotent.perturbation = Some(FamilySpec::Constant {
        h0: MatrixSpec {
            re: vec![vec![0.0, -1.0], vec![1.0, 0.0]],
            im: None,
        },
    });
    let r = commands::run_nilpotent_scan(&c0, &opts).unwrap();
    assert!(r.records.iter().any(|x| matches!(x, Record::Dichotomy(d) if d.verdict == adiabat::nilpotent::Verdict::Bounded)));
    assert_eq!(r.summary["bounded"], SummaryValue::Flag(true));

    let mut c3 = c.clone();
    c3.family = FamilySpec::Constant {
        h0: MatrixSpec {
            re: vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0; 3]],
            im: None,
        },
    };
    let r = commands::run_nilpotent_scan(&c3, &opts).unwrap();
    assert_eq!(r.summary["nilpotency_index"], SummaryValue::Number(3.0));
    let p = match r.fits["power_law"].params {
        adiabat::fit::FitParams::PowerLaw { p, .. } => p,
        other => panic!("{other:?}"),
    };
    assert!((p - 2.0).abs() < 0.05, "slope {p}");
}

fn series(eps: &[f64], f: impl Fn(f64) -> f64) -> Vec<SeriesPoint> {
    eps.iter()
        .map(|&e| SeriesPoint {
            epsilon: e,
            value: 1.0,
            log_scale: f(e),
        })
        .collect()
}

#[test]
fn fit_recovers_known_laws() {
    let eps = [0.2, 0.1, 0.07, 0.05, 0.03];
    let f = commands::run_fit(&series(&eps, |e| -2.0 / e), GrowthModel::ExpInverseEps).unwrap();
    assert!((f.kappa().unwrap() - 2.0).abs() < 1e-6);

    let eps = [0.2, 0.1, 0.05, 0.02, 0.01, 0.005];
    let s = series(&eps, |e| 5f64.ln() + 3.0 / e.powf(0.4));
    let (c, d, beta) = commands::run_fit(&s, GrowthModel::StretchedExp).unwrap().stretched().unwrap();
    assert!((c - 5.0).abs() < 1e-3 && (d - 3.0).abs() < 1e-3 && (beta - 0.4).abs() < 1e-3, "{c} {d} {beta}");

    let mut rng = StdRng::seed_from_u64(11);
    let eps = [0.2, 0.15, 0.1, 0.07, 0.05, 0.035];
    let noisy: Vec<SeriesPoint> = eps
        .iter()
        .map(|&e| SeriesPoint {
            epsilon: e,
            value: (-1.0 / e).exp() * (1.0 + rng.gen_range(-0.05..0.05)),
            log_scale: 0.0,
        })
        .collect();
    let f = commands::run_fit(&noisy, GrowthModel::ExpInverseEps).unwrap();
    assert!((f.kappa().unwrap() - 1.0).abs() <= 0.15 && f.r_squared >= 0.95);

    let flat = series(&eps, |_| 0.3);
    let e = commands::run_fit(&flat, GrowthModel::ExpInverseEps).unwrap_err();
    assert_eq!(e.kind(), "degenerate_data");
    let e = commands::run_fit(&flat[..3], GrowthModel::ExpInverseEps).unwrap_err();
    assert_eq!(e.kind(), "insufficient_data");
}

#[test]
fn fit_subcommand_reads_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_adiabat"))
        .args(["fit", "-", "--model", "exp_inverse_eps"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut body = String::from("epsilon,value,log_scale\n");
    for e in [0.2, 0.1, 0.05, 0.025] {
        body.push_str(&format!("{e},1.0,{}\n", -0.5 / e));
    }
    child.stdin.take().unwrap().write_all(body.as_bytes()).unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["params"]["kappa"].as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(&dir, "bad.toml", &TWO_LEVEL.replace("schema_version = 1", "schema_version = 2"));
    let o = bin(&["decompose", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"]["kind"], "config");

    let o = bin(&["decompose", "/nonexistent/x.toml"]);
    assert_eq!(o.status.code(), Some(2));

    let gap = write_config(&dir, "gap.toml", &TWO_LEVEL.replace("q_max = 8", "gap_floor = 5.0"));
    let o = bin(&["decompose", &gap]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr_json(&o);
    assert_eq!(err["error"]["kind"], "gap_violation");
    assert!(err["error"]["message"].as_str().unwrap().contains("at t = 0"));

    let o = bin(&["example", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    let o = bin(&["fit", "/nonexistent.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic_and_tol_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "tl.toml", TWO_LEVEL);
    let a = bin(&["evolve", &cfg]);
    let b = bin(&["evolve", &cfg]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["environment"]["tol"], 1e-10);

    let o = Command::new(env!("CARGO_BIN_EXE_adiabat"))
        .args(["evolve", &cfg])
        .env("ADIABAT_TOL", "1e-8")
        .env("ADIABAT_WORKERS", "1")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["environment"]["tol"], 1e-8);
    let o = bin(&["--tol", "1e-7", "evolve", &cfg]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["environment"]["tol"], 1e-7);
    // a self-adjoint family keeps the propagator unitary
    for r in v["records"].as_array().unwrap() {
        assert!((r["evolution"]["norm"].as_f64().unwrap() - 1.0).abs() < 1e-5);
    }
}

#[test]
fn emitted_example_config_runs() {
    let o = bin(&["example", "intro", "--emit-config"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let c = ExperimentConfig::parse(&text).unwrap();
    let r = commands::run_evolve(&c, &RunOptions::default()).unwrap();
    let SummaryValue::Number(x) = r.summary["transition_exponent"] else { panic!() };
    assert!((x - 1.0).abs() < 0.05, "exponent {x}");
}

#[test]
fn acceptance_subcommand_runs_selected_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("acc.json");
    let o = bin(&["acceptance", "--ids", "3,9", "--json", json.to_str().unwrap()]);
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("criterion 3 [PASS]") && out.contains("criterion 9 [PASS]"), "{out}");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
}

#[test]
fn gap_closed_is_a_row_not_a_crash() {
    let c = ExperimentConfig::parse(&TWO_LEVEL.replace("[0.1, 0.085, 0.07, 0.06]", "[0.2, 0.15, 0.1]")).unwrap();
    let r = commands::run_superadiabatic_scan(&c, &RunOptions::default()).unwrap();
    let kinds: Vec<&str> = r
        .records
        .iter()
        .map(|x| match x {
            Record::Scan(_) => "scan",
            Record::Failed(f) => f.kind.as_str(),
            _ => "other",
        })
        .collect();
    assert_eq!(kinds, ["scan", "gap_closed", "scan"]);
}
