// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

//! One function per subcommand. Each returns a [`Report`]; nothing here prints.

use std::io::Read;

use adiabat::acceptance::{self, CriterionOutcome};
use adiabat::approximation::{build_approximation, transition_amplitude, BundleSummary};
use adiabat::families::{GeneratorFamily, IntroParams};
use adiabat::fit::{fit, fit_exp_inverse_eps, linear_fit, GrowthFit, GrowthModel, SeriesPoint};
use adiabat::grid::TimeGrid;
use adiabat::hierarchy::{build_hierarchy_auto, fit_delta_decay, Hierarchy};
use adiabat::nilpotent::{boundedness_dichotomy, evolve_nilpotent, growth_exponent, NilpotentFamily};
use adiabat::oracles::{nilpotent_example_propagator, IntroClosedForm};
use adiabat::propagator::{evolve, OmegaProfile};
use adiabat::scaled::ScaledValue;
use adiabat::spectral::{decompose, SpectralDecomposition};
use adiabat::{Error, C64};
use rayon::prelude::*;
use serde::Deserialize;

use crate::config::{ExperimentConfig, FamilySpec, OutputSpec};
use crate::error::{CliError, CliResult};
use crate::report::{
    ComparisonRecord, DichotomyRecord, EvolutionRecord, FailedRecord, NilpotentRecord, NodeRecord, Record,
    Report, ScanRecord, SummaryValue,
};

/// Settings shared by every subcommand.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    /// Overrides the config tolerance when set.
    pub tol: Option<f64>,
    pub seed: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            tol: None,
            seed: acceptance::DEFAULT_SEED,
        }
    }
}

impl RunOptions {
    pub fn apply(&self, config: &ExperimentConfig) -> CliResult<ExperimentConfig> {
        let mut c = config.clone();
        if let Some(t) = self.tol {
            c.tol = t;
            c.validate()?;
        }
        Ok(c)
    }
}

fn with_t(e: Error, t: f64) -> Error {
    match e {
        Error::GapViolation { distance, gap_floor, .. } => Error::GapViolation {
            t: Some(t),
            distance,
            gap_floor,
        },
        other => other,
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Spectral data at every grid node; stops at the first node that violates the gap floor.
pub fn run_decompose(config: &ExperimentConfig, opts: &RunOptions) -> CliResult<Report> {
    let c = opts.apply(config)?;
    let fam = c.family.build("family")?;
    let grid = TimeGrid::new(c.grid_size).map_err(|e| CliError::Config(format!("grid_size: {e}")))?;
    let mut report = Report::new(&c, "decompose", &fam.name, opts.seed);
    let mut min_gap = f64::INFINITY;
    let mut omega_max = f64::NEG_INFINITY;
    for &t in grid.nodes() {
        let d = decompose(&fam.eval(t), c.gap_floor)
            .map_err(|e| CliError::numerical(format!("decompose at t = {t}"), with_t(e, t)))?;
        min_gap = min_gap.min(d.min_gap);
        omega_max = omega_max.max(d.omega);
        report.records.push(Record::Node(NodeRecord {
            t,
            eigenvalues: d.groups.iter().map(|g| g.eigenvalue).collect(),
            multiplicities: d.groups.iter().map(|g| g.multiplicity).collect(),
            nilpotency_indices: d.groups.iter().map(|g| g.nilpotency_index).collect(),
            min_gap: finite(d.min_gap),
            omega: d.omega,
        }));
    }
    if let Some(g) = finite(min_gap) {
        report.summary.insert("min_gap".into(), SummaryValue::Number(g));
    }
    report.summary.insert("omega_max".into(), SummaryValue::Number(omega_max));
    Ok(report)
}

fn group_near(d: &SpectralDecomposition, z: C64) -> usize {
    (0..d.groups.len())
        .min_by(|&a, &b| (d.groups[a].eigenvalue - z).norm().total_cmp(&(d.groups[b].eigenvalue - z).norm()))
        .expect("at least one group")
}

/// `U(t,s)` per ε with its block transitions; the intro family also gets closed-form rows.
pub fn run_evolve(config: &ExperimentConfig, opts: &RunOptions) -> CliResult<Report> {
    let c = opts.apply(config)?;
    let fam = c.family.build("family")?;
    let (s, t) = (c.evolve.s, c.evolve.t);
    let mut report = Report::new(&c, "evolve", &fam.name, opts.seed);
    let omega = OmegaProfile::from_family(&fam).map_err(|e| CliError::numerical("omega profile", e))?;
    let at_s = decompose(&fam.eval(s), c.gap_floor)
        .map_err(|e| CliError::numerical(format!("decompose at s = {s}"), with_t(e, s)))?;
    let at_t = decompose(&fam.eval(t), c.gap_floor)
        .map_err(|e| CliError::numerical(format!("decompose at t = {t}"), with_t(e, t)))?;
    let results: Vec<adiabat::Result<EvolutionRecord>> = c
        .epsilon_grid
        .par_iter()
        .map(|&eps| {
            let u = evolve(&fam, eps, s, t, &omega, c.tol)?;
            let mut transitions = Vec::with_capacity(at_t.groups.len());
            for j in 0..at_t.groups.len() {
                let row = (0..at_s.groups.len())
                    .map(|k| transition_amplitude(&u, &at_t, &at_s, j, k).map(|v| v.normalized()))
                    .collect::<adiabat::Result<Vec<_>>>()?;
                transitions.push(row);
            }
            Ok(EvolutionRecord {
                evolution: u.summary(),
                transitions,
            })
        })
        .collect();
    let mut exponent_points = Vec::new();
    for (&eps, r) in c.epsilon_grid.iter().zip(results) {
        match r {
            Ok(rec) => {
                if let FamilySpec::IntroExample { a, k, a_im, k_im } = c.family {
                    let params = IntroParams::new(C64::new(a, a_im), C64::new(k, k_im));
                    match intro_comparison(params, eps, s, t, &at_s, &at_t, &rec) {
                        Ok(cmp) => {
                            exponent_points.push((1.0 / eps.sqrt(), cmp.numerical.ln() - cmp.closed_form.value.ln()));
                            report.records.push(Record::Evolution(rec));
                            report.records.push(Record::Comparison(cmp));
                            continue;
                        }
                        Err(e) => {
                            report
                                .summary
                                .insert("closed_form".into(), SummaryValue::Text(format!("not available: {e}")));
                        }
                    }
                }
                report.records.push(Record::Evolution(rec));
            }
            Err(e) => report.records.push(Record::Failed(FailedRecord::new(Some(eps), &e))),
        }
    }
    if exponent_points.len() >= 2 {
        let (x, y): (Vec<f64>, Vec<f64>) = exponent_points.into_iter().unzip();
        if let Ok(l) = linear_fit(&x, &y) {
            report.summary.insert("transition_exponent".into(), SummaryValue::Number(l.slope));
        }
    }
    Ok(report)
}

/// `‖P₀(t) U(t,0) P₁(0)‖` against its closed form; the λ = 0 and λ = 1 groups are picked by position.
fn intro_comparison(
    params: IntroParams,
    eps: f64,
    s: f64,
    t: f64,
    at_s: &SpectralDecomposition,
    at_t: &SpectralDecomposition,
    rec: &EvolutionRecord,
) -> adiabat::Result<ComparisonRecord> {
    if s != 0.0 {
        return Err(Error::InvalidArgument("closed form is anchored at s = 0".into()));
    }
    let closed_form = IntroClosedForm::new(params, eps)?.transition_lab(t)?;
    let j = group_near(at_t, C64::new(0.0, 0.0));
    let k = group_near(at_s, C64::new(1.0, 0.0));
    let numerical = rec.transitions[j][k];
    Ok(ComparisonRecord {
        quantity: "transition_0_1".into(),
        epsilon: eps,
        t,
        numerical,
        // kept unnormalized: `value` is the ε-dependent prefactor
        closed_form,
        rel_error: (numerical.ln() - closed_form.ln()).exp() - 1.0,
    })
}

struct ScanOutcome {
    record: ScanRecord,
    hierarchy: Hierarchy,
}

fn scan_one(fam: &GeneratorFamily, eps: f64, c: &ExperimentConfig) -> adiabat::Result<ScanOutcome> {
    let h = build_hierarchy_auto(fam, eps, c.gap_floor, c.grid_size, c.q_max)?;
    let b0 = build_approximation(fam, &h, 0, c.tol)?;
    let bq = if h.q_star == 0 {
        b0.clone()
    } else {
        build_approximation(fam, &h, h.q_star, c.tol)?
    };
    Ok(ScanOutcome {
        record: ScanRecord {
            epsilon: eps,
            grid_size: h.grid.len(),
            q_star: h.q_star,
            deltas: h.deltas.clone(),
            stopped_early: h.stopped_early,
            trivially_converged: h.trivially_converged(),
            error_q0: b0.sup_error(),
            error_qstar: bq.sup_error(),
            bundle: BundleSummary::from(&bq),
        },
        hierarchy: h,
    })
}

/// Hierarchy, optimal level and error per ε, then cross-ε fits.
///
/// A library error at one ε becomes a `failed` record; the scan continues.
pub fn run_superadiabatic_scan(config: &ExperimentConfig, opts: &RunOptions) -> CliResult<Report> {
    let c = opts.apply(config)?;
    let fam = c.family.build("family")?;
    let mut report = Report::new(&c, "superadiabatic", &fam.name, opts.seed);
    let results: Vec<adiabat::Result<ScanOutcome>> =
        c.epsilon_grid.par_iter().map(|&eps| scan_one(&fam, eps, &c)).collect();
    let mut hs = Vec::new();
    for (&eps, r) in c.epsilon_grid.iter().zip(results) {
        match r {
            Ok(o) => {
                report.records.push(Record::Scan(o.record));
                hs.push(o.hierarchy);
            }
            Err(e) => report.records.push(Record::Failed(FailedRecord::new(Some(eps), &e))),
        }
    }
    let trivial = !hs.is_empty() && hs.iter().all(|h| h.trivially_converged());
    report.summary.insert("trivially_converged".into(), SummaryValue::Flag(trivial));
    report
        .summary
        .insert("completed".into(), SummaryValue::Number(hs.len() as f64));
    if trivial {
        report.summary.insert("q_star".into(), SummaryValue::Number(0.0));
        return Ok(report);
    }
    match fit_delta_decay(&hs) {
        Ok(d) => {
            report.fits.insert("kappa".into(), d.decay);
            report.summary.insert("g".into(), SummaryValue::Number(d.g));
            report
                .summary
                .insert("q_star_r_squared".into(), SummaryValue::Number(d.q_star_r_squared));
        }
        Err(e) => {
            report.fit_errors.insert("kappa".into(), e.to_string());
        }
    }
    let (eps, ln): (Vec<f64>, Vec<f64>) = report.scan_rows().map(|s| (s.epsilon, s.error_qstar.ln())).unzip();
    let error_fit = if eps.len() < 4 {
        Err(Error::InsufficientData {
            needed: 4,
            found: eps.len(),
        })
    } else {
        fit_exp_inverse_eps(&eps, &ln)
    };
    report.record_fit("error_law", error_fit);
    Ok(report)
}

/// Growth, dichotomy and (for the built-in example) closed-form rows for `εY' = N Y`.
pub fn run_nilpotent_scan(config: &ExperimentConfig, opts: &RunOptions) -> CliResult<Report> {
    let c = opts.apply(config)?;
    let fam = c.family.build("family")?;
    let perturbation = match &c.nilpotent.perturbation {
        Some(p) => Some(p.build("nilpotent.perturbation")?),
        None => None,
    };
    let mut report = Report::new(&c, "nilpotent", &fam.name, opts.seed);
    let nf = NilpotentFamily::new(fam, perturbation).map_err(|e| CliError::numerical("family", e))?;
    report
        .summary
        .insert("nilpotency_index".into(), SummaryValue::Number(nf.index as f64));
    match growth_exponent(&nf, &c.epsilon_grid, c.tol) {
        Ok(g) => {
            for s in &g.samples {
                report.records.push(Record::Nilpotent(NilpotentRecord {
                    epsilon: s.epsilon,
                    sup: *s,
                }));
            }
            if let Some((_, _, beta)) = g.fit.stretched() {
                report.summary.insert("beta".into(), SummaryValue::Number(beta));
            }
            report.summary.insert("bounded".into(), SummaryValue::Flag(g.fit.bounded));
            report.fits.insert("growth".into(), g.fit);
            if let Some(p) = g.power_law {
                report.fits.insert("power_law".into(), p);
            }
        }
        Err(e) => {
            report.fit_errors.insert("growth".into(), e.to_string());
        }
    }
    let (s, t) = (c.nilpotent.s, c.nilpotent.t);
    match boundedness_dichotomy(&nf, &c.epsilon_grid, s, t, c.tol) {
        Ok(d) => report.records.push(Record::Dichotomy(DichotomyRecord {
            verdict: d.verdict,
            s,
            t,
            ratio: d.ratio,
            sup_n: d.sup_n,
            norms: d.norms,
        })),
        Err(e) => report.records.push(Record::Failed(FailedRecord::new(None, &e))),
    }
    let closed = matches!(c.family, FamilySpec::NilpotentExample) && nf.perturbation.is_none() && s == 0.0;
    if closed {
        for &eps in &c.epsilon_grid {
            let row = evolve_nilpotent(&nf, eps, 0.0, t, c.tol).and_then(|y| {
                let want = nilpotent_example_propagator(eps, t)?;
                let w = want.rescaled_to(y.log_scale);
                let mut rel: f64 = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        rel = rel.max((y.matrix[(i, j)] - w[(i, j)]).norm() / w[(i, j)].norm().max(f64::MIN_POSITIVE));
                    }
                }
                Ok(ComparisonRecord {
                    quantity: "propagator_entries".into(),
                    epsilon: eps,
                    t,
                    numerical: ScaledValue::new(y.matrix.norm2(), y.log_scale).normalized(),
                    closed_form: want.norm2().normalized(),
                    rel_error: rel,
                })
            });
            match row {
                Ok(r) => report.records.push(Record::Comparison(r)),
                Err(e) => report.records.push(Record::Failed(FailedRecord::new(Some(eps), &e))),
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Deserialize)]
struct SeriesRow {
    epsilon: f64,
    value: f64,
    #[serde(default)]
    log_scale: f64,
}

/// Reads `epsilon,value[,log_scale]` rows with a header.
pub fn read_series(reader: impl Read) -> CliResult<Vec<SeriesPoint>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader)
        .deserialize::<SeriesRow>()
        .enumerate()
        .map(|(i, row)| {
            let row = row.map_err(|e| CliError::Config(format!("series row {}: {e}", i + 1)))?;
            Ok(SeriesPoint {
                epsilon: row.epsilon,
                value: row.value,
                log_scale: row.log_scale,
            })
        })
        .collect()
}

pub fn run_fit(series: &[SeriesPoint], model: GrowthModel) -> CliResult<GrowthFit> {
    fit(series, model).map_err(|e| CliError::numerical("fit", e))
}

pub fn run_acceptance(ids: &[u8], opts: &RunOptions) -> Vec<CriterionOutcome> {
    acceptance::run(ids, opts.seed)
}

/// Built-in experiments: `intro`, `nilpotent`, `two_level`.
pub fn example_config(name: &str) -> CliResult<(ExperimentConfig, &'static str)> {
    let base = |id: &str, family: FamilySpec, grid: &[f64]| ExperimentConfig {
        schema_version: crate::config::SCHEMA_VERSION,
        id: id.into(),
        epsilon_grid: grid.to_vec(),
        grid_size: 65,
        tol: 1e-10,
        q_max: 16,
        gap_floor: 0.5,
        seed: None,
        family,
        evolve: Default::default(),
        nilpotent: Default::default(),
        outputs: Vec::<OutputSpec>::new(),
    };
    Ok(match name {
        "intro" => (
            base(
                "intro_transition",
                FamilySpec::IntroExample {
                    a: 1.0,
                    k: -1.0,
                    a_im: 0.0,
                    k_im: 0.0,
                },
                &[0.04, 0.02, 0.01],
            ),
            "evolve",
        ),
        "nilpotent" => (
            base("nilpotent_growth", FamilySpec::NilpotentExample, &acceptance::DECADE_EPSILONS),
            "nilpotent",
        ),
        "two_level" => (
            base(
                "two_level_scan",
                FamilySpec::TwoLevel {
                    delta: 0.2,
                    coupling: 1.0,
                },
                &acceptance::TWO_LEVEL_EPSILONS,
            ),
            "superadiabatic",
        ),
        other => {
            return Err(CliError::Config(format!(
                "unknown example '{other}' (expected intro, nilpotent or two_level)"
            )))
        }
    })
}

pub fn run_command(command: &str, config: &ExperimentConfig, opts: &RunOptions) -> CliResult<Report> {
    match command {
        "decompose" => run_decompose(config, opts),
        "evolve" => run_evolve(config, opts),
        "superadiabatic" => run_superadiabatic_scan(config, opts),
        "nilpotent" => run_nilpotent_scan(config, opts),
        other => Err(CliError::Config(format!("unknown command '{other}'"))),
    }
}
